#include "ckh/fuse.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "ckh/pdag.hpp"

namespace ckh {
namespace {

TierSummary empty_summary(Tier tier, double weight) {
    TierSummary s;
    s.tier = tier;
    s.weight = weight;
    s.alpha = 1.0;  // no raters: degenerate agreement
    return s;
}

TierSummary summarize_sources(std::span<const KnowledgeSource> sources, const VariableSet& variables,
                              Tier tier, double weight, bool elicited) {
    if (sources.empty() || variables.size() < 2) return empty_summary(tier, weight);
    const ScoringMatrix matrix = build_scoring_matrix(sources, variables);
    std::optional<ExpertConfidences> expert;
    if (elicited) expert = expert_confidences(sources, variables);
    return summarize_tier(matrix, tier, weight, expert);
}

bool is_directed(Direction d) { return d == Direction::Forward || d == Direction::Backward; }

DirectedEdge as_edge(const VarPair& p, Direction d) {
    return d == Direction::Forward ? DirectedEdge{p.a, p.b} : DirectedEdge{p.b, p.a};
}

// Drops (in ascending confidence order) edges that would close a cycle.
EdgeSet acyclic_subset(const std::vector<std::pair<DirectedEdge, double>>& ranked,
                       const VariableSet& variables) {
    auto order = ranked;
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& x, const auto& y) { return x.second > y.second; });
    EdgeSet kept;
    for (const auto& [e, c] : order) {
        kept.insert(e);
        if (!is_acyclic(variables, kept)) kept.erase(e);
    }
    return kept;
}

}  // namespace

std::string_view to_string(PerturbationKind k) {
    switch (k) {
        case PerturbationKind::AddFalse: return "add_false";
        case PerturbationKind::ReverseTrue: return "reverse_true";
        case PerturbationKind::RemoveTrue: return "remove_true";
    }
    return "?";
}

std::string_view to_string(OrientAction a) {
    switch (a) {
        case OrientAction::Flipped: return "flipped";
        case OrientAction::Dropped: return "dropped";
        case OrientAction::RuleOriented: return "rule_oriented";
        case OrientAction::ForceOriented: return "force_oriented";
    }
    return "?";
}

Tier1Result run_tier1(std::span<const KnowledgeSource> experts, const TierWeights& weights,
                      double threshold) {
    for (const auto& s : experts) {
        if (s.tier != Tier::Expert) {
            throw Error(ErrorKind::InvalidInput, "source '" + s.id + "' is not an expert source");
        }
    }
    Tier1Result out;
    out.summary = summarize_sources(experts, tier_variables(experts), Tier::Expert,
                                    weights.expert, /*elicited=*/true);

    std::vector<std::pair<DirectedEdge, double>> candidates;
    for (const auto& [pair, score] : out.summary.scores) {
        if (is_directed(score.direction) && score.confidence >= threshold) {
            candidates.emplace_back(as_edge(pair, score.direction), score.confidence);
        }
    }
    const VariableSet vars = tier_variables(experts);
    out.whitelist.edges = acyclic_subset(candidates, vars);
    for (const auto& [e, c] : candidates) {
        if (!out.whitelist.edges.contains(e)) out.rejected.push_back(e);
    }
    return out;
}

Tier2Result run_tier2(std::span<const Dataset> datasets, std::span<const std::string> learners,
                      const Whitelist& whitelist, const TierWeights& weights, double ci_alpha,
                      std::span<const KnowledgeSource> extra_sources,
                      std::span<const Perturbation> post_hoc) {
    if (!datasets.empty() && learners.empty()) {
        throw Error(ErrorKind::InvalidInput, "datasets given but no structure learners selected");
    }
    Tier2Result out;
    GridResult grid = run_learner_grid(datasets, learners, whitelist, ci_alpha);
    out.failures = std::move(grid.failures);
    out.graphs = std::move(grid.graphs);
    for (const auto& p : post_hoc) out.graphs = perturb_graphs(std::move(out.graphs), p, out.warnings);

    out.sources = graphs_to_sources(out.graphs);
    for (const auto& s : extra_sources) {
        if (s.tier != Tier::Data) {
            throw Error(ErrorKind::InvalidInput, "source '" + s.id + "' is not a data source");
        }
        out.sources.push_back(s);
    }

    VariableSet vars = tier_variables(out.sources);
    for (const auto& d : datasets) vars.merge(d.variables());
    out.summary = summarize_sources(out.sources, vars, Tier::Data, weights.data, false);

    std::vector<std::pair<DirectedEdge, double>> consensus;
    for (const auto& [pair, score] : out.summary.scores) {
        if (is_directed(score.direction)) consensus.emplace_back(as_edge(pair, score.direction), score.confidence);
    }
    std::vector<std::string> diagnostics;
    out.mechanisms = fit_mechanisms(datasets, vars, acyclic_subset(consensus, vars), &diagnostics);
    out.warnings.insert(out.warnings.end(), diagnostics.begin(), diagnostics.end());
    return out;
}

TierSummary run_tier3(std::span<const KnowledgeSource> literature, const TierWeights& weights) {
    for (const auto& s : literature) {
        if (s.tier != Tier::Literature) {
            throw Error(ErrorKind::InvalidInput, "source '" + s.id + "' is not a literature source");
        }
    }
    return summarize_sources(literature, tier_variables(literature), Tier::Literature,
                             weights.literature, false);
}

Resolution resolve_conflicts(std::span<const TierSummary> summaries) {
    std::set<Tier> seen;
    std::set<VarPair> pairs;
    for (const auto& s : summaries) {
        if (!seen.insert(s.tier).second) {
            throw Error(ErrorKind::InvalidInput, "duplicate summary for tier " + std::string(to_string(s.tier)));
        }
        for (const auto& [p, _] : s.scores) pairs.insert(p);
    }

    Resolution out;
    for (const auto& pair : pairs) {
        CombinedEdge edge;
        edge.pair = pair;
        const TierSummary* winner = nullptr;
        const EdgeScore* best = nullptr;
        double unresolved_mass = 0.0;

        for (const auto& s : summaries) {
            auto it = s.scores.find(pair);
            if (it == s.scores.end()) continue;
            const EdgeScore& score = it->second;
            edge.per_tier.emplace(s.tier, score);
            if (score.weighted_confidence <= 0.0) continue;
            if (score.direction == Direction::Unresolved) unresolved_mass += score.weighted_confidence;
            if (!is_directed(score.direction)) continue;

            bool take = best == nullptr;
            if (!take) {
                const double diff = score.weighted_confidence - best->weighted_confidence;
                if (std::abs(diff) <= 1e-12) {
                    take = s.weight > winner->weight ||
                           (s.weight == winner->weight && s.tier > winner->tier);
                } else {
                    take = diff > 0.0;
                }
            }
            if (take) {
                winner = &s;
                best = &score;
            }
        }

        if (best != nullptr) {
            edge.direction = best->direction;
            ConflictRecord conflict{pair, winner->tier, best->direction, {}};
            for (const auto& [tier, score] : edge.per_tier) {
                if (score.direction == best->direction) {
                    edge.combined_confidence += score.weighted_confidence;
                } else if (is_directed(score.direction) && score.weighted_confidence > 0.0) {
                    conflict.overridden.emplace_back(tier, score);
                }
            }
            if (!conflict.overridden.empty()) out.conflicts.push_back(std::move(conflict));
        } else if (unresolved_mass > 0.0) {
            edge.direction = Direction::Unresolved;
            edge.combined_confidence = unresolved_mass;
        }
        edge.combined_confidence = std::min(edge.combined_confidence, 1.0);
        out.edges.emplace(pair, std::move(edge));
    }
    return out;
}

std::map<VariableId, Mechanism> fit_mechanisms(std::span<const Dataset> datasets,
                                               const VariableSet& variables, const EdgeSet& edges,
                                               std::vector<std::string>* diagnostics) {
    std::map<VariableId, Mechanism> out;
    for (const auto& v : variables) {
        Mechanism m;
        for (const auto& e : edges) {
            if (e.to == v) m.parents.push_back(e.from);
        }
        m.coefficients.assign(m.parents.size(), 0.0);

        const Dataset* chosen = nullptr;
        for (const auto& d : datasets) {
            const bool covers = d.has(v) && std::all_of(m.parents.begin(), m.parents.end(),
                                                        [&](const VariableId& p) { return d.has(p); });
            if (!covers) continue;
            if (chosen == nullptr || d.n_rows() > chosen->n_rows() ||
                (d.n_rows() == chosen->n_rows() && d.n_cols() > chosen->n_cols())) {
                chosen = &d;
            }
        }
        if (chosen != nullptr) {
            std::vector<VariableId> cols = m.parents;
            cols.push_back(v);
            EdgeSet family;
            for (const auto& p : m.parents) family.insert({p, v});
            try {
                m = fit_parameters(chosen->select(cols, chosen->name), family).at(v);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::SingularityError && e.kind() != ErrorKind::InsufficientData) throw;
                if (diagnostics) diagnostics->push_back("mechanism for " + v.name() + " left unfitted: " + e.what());
            }
        } else if (diagnostics) {
            diagnostics->push_back("no dataset covers " + v.name() + " and its parents; mechanism unfitted");
        }
        out.emplace(v, std::move(m));
    }
    return out;
}

Orientation orient_and_acyclify(const std::map<VarPair, CombinedEdge>& combined,
                                const VariableSet& variables, const MechanismContext& context) {
    std::vector<VariableId> names(variables.begin(), variables.end());
    for (const auto& [pair, _] : combined) {
        if (!variables.contains(pair.a) || !variables.contains(pair.b)) {
            throw Error(ErrorKind::InvalidInput, "combined edge " + to_string(pair) + " uses an unknown variable");
        }
    }
    auto index = [&](const VariableId& v) {
        return static_cast<std::size_t>(std::lower_bound(names.begin(), names.end(), v) - names.begin());
    };

    Pdag g(names.size());
    std::map<VarPair, double> confidence;
    Orientation out;

    // Directed edges: strongest first, lexicographic on ties.
    std::vector<const CombinedEdge*> directed;
    std::vector<const CombinedEdge*> undirected;
    for (const auto& [pair, e] : combined) {
        if (e.combined_confidence <= 0.0) continue;
        if (is_directed(e.direction)) directed.push_back(&e);
        if (e.direction == Direction::Unresolved) undirected.push_back(&e);
        confidence[pair] = e.combined_confidence;
    }
    std::stable_sort(directed.begin(), directed.end(), [](const CombinedEdge* x, const CombinedEdge* y) {
        return x->combined_confidence > y->combined_confidence;
    });

    for (const CombinedEdge* e : directed) {
        const DirectedEdge want = as_edge(e->pair, e->direction);
        const auto from = index(want.from), to = index(want.to);
        if (!g.creates_cycle(from, to)) {
            g.add_directed(from, to);
        } else if (!g.creates_cycle(to, from)) {
            g.add_directed(to, from);
            out.log.push_back({{want.to, want.from}, e->combined_confidence, OrientAction::Flipped});
        } else {
            out.log.push_back({want, e->combined_confidence, OrientAction::Dropped});
        }
    }

    for (const CombinedEdge* e : undirected) g.add_undirected(index(e->pair.a), index(e->pair.b));
    if (!undirected.empty()) {
        Pdag before = g;
        g.apply_orientation_rules();
        for (const CombinedEdge* e : undirected) {
            const auto a = index(e->pair.a), b = index(e->pair.b);
            if (before.undirected(a, b) && !g.undirected(a, b)) {
                const DirectedEdge got = g.directed(a, b) ? DirectedEdge{e->pair.a, e->pair.b}
                                                          : DirectedEdge{e->pair.b, e->pair.a};
                out.log.push_back({got, e->combined_confidence, OrientAction::RuleOriented});
            }
        }
        // Whatever the rules left undirected: low -> high unless that closes a cycle.
        for (const CombinedEdge* e : undirected) {
            const auto a = index(e->pair.a), b = index(e->pair.b);
            if (!g.undirected(a, b)) continue;
            g.remove(a, b);
            if (!g.creates_cycle(a, b)) {
                g.add_directed(a, b);
                out.log.push_back({{e->pair.a, e->pair.b}, e->combined_confidence, OrientAction::ForceOriented});
            } else {
                g.add_directed(b, a);
                out.log.push_back({{e->pair.b, e->pair.a}, e->combined_confidence, OrientAction::ForceOriented});
            }
        }
    }

    std::vector<WeightedEdge> edges;
    EdgeSet edge_set;
    for (std::size_t a = 0; a < names.size(); ++a) {
        for (std::size_t b = 0; b < names.size(); ++b) {
            if (!g.directed(a, b)) continue;
            edges.push_back({names[a], names[b], confidence.at(canonical_pair(names[a], names[b]).pair)});
            edge_set.insert({names[a], names[b]});
        }
    }

    std::map<VariableId, Mechanism> mechanisms;
    if (!context.datasets.empty() || context.tier2 != nullptr) {
        std::vector<std::string> ignored;
        EdgeSet to_refit;
        VariableSet refit_vars;
        for (const auto& v : variables) {
            std::vector<VariableId> parents;
            for (const auto& e : edge_set) {
                if (e.to == v) parents.push_back(e.from);
            }
            if (context.tier2 != nullptr) {
                auto it = context.tier2->find(v);
                if (it != context.tier2->end()) {
                    auto declared = it->second.parents;
                    std::sort(declared.begin(), declared.end());
                    if (declared == parents) {
                        mechanisms.emplace(v, it->second);
                        continue;
                    }
                }
            }
            refit_vars.insert(v);
            for (const auto& p : parents) to_refit.insert({p, v});
        }
        auto refit = fit_mechanisms(context.datasets, refit_vars, to_refit, &ignored);
        mechanisms.merge(refit);
    }
    out.scm = Scm(variables, std::move(edges), std::move(mechanisms));
    return out;
}

FusionResult fuse_all(const ScenarioConfig& config, const ScenarioInputs& inputs) {
    FusionResult out;
    out.config = config;
    out.weights = validate_weights(config.tier_weights);
    if (!(config.tier1_threshold >= 0.0 && config.tier1_threshold <= 1.0)) {
        throw Error(ErrorKind::ValidationError, "tier1_threshold must lie in [0,1]");
    }
    if (!(config.ci_alpha > 0.0 && config.ci_alpha < 1.0)) {
        throw Error(ErrorKind::ValidationError, "ci_alpha must lie in (0,1)");
    }
    if (out.weights.ordering_warning) {
        out.diagnostics.push_back("tier weights do not follow expert < data < literature");
    }
    const TierWeights& w = config.tier_weights;

    try {
        out.tier1 = run_tier1(inputs.experts, w, config.tier1_threshold);
    } catch (const Error& e) {
        throw e.with_context("tier expert");
    }
    try {
        out.tier2 = run_tier2(inputs.datasets, config.learners, out.tier1.whitelist, w, config.ci_alpha,
                              inputs.data_sources, inputs.data_perturbations);
    } catch (const Error& e) {
        throw e.with_context("tier data");
    }
    for (const auto& f : out.tier2.failures) {
        out.diagnostics.push_back("learner " + f.learner_id + " failed on " + f.dataset_id + ": " + f.message);
    }
    out.diagnostics.insert(out.diagnostics.end(), out.tier2.warnings.begin(), out.tier2.warnings.end());
    try {
        out.tier3 = run_tier3(inputs.literature, w);
    } catch (const Error& e) {
        throw e.with_context("tier literature");
    }

    out.variables = inputs.keywords;
    for (const auto* s : {&out.tier1.summary, &out.tier2.summary, &out.tier3}) {
        for (const auto& [pair, _] : s->scores) {
            out.variables.insert(pair.a);
            out.variables.insert(pair.b);
        }
    }
    for (const auto& d : inputs.datasets) out.variables.merge(d.variables());

    const std::vector<TierSummary> summaries{out.tier1.summary, out.tier2.summary, out.tier3};
    out.resolution = resolve_conflicts(summaries);
    out.orientation = orient_and_acyclify(out.resolution.edges, out.variables,
                                          MechanismContext{inputs.datasets, &out.tier2.mechanisms});
    return out;
}

}  // namespace ckh
