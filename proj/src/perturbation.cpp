#include <algorithm>

#include "ckh/eval.hpp"

namespace ckh {
namespace {

std::string describe(const Perturbation& p) {
    return std::string(to_string(p.kind)) + " " + p.edge.from.name() + "->" + p.edge.to.name() + " on tier " +
           std::string(to_string(p.target_tier));
}

void set_assertion(KnowledgeSource& s, const EdgeAssertion& a) {
    if (!s.scope.global) {
        s.scope.variables.insert(a.pair.a);
        s.scope.variables.insert(a.pair.b);
    }
    auto it = std::find_if(s.assertions.begin(), s.assertions.end(),
                           [&](const EdgeAssertion& x) { return x.pair == a.pair; });
    if (it != s.assertions.end()) {
        *it = a;
    } else {
        s.assertions.insert(std::upper_bound(s.assertions.begin(), s.assertions.end(), a,
                                             [](const EdgeAssertion& x, const EdgeAssertion& y) {
                                                 return x.pair < y.pair;
                                             }),
                            a);
    }
}

// Returns true if anything changed.
bool edit_sources(std::vector<KnowledgeSource>& sources, const Perturbation& p) {
    const auto canon = canonical_pair(p.edge.from, p.edge.to, Relation::Forward);
    switch (p.kind) {
        case PerturbationKind::AddFalse: {
            if (sources.empty()) return false;
            const EdgeAssertion a{canon.pair, canon.relation, 1.0};
            if (p.scope == InjectionScope::EverySource) {
                for (auto& s : sources) set_assertion(s, a);
                return true;
            }
            auto it = std::find_if(sources.begin(), sources.end(),
                                   [&](const KnowledgeSource& s) { return s.scope.covers(canon.pair); });
            set_assertion(it != sources.end() ? *it : sources.front(), a);
            return true;
        }
        case PerturbationKind::ReverseTrue: {
            bool changed = false;
            for (auto& s : sources) {
                for (auto& a : s.assertions) {
                    if (a.pair == canon.pair && a.relation == canon.relation) {
                        a.relation = flip(a.relation);
                        changed = true;
                    }
                }
            }
            return changed;
        }
        case PerturbationKind::RemoveTrue: {
            bool changed = false;
            for (auto& s : sources) {
                const auto before = s.assertions.size();
                std::erase_if(s.assertions, [&](const EdgeAssertion& a) {
                    return a.pair == canon.pair && a.relation != Relation::NoEdge;
                });
                changed |= s.assertions.size() != before;
            }
            return changed;
        }
    }
    return false;
}

}  // namespace

PerturbationOutcome apply_perturbation(const ScenarioInputs& inputs, const Perturbation& p) {
    PerturbationOutcome out{inputs, {}};
    if (p.edge.from == p.edge.to) throw Error(ErrorKind::InvalidPair, "perturbation on a self-pair");
    switch (p.target_tier) {
        case Tier::Expert:
            if (out.inputs.experts.empty()) throw Error(ErrorKind::InvalidInput, "expert tier is empty");
            if (!edit_sources(out.inputs.experts, p)) out.warnings.push_back("no-op: " + describe(p));
            break;
        case Tier::Literature:
            if (out.inputs.literature.empty()) throw Error(ErrorKind::InvalidInput, "literature tier is empty");
            if (!edit_sources(out.inputs.literature, p)) out.warnings.push_back("no-op: " + describe(p));
            break;
        case Tier::Data:
            if (out.inputs.datasets.empty() && out.inputs.data_sources.empty()) {
                throw Error(ErrorKind::InvalidInput, "data tier is empty");
            }
            out.inputs.data_perturbations.push_back(p);
            break;
    }
    return out;
}

std::vector<LearnedGraph> perturb_graphs(std::vector<LearnedGraph> graphs, const Perturbation& p,
                                         std::vector<std::string>& warnings) {
    const VarPair pair = canonical_pair(p.edge.from, p.edge.to).pair;
    const DirectedEdge reversed{p.edge.to, p.edge.from};
    bool changed = false;
    auto covers = [&](const LearnedGraph& g) {
        return g.variables.contains(p.edge.from) && g.variables.contains(p.edge.to);
    };
    auto add = [&](LearnedGraph& g) {
        g.variables.insert(p.edge.from);
        g.variables.insert(p.edge.to);
        g.undirected_edges.erase(pair);
        g.directed_edges.erase(reversed);
        g.directed_edges.insert(p.edge);
        changed = true;
    };

    switch (p.kind) {
        case PerturbationKind::AddFalse: {
            if (graphs.empty()) break;
            if (p.scope == InjectionScope::EverySource) {
                for (auto& g : graphs) add(g);
                break;
            }
            auto it = std::find_if(graphs.begin(), graphs.end(), covers);
            add(it != graphs.end() ? *it : graphs.front());
            break;
        }
        case PerturbationKind::ReverseTrue:
            for (auto& g : graphs) {
                if (g.directed_edges.erase(p.edge)) {
                    g.directed_edges.insert(reversed);
                    changed = true;
                }
            }
            break;
        case PerturbationKind::RemoveTrue:
            for (auto& g : graphs) {
                changed |= g.directed_edges.erase(p.edge) > 0;
                changed |= g.directed_edges.erase(reversed) > 0;
                changed |= g.undirected_edges.erase(pair) > 0;
            }
            break;
    }
    if (!changed) warnings.push_back("no-op: " + describe(p));
    return graphs;
}

}  // namespace ckh
