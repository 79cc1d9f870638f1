#include "ckh/eval.hpp"

#include <cmath>
#include <cstdio>
#include <future>
#include <random>

namespace ckh {

using nlohmann::json;

EdgeSet GroundTruthSpec::edge_set() const {
    EdgeSet out;
    for (const auto& e : edges) out.insert({e.from, e.to});
    return out;
}

void validate_spec(const GroundTruthSpec& spec) {
    const VariableSet vars = spec.variable_set();
    if (vars.size() != spec.variables.size()) {
        throw Error(ErrorKind::InvalidSpec, "ground truth lists a variable twice");
    }
    std::set<VarPair> pairs;
    for (const auto& e : spec.edges) {
        if (!vars.contains(e.from) || !vars.contains(e.to)) {
            throw Error(ErrorKind::InvalidSpec, "edge " + e.from.name() + "->" + e.to.name() +
                                                    " uses an undeclared variable");
        }
        if (e.from == e.to) throw Error(ErrorKind::InvalidSpec, "self-loop on " + e.from.name());
        if (!pairs.insert(canonical_pair(e.from, e.to).pair).second) {
            throw Error(ErrorKind::InvalidSpec, "two edges between " + e.from.name() + " and " + e.to.name());
        }
        if (!std::isfinite(e.coefficient)) throw Error(ErrorKind::InvalidSpec, "non-finite coefficient");
    }
    if (!is_acyclic(vars, spec.edge_set())) throw Error(ErrorKind::InvalidSpec, "ground truth is cyclic");
    for (const auto& [v, var] : spec.noise_variances) {
        if (!vars.contains(v)) throw Error(ErrorKind::InvalidSpec, "noise variance for unknown " + v.name());
        if (!(var > 0.0)) throw Error(ErrorKind::InvalidSpec, "noise variance of " + v.name() + " must be > 0");
    }
    for (const auto& [v, _] : spec.intercepts) {
        if (!vars.contains(v)) throw Error(ErrorKind::InvalidSpec, "intercept for unknown " + v.name());
    }
}

GroundTruthSpec parse_ground_truth(const json& doc) {
    GroundTruthSpec spec;
    try {
        for (const auto& v : doc.at("variables")) spec.variables.emplace_back(v.get<std::string>());
        if (doc.contains("edges")) {
            for (const auto& e : doc.at("edges")) {
                spec.edges.push_back({VariableId(e.at("from").get<std::string>()),
                                      VariableId(e.at("to").get<std::string>()),
                                      e.value("coefficient", 1.0)});
            }
        }
        if (doc.contains("intercepts")) {
            for (const auto& [k, v] : doc.at("intercepts").items()) spec.intercepts[VariableId(k)] = v.get<double>();
        }
        if (doc.contains("noise_variances")) {
            for (const auto& [k, v] : doc.at("noise_variances").items()) {
                spec.noise_variances[VariableId(k)] = v.get<double>();
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidSpec, std::string("malformed ground truth: ") + e.what());
    }
    validate_spec(spec);
    return spec;
}

GroundTruthSpec load_ground_truth(const std::filesystem::path& path) {
    try {
        return parse_ground_truth(read_json_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IoError) throw;
        throw Error(ErrorKind::InvalidSpec, path.string() + ": " + e.what());
    }
}

json ground_truth_to_json(const GroundTruthSpec& spec) {
    json doc;
    doc["variables"] = json::array();
    for (const auto& v : spec.variables) doc["variables"].push_back(v.name());
    doc["edges"] = json::array();
    for (const auto& e : spec.edges) {
        doc["edges"].push_back({{"from", e.from.name()}, {"to", e.to.name()}, {"coefficient", e.coefficient}});
    }
    doc["intercepts"] = json::object();
    for (const auto& [v, x] : spec.intercepts) doc["intercepts"][v.name()] = x;
    doc["noise_variances"] = json::object();
    for (const auto& [v, x] : spec.noise_variances) doc["noise_variances"][v.name()] = x;
    return doc;
}

Dataset simulate_data(const GroundTruthSpec& spec, std::int64_t n, std::uint64_t seed,
                      std::span<const VariableId> columns, std::string name) {
    validate_spec(spec);
    if (n < 1) throw Error(ErrorKind::InvalidInput, "sample size must be at least 1");

    const auto order = *topological_order(spec.variable_set(), spec.edge_set());
    std::map<VariableId, Eigen::Index> col_of;
    for (std::size_t i = 0; i < spec.variables.size(); ++i) {
        col_of[spec.variables[i]] = static_cast<Eigen::Index>(i);
    }
    struct Node {
        Eigen::Index col;
        double intercept;
        double sd;
        std::vector<std::pair<Eigen::Index, double>> parents;
    };
    std::vector<Node> nodes;
    for (const auto& v : order) {
        Node node{col_of.at(v), 0.0, 1.0, {}};
        if (auto it = spec.intercepts.find(v); it != spec.intercepts.end()) node.intercept = it->second;
        if (auto it = spec.noise_variances.find(v); it != spec.noise_variances.end()) node.sd = std::sqrt(it->second);
        for (const auto& e : spec.edges) {
            if (e.to == v) node.parents.emplace_back(col_of.at(e.from), e.coefficient);
        }
        nodes.push_back(std::move(node));
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Dataset full;
    full.name = name;
    full.columns = spec.variables;
    full.rows.resize(n, static_cast<Eigen::Index>(spec.variables.size()));
    for (Eigen::Index r = 0; r < n; ++r) {
        for (const auto& node : nodes) {
            double x = node.intercept + node.sd * noise(rng);
            for (const auto& [p, coef] : node.parents) x += coef * full.rows(r, p);
            full.rows(r, node.col) = x;
        }
    }
    if (columns.empty()) return full;
    for (const auto& c : columns) {
        if (!col_of.contains(c)) throw Error(ErrorKind::InvalidInput, "unknown column '" + c.name() + "'");
    }
    return full.select(columns, std::move(name));
}

MetricsReport compare_edge_sets(const VariableSet& variables, const EdgeSet& predicted, const EdgeSet& truth) {
    MetricsReport m;
    for (const auto& pair : all_pairs(variables)) {
        const bool t_fwd = truth.contains({pair.a, pair.b});
        const bool t_bwd = truth.contains({pair.b, pair.a});
        const bool p_fwd = predicted.contains({pair.a, pair.b});
        const bool p_bwd = predicted.contains({pair.b, pair.a});
        const bool t_any = t_fwd || t_bwd;
        const bool p_any = p_fwd || p_bwd;
        if (!t_any && !p_any) {
            m.tn += 1;
        } else if (!t_any) {
            m.fp += 1;
        } else if (!p_any) {
            m.fn += 1;
        } else if (t_fwd == p_fwd && t_bwd == p_bwd) {
            m.tp += 1;
        } else {
            m.fp += 1;
            m.fn += 1;
        }
    }
    m.tpr = (m.tp + m.fn) > 0 ? m.tp / (m.tp + m.fn) : 0.0;
    m.fdr = (m.tp + m.fp) > 0 ? m.fp / (m.tp + m.fp) : 0.0;
    const double denom = (m.tp + m.fp) * (m.tp + m.fn) * (m.tn + m.fp) * (m.tn + m.fn);
    m.mcc = denom > 0 ? (m.tp * m.tn - m.fp * m.fn) / std::sqrt(denom) : 0.0;
    return m;
}

MetricsReport compare_graphs(const Scm& predicted, const GroundTruthSpec& truth) {
    if (predicted.endogenous() != truth.variable_set()) {
        throw Error(ErrorKind::InvalidInput, "predicted and ground-truth variable sets differ");
    }
    return compare_edge_sets(truth.variable_set(), predicted.edge_set(), truth.edge_set());
}

json metrics_to_json(const MetricsReport& m) {
    return {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn},
            {"tpr", m.tpr}, {"fdr", m.fdr}, {"mcc", m.mcc}};
}

std::array<Perturbation, 3> default_alterations(Tier target, InjectionScope scope) {
    return {Perturbation{PerturbationKind::AddFalse, {VariableId("C"), VariableId("D")}, target, scope},
            Perturbation{PerturbationKind::ReverseTrue, {VariableId("E"), VariableId("G")}, target, scope},
            Perturbation{PerturbationKind::RemoveTrue, {VariableId("B"), VariableId("F")}, target, scope}};
}

std::vector<SensitivityCase> default_schedule(InjectionScope scope) {
    std::vector<SensitivityCase> out{{"none", "none", {}}};
    const std::array<const char*, 3> labels{"A1", "A1+A2", "A1+A2+A3"};
    for (Tier t : kTiers) {
        const auto alts = default_alterations(t, scope);
        for (std::size_t k = 0; k < alts.size(); ++k) {
            out.push_back({std::string(to_string(t)), labels[k], {alts.begin(), alts.begin() + k + 1}});
        }
    }
    return out;
}

std::vector<SensitivityRow> sensitivity_run(const ScenarioConfig& config, const ScenarioInputs& inputs,
                                            const GroundTruthSpec& truth,
                                            std::span<const SensitivityCase> schedule) {
    std::vector<std::future<SensitivityRow>> futures;
    for (const auto& c : schedule) {
        futures.push_back(std::async(std::launch::async, [&config, &inputs, &truth, c] {
            SensitivityRow row;
            row.tier = c.tier;
            row.alteration = c.alteration;
            try {
                ScenarioInputs altered = inputs;
                for (const auto& p : c.perturbations) {
                    auto outcome = apply_perturbation(altered, p);
                    altered = std::move(outcome.inputs);
                    row.warnings.insert(row.warnings.end(), outcome.warnings.begin(), outcome.warnings.end());
                }
                const FusionResult fused = fuse_all(config, altered);
                row.alphas = fused.alphas();
                row.metrics = compare_graphs(fused.scm(), truth);
                row.warnings.insert(row.warnings.end(), fused.tier2.warnings.begin(), fused.tier2.warnings.end());
            } catch (const Error& e) {
                row.error = e.what();
            }
            return row;
        }));
    }
    std::vector<SensitivityRow> rows;
    for (auto& f : futures) rows.push_back(f.get());
    return rows;
}

std::string sensitivity_to_csv(std::span<const SensitivityRow> rows) {
    std::string out = "tier,alteration,alpha_t1,alpha_t2,alpha_t3,tpr,fdr,mcc\n";
    char buf[64];
    for (const auto& r : rows) {
        out += r.tier + "," + r.alteration;
        if (r.error) {
            out += ",,,,,,\n";
            continue;
        }
        for (double v : {r.alphas[0], r.alphas[1], r.alphas[2], r.metrics.tpr, r.metrics.fdr, r.metrics.mcc}) {
            std::snprintf(buf, sizeof buf, ",%.4f", v);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

}  // namespace ckh
