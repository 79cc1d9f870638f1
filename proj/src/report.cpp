#include "ckh/report.hpp"

#include <cstdio>

namespace ckh {

using nlohmann::json;

namespace {

json edge_json(const DirectedEdge& e) { return {{"from", e.from.name()}, {"to", e.to.name()}}; }

json pair_json(const VarPair& p) { return json::array({p.a.name(), p.b.name()}); }

json score_json(const EdgeScore& s) {
    return {{"pair", pair_json(s.pair)},
            {"direction", to_string(s.direction)},
            {"confidence", s.confidence},
            {"weighted_confidence", s.weighted_confidence}};
}

}  // namespace

json scm_to_json(const Scm& scm) {
    json doc;
    doc["variables"] = json::array();
    for (const auto& v : scm.endogenous()) doc["variables"].push_back(v.name());
    doc["exogenous"] = scm.exogenous();
    doc["edges"] = json::array();
    for (const auto& e : scm.edges()) {
        doc["edges"].push_back({{"from", e.from.name()}, {"to", e.to.name()}, {"confidence", e.confidence}});
    }
    doc["mechanisms"] = json::object();
    for (const auto& [v, m] : scm.mechanisms()) {
        json parents = json::array();
        for (const auto& p : m.parents) parents.push_back(p.name());
        doc["mechanisms"][v.name()] = {{"parents", parents},
                                       {"coefficients", m.coefficients},
                                       {"intercept", m.intercept},
                                       {"noise_variance", m.noise_variance},
                                       {"fitted", m.fitted}};
    }
    return doc;
}

Scm scm_from_json(const json& doc) {
    try {
        VariableSet vars;
        for (const auto& v : doc.at("variables")) vars.emplace(v.get<std::string>());
        std::vector<WeightedEdge> edges;
        for (const auto& e : doc.at("edges")) {
            edges.push_back({VariableId(e.at("from").get<std::string>()), VariableId(e.at("to").get<std::string>()),
                             e.value("confidence", 1.0)});
        }
        std::map<VariableId, Mechanism> mechs;
        if (doc.contains("mechanisms")) {
            for (const auto& [k, m] : doc.at("mechanisms").items()) {
                Mechanism mech;
                for (const auto& p : m.at("parents")) mech.parents.emplace_back(p.get<std::string>());
                mech.coefficients = m.at("coefficients").get<std::vector<double>>();
                mech.intercept = m.value("intercept", 0.0);
                mech.noise_variance = m.value("noise_variance", 0.0);
                mech.fitted = m.value("fitted", true);
                mechs.emplace(VariableId(k), std::move(mech));
            }
        }
        return Scm(std::move(vars), std::move(edges), std::move(mechs));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("scm: ") + e.what());
    }
}

json matrix_to_json(const ScoringMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        rows.push_back({{"pair", pair_json(m.pairs[i])}, {"votes", m.votes[i]}});
    }
    return {{"raters", m.rater_count}, {"rows", rows}};
}

json summary_to_json(const TierSummary& s) {
    json scores = json::array();
    for (const auto& [_, sc] : s.scores) scores.push_back(score_json(sc));
    return {{"tier", to_string(s.tier)},
            {"alpha", s.alpha},
            {"weight", s.weight},
            {"matrix", matrix_to_json(s.matrix)},
            {"scores", scores}};
}

json run_report(const FusionResult& r) {
    json doc;
    doc["problem_statement"] = r.config.problem_statement;
    doc["keywords"] = r.config.keywords;
    doc["weights"] = {{"expert", r.weights.weights.expert},
                      {"data", r.weights.weights.data},
                      {"literature", r.weights.weights.literature}};
    doc["weight_ordering_warning"] = r.weights.ordering_warning;
    doc["tier1_threshold"] = r.config.tier1_threshold;
    doc["ci_alpha"] = r.config.ci_alpha;
    doc["learners"] = r.config.learners;
    doc["variables"] = json::array();
    for (const auto& v : r.variables) doc["variables"].push_back(v.name());

    doc["tiers"] = json::array({summary_to_json(r.tier1.summary), summary_to_json(r.tier2.summary),
                                summary_to_json(r.tier3)});
    json wl = json::array();
    for (const auto& e : r.tier1.whitelist.edges) wl.push_back(edge_json(e));
    doc["whitelist"] = wl;
    json rejected = json::array();
    for (const auto& e : r.tier1.rejected) rejected.push_back(edge_json(e));
    doc["whitelist_rejected"] = rejected;

    json graphs = json::array();
    for (const auto& g : r.tier2.graphs) {
        json directed = json::array();
        for (const auto& e : g.directed_edges) directed.push_back(edge_json(e));
        json undirected = json::array();
        for (const auto& p : g.undirected_edges) undirected.push_back(pair_json(p));
        graphs.push_back({{"learner", g.learner_id},
                          {"dataset", g.dataset_id},
                          {"directed", directed},
                          {"undirected", undirected}});
    }
    doc["learned_graphs"] = graphs;
    json failures = json::array();
    for (const auto& f : r.tier2.failures) {
        failures.push_back({{"learner", f.learner_id}, {"dataset", f.dataset_id}, {"message", f.message}});
    }
    doc["learner_failures"] = failures;
    doc["warnings"] = r.tier2.warnings;

    json combined = json::array();
    for (const auto& [pair, c] : r.resolution.edges) {
        combined.push_back({{"pair", pair_json(pair)},
                            {"direction", to_string(c.direction)},
                            {"combined_confidence", c.combined_confidence}});
    }
    doc["combined"] = combined;
    json conflicts = json::array();
    for (const auto& c : r.resolution.conflicts) {
        json over = json::array();
        for (const auto& [t, s] : c.overridden) {
            over.push_back({{"tier", to_string(t)}, {"direction", to_string(s.direction)},
                            {"weighted_confidence", s.weighted_confidence}});
        }
        conflicts.push_back({{"pair", pair_json(c.pair)},
                             {"winner", to_string(c.winner)},
                             {"direction", to_string(c.direction)},
                             {"overridden", over}});
    }
    doc["conflicts"] = conflicts;
    json log = json::array();
    for (const auto& rec : r.orientation.log) {
        json entry = edge_json(rec.edge);
        entry["confidence"] = rec.confidence;
        entry["action"] = to_string(rec.action);
        log.push_back(entry);
    }
    doc["orientation_log"] = log;
    doc["diagnostics"] = r.diagnostics;
    doc["alphas"] = r.alphas();
    doc["scm"] = scm_to_json(r.scm());
    return doc;
}

std::string scm_to_dot(const Scm& scm) {
    std::string out = "digraph scm {\n";
    for (const auto& v : scm.endogenous()) out += "  \"" + v.name() + "\";\n";
    char buf[32];
    for (const auto& e : scm.edges()) {
        std::snprintf(buf, sizeof buf, "%.4f", e.confidence);
        out += "  \"" + e.from.name() + "\" -> \"" + e.to.name() + "\" [label=\"" + buf + "\"];\n";
    }
    out += "}\n";
    return out;
}

}  // namespace ckh
