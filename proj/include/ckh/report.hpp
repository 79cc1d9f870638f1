#pragma once

#include <string>

#include "ckh/core.hpp"
#include "ckh/fuse.hpp"
#include "json.hpp"

namespace ckh {

// {variables, exogenous, edges: [{from, to, confidence}], mechanisms: {v: {...}}}
nlohmann::json scm_to_json(const Scm& scm);
Scm scm_from_json(const nlohmann::json& doc);

nlohmann::json matrix_to_json(const ScoringMatrix& m);
nlohmann::json summary_to_json(const TierSummary& s);

// Full audit trail of one fusion run.
nlohmann::json run_report(const FusionResult& r);

// Graphviz digraph; edge labels carry the confidence to 4 decimals.
std::string scm_to_dot(const Scm& scm);

}  // namespace ckh
