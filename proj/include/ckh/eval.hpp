#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ckh/core.hpp"
#include "ckh/fuse.hpp"
#include "ckh/ingest.hpp"
#include "json.hpp"

namespace ckh {

struct GroundTruthEdge {
    VariableId from;
    VariableId to;
    double coefficient = 0.0;
};

// Linear-Gaussian SEM used as ground truth.
struct GroundTruthSpec {
    std::vector<VariableId> variables;
    std::vector<GroundTruthEdge> edges;
    std::map<VariableId, double> intercepts;       // default 0
    std::map<VariableId, double> noise_variances;  // default 1

    VariableSet variable_set() const { return {variables.begin(), variables.end()}; }
    EdgeSet edge_set() const;
};

// Throws InvalidSpec on a cycle, unknown variable, or non-positive variance.
void validate_spec(const GroundTruthSpec& spec);

GroundTruthSpec parse_ground_truth(const nlohmann::json& doc);
GroundTruthSpec load_ground_truth(const std::filesystem::path& path);
nlohmann::json ground_truth_to_json(const GroundTruthSpec& spec);

// Ancestral sampling in topological order. All variables are drawn from one
// seeded stream, then `columns` (default: all, in spec order) are kept, so a
// column subset shares its draws with the full simulation at the same seed.
Dataset simulate_data(const GroundTruthSpec& spec, std::int64_t n, std::uint64_t seed,
                      std::span<const VariableId> columns = {}, std::string name = "simulated");

struct MetricsReport {
    double tp = 0, fp = 0, fn = 0, tn = 0;
    double tpr = 0, fdr = 0, mcc = 0;
};

// Per unordered pair: both absent -> tn; only predicted -> fp; only true -> fn;
// same direction -> tp; opposite directions -> one fp and one fn.
MetricsReport compare_edge_sets(const VariableSet& variables, const EdgeSet& predicted,
                                const EdgeSet& truth);
MetricsReport compare_graphs(const Scm& predicted, const GroundTruthSpec& truth);

nlohmann::json metrics_to_json(const MetricsReport& m);

struct PerturbationOutcome {
    ScenarioInputs inputs;
    std::vector<std::string> warnings;
};

// Pure: returns a modified copy. Expert and Literature targets are edited in
// place; Data-tier perturbations are queued for the learner outputs.
PerturbationOutcome apply_perturbation(const ScenarioInputs& inputs, const Perturbation& p);

// The three alterations of the sensitivity grid:
//   A1 add false C -> D, A2 reverse true E -> G, A3 remove true B -> F.
std::array<Perturbation, 3> default_alterations(Tier target,
                                                InjectionScope scope = InjectionScope::FirstCoveringSource);

struct SensitivityCase {
    std::string tier;        // "none" for the baseline
    std::string alteration;  // "none", "A1", "A1+A2", ...
    std::vector<Perturbation> perturbations;
};

// Baseline plus, per tier, cumulative prefixes of `alterations`.
std::vector<SensitivityCase> default_schedule(InjectionScope scope = InjectionScope::FirstCoveringSource);

struct SensitivityRow {
    std::string tier;
    std::string alteration;
    std::array<double, 3> alphas{};
    MetricsReport metrics;
    std::vector<std::string> warnings;
    std::optional<std::string> error;
};

// Runs each case in parallel on an isolated copy of `inputs`. A failing case is
// reported in its row; the others proceed.
std::vector<SensitivityRow> sensitivity_run(const ScenarioConfig& config, const ScenarioInputs& inputs,
                                            const GroundTruthSpec& truth,
                                            std::span<const SensitivityCase> schedule);

std::string sensitivity_to_csv(std::span<const SensitivityRow> rows);

}  // namespace ckh
