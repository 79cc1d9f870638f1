#pragma once

#include <cstdint>
#include <filesystem>

#include "ckh/core.hpp"
#include "ckh/fuse.hpp"
#include "json.hpp"

namespace ckh {

// Scenario config document. File references are resolved against `base_dir`.
//   {problem_statement, keywords, tier_weights: {expert, data, literature},
//    tier1_threshold, ci_alpha, sample_seed, learners,
//    experts: [paths], literature: [paths], data_sources: [paths],
//    datasets: [{path} | {name, columns, n}], ground_truth: path}
// Datasets without a path are simulated from the ground truth.
ScenarioConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ScenarioConfig load_config(const std::filesystem::path& path);

// Seed for the i-th simulated dataset of a scenario.
std::uint64_t dataset_seed(std::int64_t sample_seed, std::size_t index);

// Reads every referenced file. Expert files may be elicitation submissions
// (merged per expert) or expert-tier knowledge-source documents.
ScenarioInputs load_inputs(const ScenarioConfig& config);

}  // namespace ckh
