#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ckh/core.hpp"
#include "json.hpp"

namespace ckh {

struct Dataset {
    std::string name;
    std::vector<VariableId> columns;
    Eigen::MatrixXd rows;  // n_rows x n_cols

    Eigen::Index n_rows() const noexcept { return rows.rows(); }
    Eigen::Index n_cols() const noexcept { return rows.cols(); }
    bool has(const VariableId& v) const;
    // Throws InvalidInput if `v` is not a column.
    Eigen::Index index_of(const VariableId& v) const;
    VariableSet variables() const;
    // Copy restricted to `columns`, in the given order.
    Dataset select(std::span<const VariableId> columns, std::string new_name) const;
};

enum class Phase { Initial, Informed };

struct ExpertSubmission {
    std::string expert_id;
    Phase phase = Phase::Initial;
    std::vector<EdgeAssertion> assertions;
};

// Knowledge-source document:
//   {id, tier: "expert"|"data"|"literature", scope: "global" | [names],
//    assertions: [{from, to, relation, confidence}]}
// Without a scope the source covers the variables it mentions.
KnowledgeSource parse_source(const nlohmann::json& doc);
KnowledgeSource parse_source_file(const std::filesystem::path& path);
nlohmann::json source_to_json(const KnowledgeSource& source);

ExpertSubmission parse_submission(const nlohmann::json& doc);
ExpertSubmission parse_submission_file(const std::filesystem::path& path);
nlohmann::json submission_to_json(const ExpertSubmission& submission);

// Reads a JSON file, mapping syntax errors to ParseError with a line number.
nlohmann::json read_json_file(const std::filesystem::path& path);

struct MergedExperts {
    VariableSet variables;
    std::vector<KnowledgeSource> sources;  // one per expert, sorted by id
};

// Folds each expert's elicitation phases into one rater. Per pair, a
// relation's confidence is its mean over that expert's phases (a phase that
// omits the pair contributes 0). The published superset handed to experts
// between phases is `published` plus every Initial-phase variable; Informed
// submissions may not go beyond it.
MergedExperts merge_expert_phases(std::span<const ExpertSubmission> submissions,
                                  const VariableSet& published = {});

// RFC-4180 CSV with a header row of variable names and numeric cells.
Dataset parse_dataset(const std::string& text, std::string name);
Dataset load_dataset(const std::filesystem::path& path);
std::string dataset_to_csv(const Dataset& data);

}  // namespace ckh
