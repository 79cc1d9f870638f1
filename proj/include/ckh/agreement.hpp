#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>

#include "ckh/core.hpp"

namespace ckh {

// One row per unordered pair over `variables`. Each source spends a total
// mass of 1.0 on every row:
//   - pair outside its scope                -> all mass on NoInfo
//   - in scope, no assertion                -> all mass on NoEdge
//   - directed / no-edge assertion, conf c  -> c on that stance, 1-c on NoInfo
//   - undirected assertion, conf c          -> c/2 Forward, c/2 Backward, 1-c NoInfo
// Global-scope sources cover every pair over `variables`.
ScoringMatrix build_scoring_matrix(std::span<const KnowledgeSource> sources,
                                   const VariableSet& variables);

struct EdgeConfidence {
    Direction direction = Direction::Unresolved;
    double confidence = 0.0;
};

// Plurality over the informative columns (Forward, Backward, NoEdge); NoInfo
// never enters the denominator. A Forward/Backward tie is Unresolved, any tie
// involving NoEdge resolves to NoEdge.
EdgeConfidence edge_confidence(const VoteRow& row);

// Fleiss' kappa with k = 4 categories, clamped to [0, 1]. One rater or a
// single globally used category yields 1.0. Throws EmptyMatrix when m = 0.
double fleiss_kappa(const ScoringMatrix& matrix);

using AgreementFunction = std::function<double(const ScoringMatrix&)>;

inline double weighted_confidence(double confidence, double alpha, double weight) {
    return confidence * alpha * weight;
}

// Mean elicited confidence per stance for each pair, averaged over the
// experts whose scope covers the pair.
using ExpertConfidences = std::map<VarPair, VoteRow>;

ExpertConfidences expert_confidences(std::span<const KnowledgeSource> sources,
                                     const VariableSet& variables);

TierSummary summarize_tier(const ScoringMatrix& matrix, Tier tier, double weight,
                           const std::optional<ExpertConfidences>& expert = std::nullopt,
                           const AgreementFunction& irr = fleiss_kappa);

// Union of the variables every source references.
VariableSet tier_variables(std::span<const KnowledgeSource> sources);

}  // namespace ckh
