#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ckh/agreement.hpp"
#include "ckh/core.hpp"
#include "ckh/ingest.hpp"
#include "ckh/learn.hpp"

namespace ckh {

enum class PerturbationKind { AddFalse, ReverseTrue, RemoveTrue };

std::string_view to_string(PerturbationKind k);

// Where an AddFalse assertion is injected within the target tier.
enum class InjectionScope {
    FirstCoveringSource,  // first source whose scope covers the pair (else the first source)
    EverySource,
};

struct Perturbation {
    PerturbationKind kind = PerturbationKind::AddFalse;
    DirectedEdge edge;  // the edge added, or the true edge reversed / removed
    Tier target_tier = Tier::Expert;
    InjectionScope scope = InjectionScope::FirstCoveringSource;
};

// Applies a Data-tier perturbation to learner outputs. A reverse or remove
// that matches nothing appends a warning instead of failing.
std::vector<LearnedGraph> perturb_graphs(std::vector<LearnedGraph> graphs, const Perturbation& p,
                                         std::vector<std::string>& warnings);

// Everything the pipeline consumes, already loaded into memory.
struct ScenarioInputs {
    VariableSet keywords;                          // published variable superset
    std::vector<KnowledgeSource> experts;          // merged, one per expert
    std::vector<Dataset> datasets;
    std::vector<KnowledgeSource> data_sources;     // pre-learned graphs, if any
    std::vector<KnowledgeSource> literature;
    std::vector<Perturbation> data_perturbations;  // applied to learner outputs post hoc
};

struct Tier1Result {
    TierSummary summary;
    Whitelist whitelist;
    std::vector<DirectedEdge> rejected;  // above threshold but would close a whitelist cycle
};

Tier1Result run_tier1(std::span<const KnowledgeSource> experts, const TierWeights& weights,
                      double threshold);

struct Tier2Result {
    TierSummary summary;
    std::map<VariableId, Mechanism> mechanisms;
    std::vector<LearnedGraph> graphs;
    std::vector<KnowledgeSource> sources;
    std::vector<LearnerFailure> failures;
    std::vector<std::string> warnings;
};

Tier2Result run_tier2(std::span<const Dataset> datasets, std::span<const std::string> learners,
                      const Whitelist& whitelist, const TierWeights& weights, double ci_alpha,
                      std::span<const KnowledgeSource> extra_sources = {},
                      std::span<const Perturbation> post_hoc = {});

TierSummary run_tier3(std::span<const KnowledgeSource> literature, const TierWeights& weights);

struct CombinedEdge {
    VarPair pair;
    Direction direction = Direction::NoEdge;
    double combined_confidence = 0.0;
    std::map<Tier, EdgeScore> per_tier;
};

struct ConflictRecord {
    VarPair pair;
    Tier winner;
    Direction direction;
    std::vector<std::pair<Tier, EdgeScore>> overridden;
};

struct Resolution {
    std::map<VarPair, CombinedEdge> edges;
    std::vector<ConflictRecord> conflicts;
};

// Winner per pair: the directed stance with the largest single-tier weighted
// confidence (ties go to the heavier tier, then the later tier). The combined
// confidence sums the tiers agreeing with the winner; the rest contribute 0.
// Pairs only carrying Unresolved votes stay Unresolved with the summed weight.
Resolution resolve_conflicts(std::span<const TierSummary> summaries);

enum class OrientAction { Flipped, Dropped, RuleOriented, ForceOriented };

std::string_view to_string(OrientAction a);

struct OrientationRecord {
    DirectedEdge edge;  // final orientation (or the dropped request)
    double confidence = 0.0;
    OrientAction action;
};

// Source data for refitting mechanisms after the edge set changes.
struct MechanismContext {
    std::span<const Dataset> datasets;
    const std::map<VariableId, Mechanism>* tier2 = nullptr;
};

struct Orientation {
    Scm scm;
    std::vector<OrientationRecord> log;
};

// Greedy insertion in descending confidence (flip on cycle, drop if the flip
// also closes one), then Unresolved pairs as undirected edges oriented by the
// cycle and v-structure rules, then lexicographic forcing of the remainder.
Orientation orient_and_acyclify(const std::map<VarPair, CombinedEdge>& combined,
                                const VariableSet& variables,
                                const MechanismContext& context = {});

// Per variable, OLS on the largest dataset holding the variable and its
// parents; variables without such a dataset stay unfitted.
std::map<VariableId, Mechanism> fit_mechanisms(std::span<const Dataset> datasets,
                                               const VariableSet& variables, const EdgeSet& edges,
                                               std::vector<std::string>* diagnostics = nullptr);

struct FusionResult {
    ScenarioConfig config;
    ValidatedWeights weights;
    VariableSet variables;
    Tier1Result tier1;
    Tier2Result tier2;
    TierSummary tier3;
    Resolution resolution;
    Orientation orientation;
    std::vector<std::string> diagnostics;

    const Scm& scm() const { return orientation.scm; }
    std::array<double, 3> alphas() const { return {tier1.summary.alpha, tier2.summary.alpha, tier3.alpha}; }
};

FusionResult fuse_all(const ScenarioConfig& config, const ScenarioInputs& inputs);

}  // namespace ckh
