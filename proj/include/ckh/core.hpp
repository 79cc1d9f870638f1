#pragma once

// Domain types shared by every stage of the knowledge-fusion pipeline.

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ckh/error.hpp"

namespace ckh {

// Name of an observed variable. Identity is the exact string; ordering is
// lexicographic and is what canonicalizes pairs.
class VariableId {
public:
    VariableId() = default;
    explicit VariableId(std::string name);

    const std::string& name() const noexcept { return name_; }

    friend bool operator==(const VariableId&, const VariableId&) = default;
    friend auto operator<=>(const VariableId&, const VariableId&) = default;

private:
    std::string name_;
};

using VariableSet = std::set<VariableId>;

VariableSet make_variables(std::initializer_list<std::string_view> names);

// Column of the scoring matrix.
enum class Stance : std::uint8_t { Forward = 0, Backward = 1, NoEdge = 2, NoInfo = 3 };

inline constexpr std::size_t kStanceCount = 4;

// What a single source claims about a pair. Undirected is a learner output
// (CPDAG edge) and splits its mass between Forward and Backward.
enum class Relation : std::uint8_t { Forward, Backward, NoEdge, Undirected };

// Outcome of plurality voting on a pair.
enum class Direction : std::uint8_t { Forward, Backward, NoEdge, Unresolved };

enum class Tier : std::uint8_t { Expert = 0, Data = 1, Literature = 2 };

inline constexpr std::array<Tier, 3> kTiers{Tier::Expert, Tier::Data, Tier::Literature};

std::string_view to_string(Stance s);
std::string_view to_string(Relation r);
std::string_view to_string(Direction d);
std::string_view to_string(Tier t);
Tier tier_from_string(std::string_view s);

Relation flip(Relation r);
Direction flip(Direction d);

// Unordered pair stored canonically (a < b).
struct VarPair {
    VariableId a;
    VariableId b;

    friend bool operator==(const VarPair&, const VarPair&) = default;
    friend auto operator<=>(const VarPair&, const VarPair&) = default;
};

std::string to_string(const VarPair& p);

struct CanonicalRelation {
    VarPair pair;
    Relation relation;
};

// Orders (x, y) lexicographically, flipping the relation when the operands
// swap. Throws InvalidPair when x == y.
CanonicalRelation canonical_pair(const VariableId& x, const VariableId& y,
                                 Relation relation = Relation::Forward);

// Every unordered pair over `variables`, in lexicographic order.
std::vector<VarPair> all_pairs(const VariableSet& variables);

struct DirectedEdge {
    VariableId from;
    VariableId to;

    friend bool operator==(const DirectedEdge&, const DirectedEdge&) = default;
    friend auto operator<=>(const DirectedEdge&, const DirectedEdge&) = default;
};

using EdgeSet = std::set<DirectedEdge>;

struct EdgeAssertion {
    VarPair pair;
    Relation relation = Relation::Forward;
    double confidence = 1.0;

    friend bool operator==(const EdgeAssertion&, const EdgeAssertion&) = default;
};

// A global-scope source covers every variable of the tier it is scored in;
// otherwise it abstains on pairs not fully inside `variables`.
struct Scope {
    bool global = false;
    VariableSet variables;

    bool covers(const VarPair& pair) const;

    friend bool operator==(const Scope&, const Scope&) = default;
};

struct KnowledgeSource {
    std::string id;
    Tier tier = Tier::Expert;
    Scope scope;
    std::vector<EdgeAssertion> assertions;

    const EdgeAssertion* find(const VarPair& pair) const;
    // Variables referenced by the scope or any assertion.
    VariableSet mentioned_variables() const;

    friend bool operator==(const KnowledgeSource&, const KnowledgeSource&) = default;
};

// Throws ValidationError if an assertion leaves an explicit scope, a pair
// repeats, or a confidence is outside [0, 1].
void validate_source(const KnowledgeSource& source);

struct TierWeights {
    double expert = 0.2;
    double data = 0.3;
    double literature = 0.5;

    double of(Tier t) const;

    friend bool operator==(const TierWeights&, const TierWeights&) = default;
};

struct ValidatedWeights {
    TierWeights weights;
    bool ordering_warning = false;
};

inline constexpr double kWeightSumTolerance = 1e-12;

ValidatedWeights validate_weights(const TierWeights& w);

using VoteRow = std::array<double, kStanceCount>;

// Per unordered pair, the vote mass each stance received. Every row sums to
// rater_count.
struct ScoringMatrix {
    std::vector<VarPair> pairs;
    std::vector<VoteRow> votes;
    int rater_count = 0;

    std::size_t size() const noexcept { return pairs.size(); }
    const VoteRow* row(const VarPair& pair) const;
};

inline constexpr double kRowSumTolerance = 1e-9;

// Throws InvalidRow if a row is negative or does not sum to rater_count.
void check_matrix(const ScoringMatrix& m);

struct EdgeScore {
    VarPair pair;
    Direction direction = Direction::Unresolved;
    double confidence = 0.0;
    double weighted_confidence = 0.0;
};

struct TierSummary {
    Tier tier = Tier::Expert;
    double alpha = 1.0;
    double weight = 0.0;
    ScoringMatrix matrix;
    std::map<VarPair, EdgeScore> scores;
};

// Linear-Gaussian structural equation for one endogenous variable.
struct Mechanism {
    std::vector<VariableId> parents;
    std::vector<double> coefficients;
    double intercept = 0.0;
    double noise_variance = 0.0;
    bool fitted = false;
};

struct WeightedEdge {
    VariableId from;
    VariableId to;
    double confidence = 0.0;
};

// Output model <U, V, F, P(u)> plus per-edge confidence. The constructor
// rejects cycles, so an Scm is always a DAG.
class Scm {
public:
    Scm() = default;
    Scm(VariableSet endogenous, std::vector<WeightedEdge> edges,
        std::map<VariableId, Mechanism> mechanisms = {});

    const VariableSet& endogenous() const noexcept { return endogenous_; }
    // One noise term per endogenous variable, named "U_<name>".
    std::vector<std::string> exogenous() const;
    const std::vector<WeightedEdge>& edges() const noexcept { return edges_; }
    const std::map<VariableId, Mechanism>& mechanisms() const noexcept { return mechanisms_; }

    EdgeSet edge_set() const;
    std::vector<VariableId> parents_of(const VariableId& v) const;

private:
    VariableSet endogenous_;
    std::vector<WeightedEdge> edges_;
    std::map<VariableId, Mechanism> mechanisms_;
};

// Kahn's algorithm over `variables`; nullopt when `edges` contain a cycle.
std::optional<std::vector<VariableId>> topological_order(const VariableSet& variables,
                                                         const EdgeSet& edges);
bool is_acyclic(const VariableSet& variables, const EdgeSet& edges);

struct DatasetSpec {
    std::string name;
    std::optional<std::string> path;      // CSV on disk
    std::vector<VariableId> columns;      // simulated from ground truth when no path
    int n = 0;
};

struct ScenarioConfig {
    std::string problem_statement;
    std::vector<std::string> keywords;
    TierWeights tier_weights;
    double tier1_threshold = 0.8;
    double ci_alpha = 0.05;
    std::int64_t sample_seed = 0;
    std::vector<std::string> learners{"pc", "hc"};
    std::vector<std::string> expert_files;
    std::vector<std::string> data_source_files;
    std::vector<std::string> literature_files;
    std::vector<DatasetSpec> datasets;
    std::optional<std::string> ground_truth;
};

}  // namespace ckh
