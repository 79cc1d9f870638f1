#include "ckh/core.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace ckh {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidPair: return "InvalidPair";
        case ErrorKind::InvalidWeights: return "InvalidWeights";
        case ErrorKind::InvalidRow: return "InvalidRow";
        case ErrorKind::EmptyMatrix: return "EmptyMatrix";
        case ErrorKind::ScopeError: return "ScopeError";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::ValidationError: return "ValidationError";
        case ErrorKind::SingularityError: return "SingularityError";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

VariableId::VariableId(std::string name) : name_(std::move(name)) {
    if (name_.empty()) {
        throw Error(ErrorKind::ValidationError, "variable name must be non-empty");
    }
}

VariableSet make_variables(std::initializer_list<std::string_view> names) {
    VariableSet out;
    for (auto n : names) out.emplace(std::string(n));
    return out;
}

std::string_view to_string(Stance s) {
    switch (s) {
        case Stance::Forward: return "forward";
        case Stance::Backward: return "backward";
        case Stance::NoEdge: return "no_edge";
        case Stance::NoInfo: return "no_info";
    }
    return "?";
}

std::string_view to_string(Relation r) {
    switch (r) {
        case Relation::Forward: return "causes";
        case Relation::Backward: return "caused_by";
        case Relation::NoEdge: return "no_edge";
        case Relation::Undirected: return "undirected";
    }
    return "?";
}

std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::Forward: return "forward";
        case Direction::Backward: return "backward";
        case Direction::NoEdge: return "no_edge";
        case Direction::Unresolved: return "unresolved";
    }
    return "?";
}

std::string_view to_string(Tier t) {
    switch (t) {
        case Tier::Expert: return "expert";
        case Tier::Data: return "data";
        case Tier::Literature: return "literature";
    }
    return "?";
}

Tier tier_from_string(std::string_view s) {
    if (s == "expert") return Tier::Expert;
    if (s == "data") return Tier::Data;
    if (s == "literature") return Tier::Literature;
    throw Error(ErrorKind::ValidationError, "unknown tier '" + std::string(s) + "'");
}

Relation flip(Relation r) {
    switch (r) {
        case Relation::Forward: return Relation::Backward;
        case Relation::Backward: return Relation::Forward;
        default: return r;
    }
}

Direction flip(Direction d) {
    switch (d) {
        case Direction::Forward: return Direction::Backward;
        case Direction::Backward: return Direction::Forward;
        default: return d;
    }
}

std::string to_string(const VarPair& p) { return "(" + p.a.name() + "," + p.b.name() + ")"; }

CanonicalRelation canonical_pair(const VariableId& x, const VariableId& y, Relation relation) {
    if (x == y) {
        throw Error(ErrorKind::InvalidPair, "self-pair on variable '" + x.name() + "'");
    }
    if (x < y) return {VarPair{x, y}, relation};
    return {VarPair{y, x}, flip(relation)};
}

std::vector<VarPair> all_pairs(const VariableSet& variables) {
    std::vector<VarPair> out;
    if (variables.size() > 1) out.reserve(variables.size() * (variables.size() - 1) / 2);
    for (auto i = variables.begin(); i != variables.end(); ++i) {
        for (auto j = std::next(i); j != variables.end(); ++j) out.push_back({*i, *j});
    }
    return out;
}

bool Scope::covers(const VarPair& pair) const {
    if (global) return true;
    return variables.contains(pair.a) && variables.contains(pair.b);
}

const EdgeAssertion* KnowledgeSource::find(const VarPair& pair) const {
    for (const auto& a : assertions) {
        if (a.pair == pair) return &a;
    }
    return nullptr;
}

VariableSet KnowledgeSource::mentioned_variables() const {
    VariableSet out = scope.variables;
    for (const auto& a : assertions) {
        out.insert(a.pair.a);
        out.insert(a.pair.b);
    }
    return out;
}

void validate_source(const KnowledgeSource& source) {
    std::set<VarPair> seen;
    for (const auto& a : source.assertions) {
        if (a.pair.a == a.pair.b) {
            throw Error(ErrorKind::InvalidPair,
                        "source '" + source.id + "': self-loop on " + a.pair.a.name());
        }
        if (!(a.pair.a < a.pair.b)) {
            throw Error(ErrorKind::ValidationError,
                        "source '" + source.id + "': non-canonical pair " + to_string(a.pair));
        }
        if (!(a.confidence >= 0.0 && a.confidence <= 1.0)) {
            throw Error(ErrorKind::ValidationError,
                        "source '" + source.id + "': confidence " + std::to_string(a.confidence) +
                            " on " + to_string(a.pair) + " outside [0,1]");
        }
        if (!seen.insert(a.pair).second) {
            throw Error(ErrorKind::ValidationError,
                        "source '" + source.id + "': duplicate assertion on " + to_string(a.pair));
        }
        if (!source.scope.global && !source.scope.covers(a.pair)) {
            throw Error(ErrorKind::ValidationError, "source '" + source.id + "': assertion on " +
                                                        to_string(a.pair) + " leaves its scope");
        }
    }
}

double TierWeights::of(Tier t) const {
    switch (t) {
        case Tier::Expert: return expert;
        case Tier::Data: return data;
        case Tier::Literature: return literature;
    }
    return 0.0;
}

ValidatedWeights validate_weights(const TierWeights& w) {
    for (Tier t : kTiers) {
        const double v = w.of(t);
        if (!(v > 0.0 && v < 1.0)) {
            throw Error(ErrorKind::InvalidWeights, "tier weight for " + std::string(to_string(t)) +
                                                       " = " + std::to_string(v) +
                                                       " is outside (0,1)");
        }
    }
    const double sum = w.expert + w.data + w.literature;
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
        throw Error(ErrorKind::InvalidWeights,
                    "tier weights must sum to 1 (got " + std::to_string(sum) + ")");
    }
    return {w, !(w.expert < w.data && w.data < w.literature)};
}

const VoteRow* ScoringMatrix::row(const VarPair& pair) const {
    auto it = std::lower_bound(pairs.begin(), pairs.end(), pair);
    if (it == pairs.end() || *it != pair) return nullptr;
    return &votes[static_cast<std::size_t>(it - pairs.begin())];
}

void check_matrix(const ScoringMatrix& m) {
    if (m.pairs.size() != m.votes.size()) {
        throw Error(ErrorKind::InvalidRow, "pair and vote counts differ");
    }
    for (std::size_t i = 0; i < m.votes.size(); ++i) {
        double sum = 0.0;
        for (double v : m.votes[i]) {
            if (v < 0.0) {
                throw Error(ErrorKind::InvalidRow, "negative vote mass on " + to_string(m.pairs[i]));
            }
            sum += v;
        }
        if (std::abs(sum - m.rater_count) > kRowSumTolerance) {
            throw Error(ErrorKind::InvalidRow, "row " + to_string(m.pairs[i]) + " sums to " +
                                                   std::to_string(sum) + ", expected " +
                                                   std::to_string(m.rater_count));
        }
    }
}

std::optional<std::vector<VariableId>> topological_order(const VariableSet& variables,
                                                         const EdgeSet& edges) {
    std::map<VariableId, int> indegree;
    std::map<VariableId, std::vector<VariableId>> children;
    for (const auto& v : variables) indegree[v] = 0;
    for (const auto& e : edges) {
        indegree[e.from];
        ++indegree[e.to];
        children[e.from].push_back(e.to);
    }
    // Min-heap on name so the order is deterministic.
    std::priority_queue<VariableId, std::vector<VariableId>, std::greater<>> ready;
    for (const auto& [v, d] : indegree) {
        if (d == 0) ready.push(v);
    }
    std::vector<VariableId> order;
    while (!ready.empty()) {
        VariableId v = ready.top();
        ready.pop();
        order.push_back(v);
        for (const auto& c : children[v]) {
            if (--indegree[c] == 0) ready.push(c);
        }
    }
    if (order.size() != indegree.size()) return std::nullopt;
    return order;
}

bool is_acyclic(const VariableSet& variables, const EdgeSet& edges) {
    return topological_order(variables, edges).has_value();
}

Scm::Scm(VariableSet endogenous, std::vector<WeightedEdge> edges,
         std::map<VariableId, Mechanism> mechanisms)
    : endogenous_(std::move(endogenous)), edges_(std::move(edges)), mechanisms_(std::move(mechanisms)) {
    std::set<VarPair> pairs;
    for (const auto& e : edges_) {
        if (!endogenous_.contains(e.from) || !endogenous_.contains(e.to)) {
            throw Error(ErrorKind::InvalidInput,
                        "edge " + e.from.name() + "->" + e.to.name() + " uses an unknown variable");
        }
        if (!(e.confidence >= 0.0 && e.confidence <= 1.0 + 1e-12)) {
            throw Error(ErrorKind::InvalidInput, "edge confidence outside [0,1]");
        }
        if (!pairs.insert(canonical_pair(e.from, e.to).pair).second) {
            throw Error(ErrorKind::InvalidInput,
                        "more than one edge between " + e.from.name() + " and " + e.to.name());
        }
    }
    if (!is_acyclic(endogenous_, edge_set())) {
        throw Error(ErrorKind::InvalidInput, "edge set contains a directed cycle");
    }
    for (const auto& [v, m] : mechanisms_) {
        auto parents = parents_of(v);
        auto declared = m.parents;
        std::sort(declared.begin(), declared.end());
        if (declared != parents) {
            throw Error(ErrorKind::InvalidInput, "mechanism parents of " + v.name() +
                                                     " disagree with the graph");
        }
        if (m.coefficients.size() != m.parents.size() || m.noise_variance < 0.0) {
            throw Error(ErrorKind::InvalidInput, "malformed mechanism for " + v.name());
        }
    }
}

std::vector<std::string> Scm::exogenous() const {
    std::vector<std::string> out;
    out.reserve(endogenous_.size());
    for (const auto& v : endogenous_) out.push_back("U_" + v.name());
    return out;
}

EdgeSet Scm::edge_set() const {
    EdgeSet out;
    for (const auto& e : edges_) out.insert({e.from, e.to});
    return out;
}

std::vector<VariableId> Scm::parents_of(const VariableId& v) const {
    std::vector<VariableId> out;
    for (const auto& e : edges_) {
        if (e.to == v) out.push_back(e.from);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace ckh
