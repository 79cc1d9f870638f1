#include "ckh/agreement.hpp"

#include <algorithm>
#include <cmath>

namespace ckh {
namespace {

std::size_t column(Stance s) { return static_cast<std::size_t>(s); }

void check_scope(const KnowledgeSource& source, const VariableSet& variables) {
    for (const auto& a : source.assertions) {
        for (const auto* v : {&a.pair.a, &a.pair.b}) {
            if (!variables.contains(*v)) {
                throw Error(ErrorKind::ScopeError, "source '" + source.id + "' references '" +
                                                       v->name() +
                                                       "' outside the scored variable set");
            }
        }
    }
}

bool nearly_equal(double x, double y, double scale) {
    return std::abs(x - y) <= 1e-12 * std::max(1.0, scale);
}

}  // namespace

ScoringMatrix build_scoring_matrix(std::span<const KnowledgeSource> sources,
                                   const VariableSet& variables) {
    for (const auto& s : sources) check_scope(s, variables);

    ScoringMatrix m;
    m.pairs = all_pairs(variables);
    m.votes.assign(m.pairs.size(), VoteRow{});
    m.rater_count = static_cast<int>(sources.size());

    for (const auto& source : sources) {
        for (std::size_t i = 0; i < m.pairs.size(); ++i) {
            VoteRow& row = m.votes[i];
            const VarPair& pair = m.pairs[i];
            if (!source.scope.covers(pair)) {
                row[column(Stance::NoInfo)] += 1.0;
                continue;
            }
            const EdgeAssertion* a = source.find(pair);
            if (a == nullptr) {
                row[column(Stance::NoEdge)] += 1.0;
                continue;
            }
            const double c = a->confidence;
            switch (a->relation) {
                case Relation::Forward: row[column(Stance::Forward)] += c; break;
                case Relation::Backward: row[column(Stance::Backward)] += c; break;
                case Relation::NoEdge: row[column(Stance::NoEdge)] += c; break;
                case Relation::Undirected:
                    row[column(Stance::Forward)] += 0.5 * c;
                    row[column(Stance::Backward)] += 0.5 * c;
                    break;
            }
            row[column(Stance::NoInfo)] += 1.0 - c;
        }
    }
    check_matrix(m);
    return m;
}

EdgeConfidence edge_confidence(const VoteRow& row) {
    for (double v : row) {
        if (!(v >= 0.0)) throw Error(ErrorKind::InvalidRow, "negative or NaN vote mass");
    }
    const double fwd = row[column(Stance::Forward)];
    const double bwd = row[column(Stance::Backward)];
    const double none = row[column(Stance::NoEdge)];
    const double total = fwd + bwd + none;
    if (total <= 0.0) return {Direction::Unresolved, 0.0};

    const double best = std::max({fwd, bwd, none});
    const double e = best / total;
    const bool fwd_top = nearly_equal(fwd, best, total);
    const bool bwd_top = nearly_equal(bwd, best, total);
    const bool none_top = nearly_equal(none, best, total);

    if (none_top) return {Direction::NoEdge, e};
    if (fwd_top && bwd_top) return {Direction::Unresolved, e};
    return {fwd_top ? Direction::Forward : Direction::Backward, e};
}

double fleiss_kappa(const ScoringMatrix& matrix) {
    if (matrix.size() == 0) throw Error(ErrorKind::EmptyMatrix, "scoring matrix has no rows");
    const double n = matrix.rater_count;
    if (n <= 1.0) return 1.0;

    const double items = static_cast<double>(matrix.size());
    VoteRow category_totals{};
    double mean_item_agreement = 0.0;
    for (const auto& row : matrix.votes) {
        double squares = 0.0;
        for (std::size_t j = 0; j < kStanceCount; ++j) {
            squares += row[j] * row[j];
            category_totals[j] += row[j];
        }
        mean_item_agreement += (squares - n) / (n * (n - 1.0));
    }
    mean_item_agreement /= items;

    double expected = 0.0;
    for (double total : category_totals) {
        const double p = total / (items * n);
        expected += p * p;
    }
    if (std::abs(1.0 - expected) <= 1e-12) return 1.0;

    const double kappa = (mean_item_agreement - expected) / (1.0 - expected);
    return std::clamp(kappa, 0.0, 1.0);
}

ExpertConfidences expert_confidences(std::span<const KnowledgeSource> sources,
                                     const VariableSet& variables) {
    ExpertConfidences out;
    for (const auto& pair : all_pairs(variables)) {
        VoteRow sums{};
        int covering = 0;
        for (const auto& s : sources) {
            if (!s.scope.covers(pair)) continue;
            ++covering;
            const EdgeAssertion* a = s.find(pair);
            if (a == nullptr) {
                sums[column(Stance::NoEdge)] += 1.0;
                continue;
            }
            switch (a->relation) {
                case Relation::Forward: sums[column(Stance::Forward)] += a->confidence; break;
                case Relation::Backward: sums[column(Stance::Backward)] += a->confidence; break;
                case Relation::NoEdge: sums[column(Stance::NoEdge)] += a->confidence; break;
                case Relation::Undirected:
                    sums[column(Stance::Forward)] += 0.5 * a->confidence;
                    sums[column(Stance::Backward)] += 0.5 * a->confidence;
                    break;
            }
        }
        if (covering == 0) continue;
        for (auto& v : sums) v /= covering;
        out.emplace(pair, sums);
    }
    return out;
}

TierSummary summarize_tier(const ScoringMatrix& matrix, Tier tier, double weight,
                           const std::optional<ExpertConfidences>& expert,
                           const AgreementFunction& irr) {
    TierSummary summary;
    summary.tier = tier;
    summary.weight = weight;
    summary.alpha = irr(matrix);
    summary.matrix = matrix;

    for (std::size_t i = 0; i < matrix.size(); ++i) {
        const VarPair& pair = matrix.pairs[i];
        EdgeConfidence ec = edge_confidence(matrix.votes[i]);
        if (expert) {
            auto it = expert->find(pair);
            const VoteRow means = it == expert->end() ? VoteRow{} : it->second;
            switch (ec.direction) {
                case Direction::Forward: ec.confidence = means[column(Stance::Forward)]; break;
                case Direction::Backward: ec.confidence = means[column(Stance::Backward)]; break;
                case Direction::NoEdge: ec.confidence = means[column(Stance::NoEdge)]; break;
                case Direction::Unresolved:
                    ec.confidence = std::max(means[column(Stance::Forward)],
                                             means[column(Stance::Backward)]);
                    break;
            }
        }
        summary.scores.emplace(
            pair, EdgeScore{pair, ec.direction, ec.confidence,
                            weighted_confidence(ec.confidence, summary.alpha, weight)});
    }
    return summary;
}

VariableSet tier_variables(std::span<const KnowledgeSource> sources) {
    VariableSet out;
    for (const auto& s : sources) out.merge(s.mentioned_variables());
    return out;
}

}  // namespace ckh
