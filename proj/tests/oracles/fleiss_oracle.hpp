#pragma once

#include <algorithm>
#include <vector>

namespace oracle {

// Fleiss' kappa from integer rating counts, written as rater-pair agreement:
// an item's agreement is the share of ordered rater pairs that picked the same
// category. Chance agreement is the squared marginal share per category.
inline double fleiss_kappa(const std::vector<std::vector<long>>& counts) {
    const std::size_t items = counts.size();
    if (items == 0) return 0.0;
    long raters = 0;
    for (long c : counts.front()) raters += c;
    if (raters <= 1) return 1.0;

    const std::size_t k = counts.front().size();
    std::vector<long> totals(k, 0);
    long agreeing_pairs = 0;
    for (const auto& row : counts) {
        for (std::size_t j = 0; j < k; ++j) {
            agreeing_pairs += row[j] * (row[j] - 1);
            totals[j] += row[j];
        }
    }
    const double all_pairs = static_cast<double>(items) * raters * (raters - 1);
    const double observed = agreeing_pairs / all_pairs;

    const double cells = static_cast<double>(items) * raters;
    double chance = 0.0;
    for (long t : totals) chance += (t / cells) * (t / cells);
    if (chance >= 1.0 - 1e-12) return 1.0;

    return std::clamp((observed - chance) / (1.0 - chance), 0.0, 1.0);
}

}  // namespace oracle
