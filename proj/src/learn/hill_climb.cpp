#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include "ckh/learn.hpp"

namespace ckh {

double family_bic(const SampleMoments& moments, Eigen::Index child,
                  std::span<const Eigen::Index> parents) {
    const double n = static_cast<double>(moments.n);
    double variance = moments.covariance(child, child);
    if (!parents.empty()) {
        const auto k = static_cast<Eigen::Index>(parents.size());
        Eigen::MatrixXd spp(k, k);
        Eigen::VectorXd spy(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = 0; j < k; ++j) spp(i, j) = moments.covariance(parents[i], parents[j]);
            spy(i) = moments.covariance(parents[i], child);
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(spp);
        const double scale = std::max(1.0, spp.diagonal().maxCoeff());
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
            ldlt.vectorD().minCoeff() <= 1e-12 * scale) {
            throw Error(ErrorKind::SingularityError, "collinear parent set in BIC term");
        }
        variance -= spy.dot(ldlt.solve(spy));
    }
    if (!(variance > 0.0)) {
        throw Error(ErrorKind::SingularityError, "zero residual variance in BIC term");
    }
    const double loglik = -0.5 * n * (std::log(2.0 * std::numbers::pi * variance) + 1.0);
    const double params = static_cast<double>(parents.size()) + 2.0;
    return loglik - 0.5 * params * std::log(n);
}

double bic_score(const Dataset& data, const LearnedGraph& dag) {
    if (!dag.undirected_edges.empty()) {
        throw Error(ErrorKind::InvalidInput, "BIC needs a fully directed graph");
    }
    if (!is_acyclic(dag.variables, dag.directed_edges)) {
        throw Error(ErrorKind::InvalidInput, "BIC needs an acyclic graph");
    }
    const SampleMoments moments(data);
    double total = 0.0;
    for (Eigen::Index c = 0; c < data.n_cols(); ++c) {
        std::vector<Eigen::Index> parents;
        for (const auto& e : dag.directed_edges) {
            if (e.to == data.columns[c]) parents.push_back(data.index_of(e.from));
        }
        std::sort(parents.begin(), parents.end());
        total += family_bic(moments, c, parents);
    }
    return total;
}

std::vector<Eigen::Index> mmpc(const SampleMoments& moments, Eigen::Index target, double ci_alpha,
                               int max_conditioning) {
    const Eigen::Index q = moments.covariance.cols();
    std::vector<Eigen::Index> cpc;

    // Smallest association (largest p-value) of v with target over subsets of cpc.
    auto min_association = [&](Eigen::Index v, const std::vector<Eigen::Index>& pool) {
        double worst_p = 0.0;
        const std::size_t limit = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(max_conditioning));
        for (std::size_t k = 0; k <= limit; ++k) {
            std::vector<bool> mask(pool.size(), false);
            std::fill(mask.begin(), mask.begin() + static_cast<long>(k), true);
            do {
                std::vector<Eigen::Index> cond;
                for (std::size_t i = 0; i < pool.size(); ++i) {
                    if (mask[i]) cond.push_back(pool[i]);
                }
                double p = 0.0;
                try {
                    p = fisher_z_test(moments, target, v, cond, ci_alpha).p_value;
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::SingularityError) throw;
                }
                worst_p = std::max(worst_p, p);
            } while (std::prev_permutation(mask.begin(), mask.end()));
        }
        return worst_p;
    };

    // Forward: admit the candidate with the strongest minimum association.
    while (true) {
        Eigen::Index best = -1;
        double best_p = 1.0;
        for (Eigen::Index v = 0; v < q; ++v) {
            if (v == target || std::find(cpc.begin(), cpc.end(), v) != cpc.end()) continue;
            const double p = min_association(v, cpc);
            if (p <= ci_alpha && (best < 0 || p < best_p)) {
                best = v;
                best_p = p;
            }
        }
        if (best < 0) break;
        cpc.push_back(best);
    }
    // Backward: drop members made independent by the rest.
    for (std::size_t i = 0; i < cpc.size();) {
        std::vector<Eigen::Index> rest;
        for (std::size_t j = 0; j < cpc.size(); ++j) {
            if (j != i) rest.push_back(cpc[j]);
        }
        if (min_association(cpc[i], rest) > ci_alpha) {
            cpc.erase(cpc.begin() + static_cast<long>(i));
        } else {
            ++i;
        }
    }
    std::sort(cpc.begin(), cpc.end());
    return cpc;
}

namespace {

using Mask = std::uint64_t;

class FamilyCache {
public:
    explicit FamilyCache(const SampleMoments& m) : moments_(m) {}

    double score(Eigen::Index child, Mask parents) {
        auto key = std::make_pair(child, parents);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        std::vector<Eigen::Index> idx;
        for (Eigen::Index p = 0; p < 64; ++p) {
            if (parents & (Mask{1} << p)) idx.push_back(p);
        }
        double s = -std::numeric_limits<double>::infinity();
        try {
            s = family_bic(moments_, child, idx);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SingularityError) throw;
        }
        cache_.emplace(key, s);
        return s;
    }

private:
    const SampleMoments& moments_;
    std::map<std::pair<Eigen::Index, Mask>, double> cache_;
};

bool reaches(const std::vector<Mask>& parents, Eigen::Index from, Eigen::Index to,
             Eigen::Index skip_from = -1, Eigen::Index skip_to = -1) {
    // Walk child links: v -> w when v is a parent of w.
    const auto q = static_cast<Eigen::Index>(parents.size());
    std::vector<unsigned char> seen(parents.size(), 0);
    std::vector<Eigen::Index> stack{from};
    seen[static_cast<std::size_t>(from)] = 1;
    while (!stack.empty()) {
        const Eigen::Index v = stack.back();
        stack.pop_back();
        for (Eigen::Index w = 0; w < q; ++w) {
            if (!(parents[static_cast<std::size_t>(w)] & (Mask{1} << v))) continue;
            if (v == skip_from && w == skip_to) continue;
            if (w == to) return true;
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                stack.push_back(w);
            }
        }
    }
    return false;
}

}  // namespace

LearnedGraph hc_learn(const Dataset& data, const Whitelist& whitelist, const HillClimbOptions& options) {
    const auto q = data.n_cols();
    if (q > 63) throw Error(ErrorKind::InvalidInput, "hill climbing supports at most 63 variables");
    const SampleMoments moments(data);
    FamilyCache cache(moments);
    for (Eigen::Index v = 0; v < q; ++v) {
        if (!(moments.covariance(v, v) > 0.0)) {
            throw Error(ErrorKind::SingularityError, "column '" + data.columns[v].name() + "' has zero variance");
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(q));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return data.columns[a] < data.columns[b]; });

    std::vector<Mask> parents(static_cast<std::size_t>(q), 0);
    std::vector<Mask> locked(static_cast<std::size_t>(q), 0);
    for (const auto& e : whitelist.restricted_to(data.variables())) {
        const auto from = data.index_of(e.from), to = data.index_of(e.to);
        parents[static_cast<std::size_t>(to)] |= Mask{1} << from;
        locked[static_cast<std::size_t>(to)] |= Mask{1} << from;
    }

    std::vector<Mask> allowed(static_cast<std::size_t>(q), ~Mask{0});
    if (options.restrict_to_mmpc) {
        std::vector<std::vector<Eigen::Index>> cpc(static_cast<std::size_t>(q));
        for (Eigen::Index v = 0; v < q; ++v) {
            cpc[static_cast<std::size_t>(v)] = mmpc(moments, v, options.mmpc_alpha, options.mmpc_max_conditioning);
        }
        for (Eigen::Index v = 0; v < q; ++v) {
            Mask m = 0;
            for (Eigen::Index w : cpc[static_cast<std::size_t>(v)]) {
                const auto& back = cpc[static_cast<std::size_t>(w)];
                if (std::find(back.begin(), back.end(), v) != back.end()) m |= Mask{1} << w;
            }
            allowed[static_cast<std::size_t>(v)] = m;
        }
    }

    auto has = [&](Eigen::Index from, Eigen::Index to) {
        return (parents[static_cast<std::size_t>(to)] & (Mask{1} << from)) != 0;
    };
    auto fam = [&](Eigen::Index child, Mask m) { return cache.score(child, m); };

    enum class Move { Add, Delete, Reverse };
    constexpr double kMinGain = 1e-9;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        double best_gain = kMinGain;
        Move best_move = Move::Add;
        Eigen::Index best_from = -1, best_to = -1;

        for (Eigen::Index from : order) {
            for (Eigen::Index to : order) {
                if (from == to) continue;
                const Mask bit_from = Mask{1} << from;
                const Mask bit_to = Mask{1} << to;
                const Mask pt = parents[static_cast<std::size_t>(to)];
                const Mask pf = parents[static_cast<std::size_t>(from)];
                const double base_to = fam(to, pt);

                auto consider = [&](Move m, double gain) {
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_move = m;
                        best_from = from;
                        best_to = to;
                    }
                };

                if (!has(from, to)) {
                    if (has(to, from)) continue;
                    if (!(allowed[static_cast<std::size_t>(to)] & bit_from)) continue;
                    if (reaches(parents, to, from)) continue;
                    consider(Move::Add, fam(to, pt | bit_from) - base_to);
                    continue;
                }
                if (locked[static_cast<std::size_t>(to)] & bit_from) continue;
                consider(Move::Delete, fam(to, pt & ~bit_from) - base_to);
                // Reversal is legal when no other directed path from -> to exists.
                if (!reaches(parents, from, to, from, to)) {
                    const double gain = fam(to, pt & ~bit_from) - base_to +
                                        fam(from, pf | bit_to) - fam(from, pf);
                    consider(Move::Reverse, gain);
                }
            }
        }
        if (best_from < 0) break;

        auto& pt = parents[static_cast<std::size_t>(best_to)];
        auto& pf = parents[static_cast<std::size_t>(best_from)];
        switch (best_move) {
            case Move::Add: pt |= Mask{1} << best_from; break;
            case Move::Delete: pt &= ~(Mask{1} << best_from); break;
            case Move::Reverse:
                pt &= ~(Mask{1} << best_from);
                pf |= Mask{1} << best_to;
                break;
        }
    }

    LearnedGraph out;
    out.variables = data.variables();
    out.learner_id = options.restrict_to_mmpc ? "mmhc" : "hc";
    out.dataset_id = data.name;
    for (Eigen::Index to = 0; to < q; ++to) {
        for (Eigen::Index from = 0; from < q; ++from) {
            if (has(from, to)) out.directed_edges.insert({data.columns[from], data.columns[to]});
        }
    }
    return out;
}

}  // namespace ckh
