#include <algorithm>
#include <map>
#include <numeric>

#include "ckh/learn.hpp"
#include "ckh/pdag.hpp"

namespace ckh {

bool LearnedGraph::adjacent(const VariableId& x, const VariableId& y) const {
    if (directed_edges.contains({x, y}) || directed_edges.contains({y, x})) return true;
    return x != y && undirected_edges.contains(canonical_pair(x, y).pair);
}

EdgeSet Whitelist::restricted_to(const VariableSet& variables) const {
    EdgeSet out;
    for (const auto& e : edges) {
        if (variables.contains(e.from) && variables.contains(e.to)) out.insert(e);
    }
    return out;
}

namespace {

// Columns sorted by name; node k of the search is column order[k].
std::vector<Eigen::Index> name_order(const Dataset& data) {
    std::vector<Eigen::Index> order(data.columns.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return data.columns[a] < data.columns[b]; });
    return order;
}

// Calls fn(subset) for every size-k subset of `pool` in lexicographic order
// until fn returns true.
template <typename Fn>
bool for_each_subset(const std::vector<std::size_t>& pool, std::size_t k, Fn&& fn) {
    if (k > pool.size()) return false;
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<std::size_t> subset(k);
    while (true) {
        for (std::size_t i = 0; i < k; ++i) subset[i] = pool[idx[i]];
        if (fn(subset)) return true;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == pool.size() - k + (i - 1)) --i;
        if (i == 0) return false;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

LearnedGraph pc_learn(const Dataset& data, const Whitelist& whitelist, double ci_alpha) {
    const SampleMoments moments(data);
    const auto order = name_order(data);
    const std::size_t q = order.size();

    std::map<VariableId, std::size_t> node_of;
    for (std::size_t k = 0; k < q; ++k) node_of[data.columns[order[k]]] = k;

    std::vector<std::vector<unsigned char>> adj(q, std::vector<unsigned char>(q, 1));
    std::vector<std::vector<unsigned char>> fixed(q, std::vector<unsigned char>(q, 0));
    for (std::size_t k = 0; k < q; ++k) adj[k][k] = 0;
    const EdgeSet forced = whitelist.restricted_to(data.variables());
    for (const auto& e : forced) {
        const auto a = node_of.at(e.from), b = node_of.at(e.to);
        fixed[a][b] = fixed[b][a] = 1;
    }

    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> sepset;

    for (std::size_t level = 0; q >= 2 && level <= q - 2; ++level) {
        // PC-stable: adjacency sets are frozen for the whole level.
        std::vector<std::vector<std::size_t>> frozen(q);
        for (std::size_t a = 0; a < q; ++a) {
            for (std::size_t b = 0; b < q; ++b) {
                if (adj[a][b]) frozen[a].push_back(b);
            }
        }
        bool tested = false;
        for (std::size_t a = 0; a < q; ++a) {
            for (std::size_t b : frozen[a]) {
                if (!adj[a][b] || fixed[a][b]) continue;
                std::vector<std::size_t> pool;
                for (std::size_t c : frozen[a]) {
                    if (c != b) pool.push_back(c);
                }
                if (pool.size() < level) continue;
                tested = true;
                for_each_subset(pool, level, [&](const std::vector<std::size_t>& s) {
                    std::vector<Eigen::Index> cond;
                    for (std::size_t c : s) cond.push_back(order[c]);
                    CiResult r;
                    try {
                        r = fisher_z_test(moments, order[a], order[b], cond, ci_alpha);
                    } catch (const Error& e) {
                        if (e.kind() != ErrorKind::SingularityError) throw;
                        return false;  // singular: keep the edge
                    }
                    if (!r.independent) return false;
                    adj[a][b] = adj[b][a] = 0;
                    sepset[{std::min(a, b), std::max(a, b)}] = s;
                    return true;
                });
            }
        }
        if (!tested) break;
    }

    Pdag g(q);
    for (std::size_t a = 0; a < q; ++a) {
        for (std::size_t b = a + 1; b < q; ++b) {
            if (adj[a][b]) g.add_undirected(a, b);
        }
    }
    for (const auto& e : forced) g.orient(node_of.at(e.from), node_of.at(e.to));

    // Unshielded colliders a -> c <- b with c outside sepset(a, b).
    for (std::size_t c = 0; c < q; ++c) {
        for (std::size_t a = 0; a < q; ++a) {
            for (std::size_t b = a + 1; b < q; ++b) {
                if (a == c || b == c || g.adjacent(a, b)) continue;
                if (!g.adjacent(a, c) || !g.adjacent(b, c)) continue;
                const auto& s = sepset[{a, b}];
                if (std::find(s.begin(), s.end(), c) != s.end()) continue;
                for (std::size_t parent : {a, b}) {
                    if (g.undirected(parent, c) && !g.creates_cycle(parent, c)) g.orient(parent, c);
                }
            }
        }
    }
    g.apply_orientation_rules();

    LearnedGraph out;
    out.variables = data.variables();
    out.learner_id = "pc";
    out.dataset_id = data.name;
    for (std::size_t a = 0; a < q; ++a) {
        for (std::size_t b = 0; b < q; ++b) {
            const auto& va = data.columns[order[a]];
            const auto& vb = data.columns[order[b]];
            if (g.directed(a, b)) out.directed_edges.insert({va, vb});
            if (a < b && g.undirected(a, b)) out.undirected_edges.insert(canonical_pair(va, vb).pair);
        }
    }
    return out;
}

}  // namespace ckh
