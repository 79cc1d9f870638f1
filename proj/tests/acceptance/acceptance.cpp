// Acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "../oracles/fleiss_oracle.hpp"
#include "../oracles/metrics_oracle.hpp"
#include "ckh/agreement.hpp"
#include "ckh/eval.hpp"
#include "ckh/report.hpp"
#include "ckh/scenario.hpp"

using namespace ckh;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

VariableId var(std::size_t i) { return VariableId(std::string(1, static_cast<char>('A' + i))); }

VariableSet first_vars(std::size_t n) {
    VariableSet s;
    for (std::size_t i = 0; i < n; ++i) s.insert(var(i));
    return s;
}

ScenarioConfig default_config() { return load_config(CKH_SCENARIO_DIR "/config.json"); }

Verdict end_to_end_recovery() {
    const auto truth = load_ground_truth(CKH_SCENARIO_DIR "/ground_truth.json");
    double tpr = 0, fdr = 0, mcc = 0, slowest = 0;
    const int seeds = 10;
    for (int s = 1; s <= seeds; ++s) {
        auto config = default_config();
        config.sample_seed = s;
        const auto t0 = Clock::now();
        const auto fused = fuse_all(config, load_inputs(config));
        const auto m = compare_graphs(fused.scm(), truth);
        slowest = std::max(slowest, seconds_since(t0));
        tpr += m.tpr / seeds;
        fdr += m.fdr / seeds;
        mcc += m.mcc / seeds;
    }
    const bool ok = tpr >= 0.85 && fdr <= 0.20 && mcc >= 0.70 && slowest < 60.0;
    return {ok, fmt("mean tpr=%.4f fdr=%.4f mcc=%.4f over %d seeds, slowest seed %.2fs", tpr, fdr, mcc, seeds, slowest)};
}

Verdict sensitivity_pattern() {
    const auto config = default_config();
    const auto inputs = load_inputs(config);
    const auto truth = load_ground_truth(CKH_SCENARIO_DIR "/ground_truth.json");
    const auto t0 = Clock::now();
    const auto schedule = default_schedule();
    const auto rows = sensitivity_run(config, inputs, truth, schedule);
    const double elapsed = seconds_since(t0);
    for (const auto& r : rows) {
        if (r.error) return {false, r.tier + " " + r.alteration + " failed: " + *r.error};
    }
    auto mcc_of = [&](const std::string& tier, const std::string& alt) {
        for (const auto& r : rows) {
            if (r.tier == tier && r.alteration == alt) return r.metrics.mcc;
        }
        throw std::runtime_error("missing row " + tier + " " + alt);
    };
    const double base = mcc_of("none", "none");
    const double e1 = base - mcc_of("expert", "A1");
    const double e12 = base - mcc_of("expert", "A1+A2");
    const double d1 = std::abs(base - mcc_of("data", "A1"));
    const double l1 = std::abs(base - mcc_of("literature", "A1"));
    const bool ok = rows.size() == 10 && e1 >= 0.03 && e12 >= 0.03 && d1 <= 0.05 && l1 <= 0.05 && elapsed < 600.0;
    return {ok, fmt("baseline mcc=%.4f; expert drops A1=%.4f A1+A2=%.4f; |change| data A1=%.4f literature A1=%.4f; %.2fs",
                    base, e1, e12, d1, l1, elapsed)};
}

Verdict arithmetic_exactness() {
    const bool exact = weighted_confidence(1.0, 1.0, 0.2) == 0.2;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.01, 0.98);
    double worst = 0.0;
    const VarPair dg{VariableId("D"), VariableId("G")};
    for (int i = 0; i < 1000; ++i) {
        double a = u(rng), b = u(rng);
        if (a + b >= 0.99) continue;
        TierWeights w{a, b, 1.0 - a - b};
        try {
            validate_weights(w);
        } catch (const Error&) {
            continue;
        }
        std::vector<TierSummary> s;
        for (Tier t : kTiers) {
            TierSummary ts;
            ts.tier = t;
            ts.weight = w.of(t);
            ts.scores[dg] = {dg, Direction::Forward, 1.0, weighted_confidence(1.0, 1.0, w.of(t))};
            s.push_back(ts);
        }
        worst = std::max(worst, std::abs(resolve_conflicts(s).edges.at(dg).combined_confidence - 1.0));
    }
    return {exact && worst <= 1e-12, fmt("weighted(1,1,0.2) exact=%s; max |sum-1| over random valid weights=%.3g",
                                        exact ? "yes" : "no", worst)};
}

Verdict fleiss_against_oracle() {
    std::mt19937 rng(2024);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const int raters = std::uniform_int_distribution<int>(2, 9)(rng);
        const int items = std::uniform_int_distribution<int>(1, 30)(rng);
        std::vector<std::vector<long>> counts;
        ScoringMatrix m;
        m.rater_count = raters;
        const auto pairs = all_pairs(first_vars(9));
        std::discrete_distribution<int> pick({4, 2, 3, 1});
        for (int i = 0; i < items; ++i) {
            std::vector<long> row(4, 0);
            for (int r = 0; r < raters; ++r) ++row[static_cast<std::size_t>(pick(rng))];
            counts.push_back(row);
            m.pairs.push_back(pairs[static_cast<std::size_t>(i)]);
            m.votes.push_back({double(row[0]), double(row[1]), double(row[2]), double(row[3])});
        }
        worst = std::max(worst, std::abs(fleiss_kappa(m) - oracle::fleiss_kappa(counts)));
    }
    ScoringMatrix single;
    single.rater_count = 1;
    single.pairs = all_pairs(first_vars(3));
    single.votes = {{1, 0, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    const double one = fleiss_kappa(single);
    return {worst <= 1e-9 && one == 1.0, fmt("max |kappa - oracle| over 100 matrices=%.3g; single rater=%.17g", worst, one)};
}

Verdict orientation_safety() {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int cycles = 0, drops = 0, cases = 1000;
    for (int t = 0; t < cases; ++t) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 9)(rng);
        const auto vars = first_vars(n);
        std::vector<TierSummary> summaries;
        const std::array<double, 3> w{0.2, 0.3, 0.5};
        for (Tier tier : kTiers) {
            TierSummary s;
            s.tier = tier;
            s.weight = w[static_cast<int>(tier)];
            s.alpha = u(rng);
            for (const auto& p : all_pairs(vars)) {
                const double r = u(rng);
                Direction d = r < 0.35 ? Direction::Forward
                            : r < 0.7  ? Direction::Backward
                            : r < 0.8  ? Direction::Unresolved
                                       : Direction::NoEdge;
                const double c = u(rng);
                s.scores[p] = {p, d, c, weighted_confidence(c, s.alpha, s.weight)};
            }
            summaries.push_back(std::move(s));
        }
        const auto o = orient_and_acyclify(resolve_conflicts(summaries).edges, vars);
        if (!is_acyclic(vars, o.scm.edge_set())) ++cycles;
        for (const auto& rec : o.log) drops += rec.action == OrientAction::Dropped;
    }
    return {cycles == 0 && drops == 0, fmt("%d fuzz cases: %d cyclic outputs, %d dropped edges", cases, cycles, drops)};
}

Verdict learner_sanity() {
    GroundTruthSpec collider;
    collider.variables = {VariableId("A"), VariableId("B"), VariableId("C")};
    collider.edges = {{VariableId("A"), VariableId("C"), 1.0}, {VariableId("B"), VariableId("C"), 1.0}};
    const EdgeSet want{{VariableId("A"), VariableId("C")}, {VariableId("B"), VariableId("C")}};
    int recovered = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto g = pc_learn(simulate_data(collider, 5000, 500 + s), {}, 0.05);
        recovered += g.directed_edges == want && g.undirected_edges.empty();
    }

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int retained = 0;
    const int scenarios = 200;
    for (int t = 0; t < scenarios; ++t) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(3, 7)(rng);
        GroundTruthSpec spec;
        for (std::size_t i = 0; i < n; ++i) spec.variables.push_back(var(i));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (u(rng) < 0.35) spec.edges.push_back({var(i), var(j), (u(rng) < 0.5 ? -1 : 1) * (0.5 + u(rng))});
            }
        }
        // random acyclic whitelist: respects a random permutation, may contradict the truth
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Whitelist wl;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (u(rng) < 0.2) wl.edges.insert({var(perm[i]), var(perm[j])});
            }
        }
        const auto data = simulate_data(spec, 300, 9000 + static_cast<std::uint64_t>(t));
        const auto g = hc_learn(data, wl);
        bool all = is_acyclic(g.variables, g.directed_edges);
        for (const auto& e : wl.edges) all = all && g.directed_edges.contains(e);
        retained += all;
    }
    return {recovered >= 9 && retained == scenarios,
            fmt("pc collider recovered in %d/10 seeds; hc kept every whitelisted edge in %d/%d scenarios",
                recovered, retained, scenarios)};
}

Verdict metrics_oracle() {
    long checked = 0, mismatches = 0;
    auto compare = [&](int n, std::uint32_t pm, std::uint32_t tm, const MetricsReport& got) {
        const auto want = oracle::pair_metrics(n, pm, tm);
        ++checked;
        const bool same = got.tp == want.tp && got.fp == want.fp && got.fn == want.fn && got.tn == want.tn &&
                          std::abs(got.tpr - want.tpr) < 1e-12 && std::abs(got.fdr - want.fdr) < 1e-12 &&
                          std::abs(got.mcc - want.mcc) < 1e-12;
        mismatches += !same;
    };
    auto edges_of = [](int n, std::uint32_t mask) {
        EdgeSet s;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i != j && (mask >> (i * n + j) & 1u)) s.insert({var(i), var(j)});
            }
        }
        return s;
    };
    auto masks = [](int n, bool dags_only) {
        std::vector<std::uint32_t> out;
        const std::uint32_t limit = 1u << (n * n);
        for (std::uint32_t m = 0; m < limit; ++m) {
            bool ok = true;
            for (int i = 0; i < n && ok; ++i) ok = !(m >> (i * n + i) & 1u);
            if (ok) out.push_back(m);
        }
        if (!dags_only) return out;
        std::vector<std::uint32_t> dags;
        for (auto m : out) {
            // repeatedly strip sources
            std::uint32_t alive = (1u << n) - 1;
            bool progress = true;
            while (alive && progress) {
                progress = false;
                for (int j = 0; j < n; ++j) {
                    if (!(alive >> j & 1u)) continue;
                    bool has_parent = false;
                    for (int i = 0; i < n; ++i) has_parent |= (alive >> i & 1u) && (m >> (i * n + j) & 1u);
                    if (!has_parent) {
                        alive &= ~(1u << j);
                        progress = true;
                    }
                }
            }
            if (!alive) dags.push_back(m);
        }
        return dags;
    };

    for (int n = 1; n <= 4; ++n) {
        const auto vars = first_vars(static_cast<std::size_t>(n));
        const auto dags = masks(n, true);
        std::vector<Scm> scms;
        GroundTruthSpec base;
        base.variables.assign(vars.begin(), vars.end());
        std::vector<GroundTruthSpec> truths;
        for (auto m : dags) {
            std::vector<WeightedEdge> we;
            GroundTruthSpec t = base;
            for (const auto& e : edges_of(n, m)) {
                we.push_back({e.from, e.to, 1.0});
                t.edges.push_back({e.from, e.to, 1.0});
            }
            scms.emplace_back(vars, we);
            truths.push_back(std::move(t));
        }
        for (std::size_t p = 0; p < dags.size(); ++p) {
            for (std::size_t t = 0; t < dags.size(); ++t) compare(n, dags[p], dags[t], compare_graphs(scms[p], truths[t]));
        }
    }
    // arbitrary directed graphs, two-cycles included, on the edge-set comparator
    for (int n = 1; n <= 3; ++n) {
        const auto vars = first_vars(static_cast<std::size_t>(n));
        const auto all = masks(n, false);
        for (auto p : all) {
            const auto pe = edges_of(n, p);
            for (auto t : all) compare(n, p, t, compare_edge_sets(vars, pe, edges_of(n, t)));
        }
    }
    return {mismatches == 0, fmt("%ld graph pairs checked exhaustively, %ld mismatches", checked, mismatches)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Verdict determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "ckh_determinism";
    std::filesystem::create_directories(dir);
    std::array<std::string, 2> scm, report, dot;
    for (int run = 0; run < 2; ++run) {
        const auto tag = std::to_string(run);
        const auto out = dir / ("scm" + tag + ".json");
        const auto rep = dir / ("report" + tag + ".json");
        const auto gv = dir / ("graph" + tag + ".dot");
        const std::string cmd = std::string("\"") + CKH_CLI + "\" fuse --config \"" CKH_SCENARIO_DIR "/config.json\" --out \"" +
                                out.string() + "\" --report \"" + rep.string() + "\" --dot \"" + gv.string() + "\"";
        if (std::system(cmd.c_str()) != 0) return {false, "cli fuse exited non-zero"};
        scm[run] = slurp(out);
        report[run] = slurp(rep);
        dot[run] = slurp(gv);
    }
    const bool ok = !scm[0].empty() && scm[0] == scm[1] && report[0] == report[1] && dot[0] == dot[1];
    return {ok, fmt("scm %zu bytes, report %zu bytes, dot %zu bytes; identical=%s", scm[0].size(), report[0].size(),
                    dot[0].size(), ok ? "yes" : "no")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"1 end-to-end recovery", end_to_end_recovery},
        {"2 sensitivity pattern", sensitivity_pattern},
        {"3 arithmetic exactness", arithmetic_exactness},
        {"4 fleiss kappa oracle", fleiss_against_oracle},
        {"5 orientation safety", orientation_safety},
        {"6 learner sanity", learner_sanity},
        {"7 metrics oracle", metrics_oracle},
        {"8 determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Verdict v{false, ""};
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += !v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << v.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
