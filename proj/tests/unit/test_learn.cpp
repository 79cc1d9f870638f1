#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/QR>
#include <cmath>
#include <numbers>

#include "ckh/eval.hpp"
#include "ckh/learn.hpp"

using namespace ckh;

namespace {

VariableId v(const char* s) { return VariableId(s); }

GroundTruthSpec spec(std::vector<const char*> vars, std::vector<std::tuple<const char*, const char*, double>> edges) {
    GroundTruthSpec s;
    for (auto x : vars) s.variables.emplace_back(x);
    for (auto [f, t, c] : edges) s.edges.push_back({v(f), v(t), c});
    return s;
}

Dataset chain(std::uint64_t seed, int n = 3000) {
    return simulate_data(spec({"A", "B", "C"}, {{"A", "B", 1.0}, {"B", "C", 1.0}}), n, seed);
}

Dataset collider(std::uint64_t seed, int n = 5000) {
    return simulate_data(spec({"A", "B", "C"}, {{"A", "C", 1.0}, {"B", "C", 1.0}}), n, seed);
}

// Gaussian BIC from an explicit least-squares fit on the raw rows.
double bic_by_regression(const Dataset& d, Eigen::Index child, std::vector<Eigen::Index> parents) {
    const auto n = d.n_rows();
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(parents.size()) + 1);
    x.col(0).setOnes();
    for (std::size_t i = 0; i < parents.size(); ++i) x.col(static_cast<Eigen::Index>(i) + 1) = d.rows.col(parents[i]);
    Eigen::VectorXd y = d.rows.col(child);
    Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
    const double rss = (y - x * beta).squaredNorm();
    const double sigma2 = rss / static_cast<double>(n);
    const double ll = -0.5 * n * std::log(2 * std::numbers::pi * sigma2) - 0.5 * n;
    return ll - 0.5 * (static_cast<double>(parents.size()) + 2) * std::log(static_cast<double>(n));
}

}  // namespace

TEST_CASE("fisher z on a chain") {
    auto d = chain(3);
    auto marginal = fisher_z_test(d, v("A"), v("C"), {}, 0.05);
    CHECK_FALSE(marginal.independent);
    CHECK(marginal.p_value < 1e-10);
    auto given_b = fisher_z_test(d, v("A"), v("C"), make_variables({"B"}), 0.05);
    CHECK(given_b.p_value > 0.0);
    CHECK(given_b.p_value <= 1.0);
}

TEST_CASE("fisher z is symmetric in its operands") {
    auto d = simulate_data(spec({"A", "B", "C", "D"}, {{"A", "B", 0.3}, {"C", "D", 0.2}, {"A", "D", 0.1}}), 500, 11);
    const SampleMoments m(d);
    std::vector<Eigen::Index> cond{2};
    for (Eigen::Index x = 0; x < 4; ++x) {
        for (Eigen::Index y = 0; y < 4; ++y) {
            if (x == y || x == 2 || y == 2) continue;
            CHECK(fisher_z_test(m, x, y, cond, 0.05).p_value == fisher_z_test(m, y, x, cond, 0.05).p_value);
        }
    }
}

TEST_CASE("fisher z null p-values are roughly uniform") {
    int rejected = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        auto d = simulate_data(spec({"X", "Y"}, {}), 200, 1000 + s);
        rejected += fisher_z_test(d, v("X"), v("Y"), {}, 0.05).independent ? 0 : 1;
    }
    CHECK(rejected >= 2);
    CHECK(rejected <= 22);
}

TEST_CASE("fisher z failure modes") {
    auto small = chain(1, 4);
    CHECK_THROWS_AS(fisher_z_test(small, v("A"), v("C"), make_variables({"B"}), 0.05), Error);

    Dataset dup{"dup", {v("A"), v("B"), v("C")}, Eigen::MatrixXd(50, 3)};
    for (int i = 0; i < 50; ++i) {
        dup.rows(i, 0) = std::sin(i);
        dup.rows(i, 1) = 2 * std::sin(i);
        dup.rows(i, 2) = std::cos(3.0 * i);
    }
    try {
        fisher_z_test(dup, v("A"), v("C"), make_variables({"B"}), 0.05);
        FAIL("expected SingularityError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SingularityError);
    }
}

TEST_CASE("pc on a chain leaves the skeleton undirected") {
    auto g = pc_learn(chain(5), {}, 0.05);
    CHECK(g.directed_edges.empty());
    CHECK(g.undirected_edges == std::set<VarPair>{{v("A"), v("B")}, {v("B"), v("C")}});
    CHECK_FALSE(g.adjacent(v("A"), v("C")));
}

TEST_CASE("pc orients a collider") {
    auto g = pc_learn(collider(2), {}, 0.05);
    CHECK(g.directed_edges == EdgeSet{{v("A"), v("C")}, {v("B"), v("C")}});
    CHECK(g.undirected_edges.empty());
}

TEST_CASE("pc orientation propagates away from a collider") {
    auto d = simulate_data(spec({"A", "B", "C", "D"}, {{"A", "C", 1.0}, {"B", "C", 1.0}, {"C", "D", 1.0}}), 5000, 4);
    auto g = pc_learn(d, {}, 0.05);
    CHECK(g.directed_edges.contains({v("C"), v("D")}));
}

TEST_CASE("pc keeps whitelisted edges") {
    auto d = simulate_data(spec({"A", "B", "C"}, {{"A", "B", 1.0}}), 2000, 9);
    Whitelist wl{{{v("C"), v("A")}}};
    auto g = pc_learn(d, wl, 0.05);
    CHECK(g.directed_edges.contains({v("C"), v("A")}));
}

TEST_CASE("family bic matches an explicit regression") {
    auto d = simulate_data(spec({"A", "B", "C"}, {{"A", "C", 0.8}, {"B", "C", -1.2}}), 1000, 21);
    const SampleMoments m(d);
    std::vector<Eigen::Index> none, one{0}, two{0, 1};
    CHECK(family_bic(m, 2, none) == doctest::Approx(bic_by_regression(d, 2, {})).epsilon(1e-9));
    CHECK(family_bic(m, 2, one) == doctest::Approx(bic_by_regression(d, 2, {0})).epsilon(1e-9));
    CHECK(family_bic(m, 2, two) == doctest::Approx(bic_by_regression(d, 2, {0, 1})).epsilon(1e-9));
}

TEST_CASE("bic is equal across markov-equivalent dags") {
    auto d = chain(8);
    LearnedGraph fwd{d.variables(), {{v("A"), v("B")}, {v("B"), v("C")}}, {}, "", ""};
    LearnedGraph bwd{d.variables(), {{v("B"), v("A")}, {v("C"), v("B")}}, {}, "", ""};
    LearnedGraph coll{d.variables(), {{v("A"), v("B")}, {v("C"), v("B")}}, {}, "", ""};
    CHECK(bic_score(d, fwd) == doctest::Approx(bic_score(d, bwd)).epsilon(1e-10));
    CHECK(bic_score(d, fwd) > bic_score(d, coll));
    LearnedGraph cyc{d.variables(), {{v("A"), v("B")}, {v("B"), v("A")}}, {}, "", ""};
    CHECK_THROWS_AS(bic_score(d, cyc), Error);
}

TEST_CASE("hill climbing finds the true adjacencies and keeps whitelists") {
    auto d = collider(3);
    auto g = hc_learn(d, {});
    CHECK(g.undirected_edges.empty());
    CHECK(g.adjacent(v("A"), v("C")));
    CHECK(g.adjacent(v("B"), v("C")));
    CHECK(is_acyclic(g.variables, g.directed_edges));

    // local optimum: dropping any edge lowers the score
    const double best = bic_score(d, g);
    for (const auto& e : g.directed_edges) {
        auto fewer = g;
        fewer.directed_edges.erase(e);
        CHECK(bic_score(d, fewer) < best);
    }

    auto chain_fit = hc_learn(chain(4), {});
    CHECK_FALSE(chain_fit.adjacent(v("A"), v("C")));

    Whitelist wl{{{v("C"), v("A")}}};
    auto forced = hc_learn(d, wl);
    CHECK(forced.directed_edges.contains({v("C"), v("A")}));
    CHECK(is_acyclic(forced.variables, forced.directed_edges));
}

TEST_CASE("restricted hill climbing uses mmpc candidates") {
    auto d = chain(12);
    const SampleMoments m(d);
    auto pc_of_a = mmpc(m, 0, 0.05, 3);
    CHECK(pc_of_a == std::vector<Eigen::Index>{1});
    HillClimbOptions opt;
    opt.restrict_to_mmpc = true;
    auto g = hc_learn(d, {}, opt);
    CHECK_FALSE(g.adjacent(v("A"), v("C")));
    CHECK(g.adjacent(v("A"), v("B")));
}

TEST_CASE("parameter fitting") {
    auto s = spec({"X", "Y"}, {{"X", "Y", 2.0}});
    s.intercepts[v("Y")] = 0.5;
    s.noise_variances[v("Y")] = 0.25;
    auto d = simulate_data(s, 5000, 17);
    auto mech = fit_parameters(d, {{v("X"), v("Y")}});
    CHECK(mech.at(v("Y")).coefficients.at(0) == doctest::Approx(2.0).epsilon(0.025));
    CHECK(mech.at(v("Y")).intercept == doctest::Approx(0.5).epsilon(0.1));
    CHECK(mech.at(v("Y")).noise_variance == doctest::Approx(0.25).epsilon(0.1));
    CHECK(mech.at(v("X")).parents.empty());
    CHECK(mech.at(v("X")).noise_variance == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("learned graphs become data sources") {
    auto d = collider(6);
    d.name = "d3";
    std::vector<LearnedGraph> graphs{pc_learn(d, {}, 0.05)};
    graphs[0].learner_id = "pc";
    auto sources = graphs_to_sources(graphs);
    REQUIRE(sources.size() == 1);
    CHECK(sources[0].id == "pc@d3");
    CHECK(sources[0].tier == Tier::Data);
    CHECK(sources[0].scope.variables == d.variables());
    CHECK(sources[0].assertions.size() == 2);
}

TEST_CASE("learner grid is ordered and isolates failures") {
    auto a = chain(1);
    a.name = "a";
    Dataset tiny{"b", {v("A"), v("B")}, Eigen::MatrixXd::Zero(3, 2)};
    std::vector<Dataset> data{tiny, a};
    std::vector<std::string> learners{"pc", "hc"};
    auto grid = run_learner_grid(data, learners, {}, 0.05);
    std::vector<std::string> ids;
    for (const auto& g : grid.graphs) ids.push_back(source_id_for(g));
    CHECK(ids == std::vector<std::string>{"hc@a", "pc@a"});
    CHECK(grid.failures.size() == 2);

    std::vector<std::string> unknown{"ges"};
    CHECK_THROWS_AS(run_learner_grid(data, unknown, {}, 0.05), Error);
}
