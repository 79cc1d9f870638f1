#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "ckh/agreement.hpp"
#include "ckh/eval.hpp"
#include "ckh/scenario.hpp"

using namespace ckh;

namespace {

VariableId v(const char* s) { return VariableId(s); }

GroundTruthSpec spec(std::vector<const char*> vars, std::vector<std::tuple<const char*, const char*, double>> edges) {
    GroundTruthSpec s;
    for (auto x : vars) s.variables.emplace_back(x);
    for (auto [f, t, c] : edges) s.edges.push_back({v(f), v(t), c});
    return s;
}

double correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Eigen::VectorXd a = x.array() - x.mean();
    const Eigen::VectorXd b = y.array() - y.mean();
    return a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

std::vector<double> column(const Dataset& d, const char* name) {
    const auto c = d.rows.col(d.index_of(v(name)));
    return {c.data(), c.data() + c.size()};
}

std::string serialize(const ScenarioInputs& in) {
    std::string out;
    for (const auto* tier : {&in.experts, &in.data_sources, &in.literature}) {
        for (const auto& s : *tier) out += source_to_json(s).dump();
    }
    for (const auto& d : in.datasets) out += dataset_to_csv(d);
    return out;
}

}  // namespace

TEST_CASE("ground truth validation") {
    CHECK_NOTHROW(validate_spec(spec({"A", "B"}, {{"A", "B", 1.0}})));
    CHECK_THROWS_AS(validate_spec(spec({"A", "B"}, {{"A", "B", 1.0}, {"B", "A", 1.0}})), Error);
    CHECK_THROWS_AS(validate_spec(spec({"A", "B", "C"}, {{"A", "B", 1.0}, {"B", "C", 1.0}, {"C", "A", 1.0}})), Error);
    CHECK_THROWS_AS(validate_spec(spec({"A"}, {{"A", "Z", 1.0}})), Error);
    auto neg = spec({"A"}, {});
    neg.noise_variances[v("A")] = 0.0;
    try {
        validate_spec(neg);
        FAIL("expected InvalidSpec");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidSpec);
    }
    auto fixture = load_ground_truth(CKH_SCENARIO_DIR "/ground_truth.json");
    CHECK(fixture.variables.size() == 8);
    CHECK(fixture.edges.size() == 10);
    for (const auto& e : fixture.edges) {
        CHECK(std::abs(e.coefficient) >= 0.8);
        CHECK(std::abs(e.coefficient) <= 1.5);
    }
    CHECK(parse_ground_truth(ground_truth_to_json(fixture)).edge_set() == fixture.edge_set());
}

TEST_CASE("simulation") {
    SUBCASE("disconnected sem gives independent standard normals") {
        auto d = simulate_data(spec({"A", "B", "C"}, {}), 5000, 1);
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(d.rows.col(i).mean()) < 0.05);
            for (int j = i + 1; j < 3; ++j) CHECK(std::abs(correlation(d.rows.col(i), d.rows.col(j))) < 0.05);
        }
    }
    SUBCASE("slope is recovered") {
        auto d = simulate_data(spec({"A", "B"}, {{"A", "B", 2.0}}), 5000, 2);
        const Eigen::VectorXd a = d.rows.col(0).array() - d.rows.col(0).mean();
        const Eigen::VectorXd b = d.rows.col(1).array() - d.rows.col(1).mean();
        CHECK(a.dot(b) / a.squaredNorm() == doctest::Approx(2.0).epsilon(0.025));
    }
    SUBCASE("same seed is bit identical") {
        auto s = load_ground_truth(CKH_SCENARIO_DIR "/ground_truth.json");
        CHECK(simulate_data(s, 100, 42).rows == simulate_data(s, 100, 42).rows);
        CHECK(simulate_data(s, 100, 42).rows != simulate_data(s, 100, 43).rows);
    }
    SUBCASE("column subsets") {
        auto s = load_ground_truth(CKH_SCENARIO_DIR "/ground_truth.json");
        std::vector<VariableId> cols{v("A"), v("D"), v("G")};
        auto sub = simulate_data(s, 5000, 7, cols, "d1");
        auto full = simulate_data(s, 5000, 7);
        auto other = simulate_data(s, 5000, 8);
        CHECK(sub.n_cols() == 3);
        CHECK(full.n_cols() == 8);
        CHECK(full.n_rows() == 5000);
        for (const char* c : {"A", "D", "G"}) {
            CHECK(ks_statistic(column(sub, c), column(full, c)) < 0.05);
            CHECK(ks_statistic(column(sub, c), column(other, c)) < 0.05);
        }
        std::vector<VariableId> bad{v("Z")};
        CHECK_THROWS_AS(simulate_data(s, 10, 1, bad), Error);
    }
    SUBCASE("n must be positive") {
        try {
            simulate_data(spec({"A"}, {}), 0, 1);
            FAIL("expected InvalidInput");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InvalidInput);
        }
    }
}

TEST_CASE("metrics") {
    const auto abc = make_variables({"A", "B", "C"});
    SUBCASE("identity") {
        EdgeSet t{{v("A"), v("B")}, {v("B"), v("C")}};
        auto m = compare_edge_sets(abc, t, t);
        CHECK(m.tpr == 1.0);
        CHECK(m.fdr == 0.0);
        CHECK(m.mcc == 1.0);
    }
    SUBCASE("reversed edge") {
        auto m = compare_edge_sets(abc, {{v("B"), v("A")}}, {{v("A"), v("B")}});
        CHECK(m.tp == 0);
        CHECK(m.fp == 1);
        CHECK(m.fn == 1);
        CHECK(m.tn == 2);
        CHECK(m.tpr == 0.0);
        CHECK(m.fdr == 1.0);
        CHECK(m.mcc == doctest::Approx(-1.0 / 3.0));
    }
    SUBCASE("empty prediction has zero denominators") {
        auto m = compare_edge_sets(abc, {}, {{v("A"), v("B")}});
        CHECK(m.fdr == 0.0);
        CHECK(m.mcc == 0.0);
    }
    SUBCASE("variable mismatch") {
        auto truth = spec({"A", "B"}, {});
        Scm scm(abc, {});
        CHECK_THROWS_AS(compare_graphs(scm, truth), Error);
    }
    SUBCASE("relabeling both graphs leaves metrics unchanged") {
        EdgeSet t{{v("A"), v("B")}, {v("B"), v("C")}};
        EdgeSet p{{v("A"), v("B")}, {v("C"), v("B")}, {v("A"), v("C")}};
        auto relabel = [](const EdgeSet& s) {
            EdgeSet out;
            auto map = [](const VariableId& x) { return x == VariableId("A") ? VariableId("C") : x == VariableId("C") ? VariableId("A") : x; };
            for (const auto& e : s) out.insert({map(e.from), map(e.to)});
            return out;
        };
        auto a = compare_edge_sets(abc, p, t);
        auto b = compare_edge_sets(abc, relabel(p), relabel(t));
        CHECK(a.tp == b.tp);
        CHECK(a.fp == b.fp);
        CHECK(a.tn == b.tn);
        CHECK(a.mcc == doctest::Approx(b.mcc));
    }
}

TEST_CASE("perturbations") {
    auto config = load_config(CKH_SCENARIO_DIR "/config.json");
    auto inputs = load_inputs(config);
    const std::string before = serialize(inputs);

    SUBCASE("A1 on the expert tier") {
        auto out = apply_perturbation(inputs, default_alterations(Tier::Expert)[0]);
        const auto* a = out.inputs.experts.at(0).find(canonical_pair(v("C"), v("D")).pair);
        REQUIRE(a != nullptr);
        CHECK(a->relation == Relation::Forward);
        CHECK(a->confidence == 1.0);
        CHECK(serialize(inputs) == before);
    }
    SUBCASE("A2 on the literature tier") {
        auto out = apply_perturbation(inputs, default_alterations(Tier::Literature)[1]);
        const auto eg = canonical_pair(v("E"), v("G")).pair;
        for (const auto& s : out.inputs.literature) {
            if (const auto* a = s.find(eg)) CHECK(a->relation == Relation::Backward);
        }
        CHECK(out.warnings.empty());
    }
    SUBCASE("reverse twice restores the matrix") {
        Perturbation p = default_alterations(Tier::Literature)[1];
        auto once = apply_perturbation(inputs, p).inputs;
        p.edge = {v("G"), v("E")};
        auto twice = apply_perturbation(once, p).inputs;
        const auto vars = tier_variables(inputs.literature);
        CHECK(build_scoring_matrix(twice.literature, vars).votes ==
              build_scoring_matrix(inputs.literature, vars).votes);
    }
    SUBCASE("A3 on a tier that never asserts it is a recorded no-op") {
        auto out = apply_perturbation(inputs, default_alterations(Tier::Expert)[2]);
        CHECK(out.warnings.size() == 1);
    }
    SUBCASE("data tier perturbations are queued") {
        auto out = apply_perturbation(inputs, default_alterations(Tier::Data)[0]);
        CHECK(out.inputs.data_perturbations.size() == 1);
    }
    SUBCASE("empty target tier") {
        ScenarioInputs none;
        CHECK_THROWS_AS(apply_perturbation(none, default_alterations(Tier::Literature)[0]), Error);
    }
    SUBCASE("every-source injection") {
        auto out = apply_perturbation(inputs, default_alterations(Tier::Literature, InjectionScope::EverySource)[0]);
        for (const auto& s : out.inputs.literature) CHECK(s.find(canonical_pair(v("C"), v("D")).pair) != nullptr);
    }
}

TEST_CASE("sensitivity grid") {
    auto config = load_config(CKH_SCENARIO_DIR "/config.json");
    auto inputs = load_inputs(config);
    auto truth = load_ground_truth(CKH_SCENARIO_DIR "/ground_truth.json");
    const std::string before = serialize(inputs);
    const auto schedule = default_schedule();
    CHECK(schedule.size() == 10);

    auto rows = sensitivity_run(config, inputs, truth, schedule);
    REQUIRE(rows.size() == 10);
    CHECK(serialize(inputs) == before);
    for (const auto& r : rows) CHECK_FALSE(r.error);

    auto direct = compare_graphs(fuse_all(config, inputs).scm(), truth);
    CHECK(rows[0].metrics.mcc == direct.mcc);
    CHECK(rows[0].metrics.tpr == direct.tpr);
    for (int i = 1; i <= 3; ++i) CHECK(rows[i].metrics.mcc <= rows[0].metrics.mcc);

    const std::string csv = sensitivity_to_csv(rows);
    CHECK(csv.rfind("tier,alteration,alpha_t1,alpha_t2,alpha_t3,tpr,fdr,mcc\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
}
