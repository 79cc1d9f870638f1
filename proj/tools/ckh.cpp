#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ckh/eval.hpp"
#include "ckh/ingest.hpp"
#include "ckh/report.hpp"
#include "ckh/scenario.hpp"

namespace {

using nlohmann::json;

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ckh::Error(ckh::ErrorKind::IoError, "cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw ckh::Error(ckh::ErrorKind::IoError, "write to '" + path + "' failed");
}

int fail(const ckh::Error& e) {
    json err{{"error", ckh::to_string(e.kind())}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return e.kind() == ckh::ErrorKind::IoError ? 1 : 2;
}

std::vector<ckh::VariableId> split_columns(const std::string& list) {
    std::vector<ckh::VariableId> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.emplace_back(item);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ckh: fuse tiered causal knowledge into a structural causal model"};
    app.require_subcommand(1);

    std::string spec_path, out_path, columns;
    std::int64_t n = 0;
    std::uint64_t seed = 0;
    auto* simulate = app.add_subcommand("simulate", "sample a CSV dataset from a ground-truth spec");
    simulate->add_option("--spec", spec_path, "ground-truth JSON")->required();
    simulate->add_option("--n", n, "rows")->required();
    simulate->add_option("--seed", seed, "RNG seed");
    simulate->add_option("--columns", columns, "comma-separated subset of variables");
    simulate->add_option("--out", out_path, "CSV output")->required();

    std::string config_path, report_path, dot_path;
    auto* fuse = app.add_subcommand("fuse", "run the three-tier fusion pipeline");
    fuse->add_option("--config", config_path, "scenario config JSON")->required();
    fuse->add_option("--out", out_path, "SCM JSON output")->required();
    fuse->add_option("--report", report_path, "run report JSON");
    fuse->add_option("--dot", dot_path, "Graphviz output");

    std::string scm_path, truth_path;
    auto* evaluate = app.add_subcommand("evaluate", "compare an SCM against ground truth");
    evaluate->add_option("--scm", scm_path, "SCM JSON")->required();
    evaluate->add_option("--truth", truth_path, "ground-truth JSON")->required();

    bool every_source = false;
    auto* sensitivity = app.add_subcommand("sensitivity", "run the perturbation grid");
    sensitivity->add_option("--config", config_path, "scenario config JSON")->required();
    sensitivity->add_option("--truth", truth_path, "ground-truth JSON")->required();
    sensitivity->add_option("--out", out_path, "CSV output")->required();
    sensitivity->add_flag("--inject-every-source", every_source, "add false edges to every source of the tier");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*simulate) {
            const auto spec = ckh::load_ground_truth(spec_path);
            const auto cols = split_columns(columns);
            const auto data = ckh::simulate_data(spec, n, seed, cols, "simulated");
            write_file(out_path, ckh::dataset_to_csv(data));
        } else if (*fuse) {
            const auto config = ckh::load_config(config_path);
            const auto inputs = ckh::load_inputs(config);
            const auto result = ckh::fuse_all(config, inputs);
            write_file(out_path, ckh::scm_to_json(result.scm()).dump(2) + "\n");
            if (!report_path.empty()) write_file(report_path, ckh::run_report(result).dump(2) + "\n");
            if (!dot_path.empty()) write_file(dot_path, ckh::scm_to_dot(result.scm()));
        } else if (*evaluate) {
            const auto truth = ckh::load_ground_truth(truth_path);
            const auto scm = ckh::scm_from_json(ckh::read_json_file(scm_path));
            std::cout << ckh::metrics_to_json(ckh::compare_graphs(scm, truth)).dump(2) << "\n";
        } else if (*sensitivity) {
            const auto truth = ckh::load_ground_truth(truth_path);
            const auto config = ckh::load_config(config_path);
            const auto inputs = ckh::load_inputs(config);
            const auto schedule = ckh::default_schedule(every_source ? ckh::InjectionScope::EverySource
                                                                     : ckh::InjectionScope::FirstCoveringSource);
            const auto rows = ckh::sensitivity_run(config, inputs, truth, schedule);
            write_file(out_path, ckh::sensitivity_to_csv(rows));
            for (const auto& r : rows) {
                if (r.error) std::cerr << json{{"tier", r.tier}, {"alteration", r.alteration}, {"error", *r.error}}.dump() << "\n";
                for (const auto& w : r.warnings) std::cerr << json{{"tier", r.tier}, {"alteration", r.alteration}, {"warning", w}}.dump() << "\n";
            }
        }
    } catch (const ckh::Error& e) {
        return fail(e);
    } catch (const std::exception& e) {
        return fail(ckh::Error(ckh::ErrorKind::InvalidInput, e.what()));
    }
    return 0;
}
