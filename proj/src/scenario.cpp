#include "ckh/scenario.hpp"

#include "ckh/eval.hpp"
#include "ckh/ingest.hpp"

namespace ckh {

using nlohmann::json;

namespace {

std::string resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path.string() : (base / path).lexically_normal().string();
}

std::vector<std::string> path_list(const json& doc, const char* key, const std::filesystem::path& base) {
    std::vector<std::string> out;
    if (!doc.contains(key)) return out;
    for (const auto& p : doc.at(key)) out.push_back(resolve(base, p.get<std::string>()));
    return out;
}

}  // namespace

ScenarioConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    ScenarioConfig c;
    try {
        c.problem_statement = doc.value("problem_statement", "");
        if (doc.contains("keywords")) c.keywords = doc.at("keywords").get<std::vector<std::string>>();
        if (doc.contains("tier_weights")) {
            const json& w = doc.at("tier_weights");
            c.tier_weights = {w.at("expert").get<double>(), w.at("data").get<double>(),
                              w.at("literature").get<double>()};
        }
        c.tier1_threshold = doc.value("tier1_threshold", 0.8);
        c.ci_alpha = doc.value("ci_alpha", 0.05);
        c.sample_seed = doc.value("sample_seed", std::int64_t{0});
        if (doc.contains("learners")) c.learners = doc.at("learners").get<std::vector<std::string>>();
        c.expert_files = path_list(doc, "experts", base_dir);
        c.literature_files = path_list(doc, "literature", base_dir);
        c.data_source_files = path_list(doc, "data_sources", base_dir);
        if (doc.contains("datasets")) {
            std::size_t i = 0;
            for (const auto& d : doc.at("datasets")) {
                DatasetSpec spec;
                spec.name = d.value("name", "d" + std::to_string(++i));
                if (d.contains("path")) spec.path = resolve(base_dir, d.at("path").get<std::string>());
                if (d.contains("columns")) {
                    for (const auto& col : d.at("columns")) spec.columns.emplace_back(col.get<std::string>());
                }
                spec.n = d.value("n", 0);
                if (!spec.path && spec.n < 1) {
                    throw Error(ErrorKind::ValidationError, "dataset '" + spec.name + "' needs a path or n >= 1");
                }
                c.datasets.push_back(std::move(spec));
            }
        }
        if (doc.contains("ground_truth")) c.ground_truth = resolve(base_dir, doc.at("ground_truth").get<std::string>());
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("config: ") + e.what());
    }
    validate_weights(c.tier_weights);
    if (!(c.tier1_threshold >= 0.0 && c.tier1_threshold <= 1.0)) {
        throw Error(ErrorKind::ValidationError, "tier1_threshold must lie in [0,1]");
    }
    if (!(c.ci_alpha > 0.0 && c.ci_alpha < 1.0)) {
        throw Error(ErrorKind::ValidationError, "ci_alpha must lie in (0,1)");
    }
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_json_file(path), path.parent_path());
}

std::uint64_t dataset_seed(std::int64_t sample_seed, std::size_t index) {
    // splitmix64 over (seed, index)
    std::uint64_t z = static_cast<std::uint64_t>(sample_seed) * 0x9E3779B97F4A7C15ULL + index + 1;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

ScenarioInputs load_inputs(const ScenarioConfig& config) {
    ScenarioInputs in;
    for (const auto& k : config.keywords) in.keywords.emplace(k);

    std::vector<ExpertSubmission> submissions;
    for (const auto& path : config.expert_files) {
        const json doc = read_json_file(path);
        try {
            if (doc.contains("phase")) {
                submissions.push_back(parse_submission(doc));
            } else {
                KnowledgeSource s = parse_source(doc);
                if (s.tier != Tier::Expert) {
                    throw Error(ErrorKind::ValidationError, "listed as expert but declares tier " +
                                                                std::string(to_string(s.tier)));
                }
                in.experts.push_back(std::move(s));
            }
        } catch (const Error& e) {
            throw e.with_context(path);
        }
    }
    if (!submissions.empty()) {
        auto merged = merge_expert_phases(submissions, in.keywords);
        in.experts.insert(in.experts.end(), merged.sources.begin(), merged.sources.end());
    }

    auto load_tier = [](const std::vector<std::string>& files, Tier tier) {
        std::vector<KnowledgeSource> out;
        for (const auto& path : files) {
            KnowledgeSource s = parse_source_file(path);
            if (s.tier != tier) {
                throw Error(ErrorKind::ValidationError, path + ": expected a " + std::string(to_string(tier)) +
                                                            " source");
            }
            out.push_back(std::move(s));
        }
        return out;
    };
    in.literature = load_tier(config.literature_files, Tier::Literature);
    in.data_sources = load_tier(config.data_source_files, Tier::Data);

    std::optional<GroundTruthSpec> truth;
    for (std::size_t i = 0; i < config.datasets.size(); ++i) {
        const DatasetSpec& spec = config.datasets[i];
        if (spec.path) {
            Dataset d = load_dataset(*spec.path);
            d.name = spec.name;
            in.datasets.push_back(std::move(d));
            continue;
        }
        if (!config.ground_truth) {
            throw Error(ErrorKind::ValidationError,
                        "dataset '" + spec.name + "' is simulated but no ground_truth is configured");
        }
        if (!truth) truth = load_ground_truth(*config.ground_truth);
        in.datasets.push_back(simulate_data(*truth, spec.n, dataset_seed(config.sample_seed, i),
                                            spec.columns, spec.name));
    }
    return in;
}

}  // namespace ckh
