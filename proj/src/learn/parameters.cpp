#include <Eigen/QR>
#include <future>

#include "ckh/learn.hpp"

namespace ckh {

std::map<VariableId, Mechanism> fit_parameters(const Dataset& data, const EdgeSet& edges) {
    const VariableSet vars = data.variables();
    for (const auto& e : edges) {
        if (!vars.contains(e.from) || !vars.contains(e.to)) {
            throw Error(ErrorKind::InvalidInput, "edge " + e.from.name() + "->" + e.to.name() +
                                                     " is not covered by dataset '" + data.name + "'");
        }
    }
    if (!is_acyclic(vars, edges)) throw Error(ErrorKind::InvalidInput, "cannot fit a cyclic structure");

    const Eigen::Index n = data.n_rows();
    std::map<VariableId, Mechanism> out;
    for (Eigen::Index c = 0; c < data.n_cols(); ++c) {
        const VariableId& child = data.columns[c];
        Mechanism m;
        for (const auto& e : edges) {
            if (e.to == child) m.parents.push_back(e.from);
        }
        const Eigen::VectorXd y = data.rows.col(c);
        if (m.parents.empty()) {
            m.intercept = y.mean();
            m.noise_variance = n > 1 ? (y.array() - m.intercept).square().sum() / static_cast<double>(n - 1) : 0.0;
            m.fitted = true;
            out.emplace(child, std::move(m));
            continue;
        }

        const auto p = static_cast<Eigen::Index>(m.parents.size());
        if (n <= p + 1) {
            throw Error(ErrorKind::InsufficientData, "too few rows to fit parents of " + child.name());
        }
        Eigen::MatrixXd design(n, p + 1);
        design.col(0).setOnes();
        for (Eigen::Index j = 0; j < p; ++j) {
            design.col(j + 1) = data.rows.col(data.index_of(m.parents[static_cast<std::size_t>(j)]));
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        qr.setThreshold(1e-10);
        if (qr.rank() < p + 1) {
            throw Error(ErrorKind::SingularityError, "collinear or constant parents of " + child.name());
        }
        const Eigen::VectorXd beta = qr.solve(y);
        const Eigen::VectorXd resid = y - design * beta;
        m.intercept = beta(0);
        for (Eigen::Index j = 0; j < p; ++j) m.coefficients.push_back(beta(j + 1));
        m.noise_variance = resid.squaredNorm() / static_cast<double>(n - p - 1);
        m.fitted = true;
        out.emplace(child, std::move(m));
    }
    return out;
}

std::string source_id_for(const LearnedGraph& graph) {
    return graph.learner_id + "@" + graph.dataset_id;
}

std::vector<KnowledgeSource> graphs_to_sources(std::span<const LearnedGraph> graphs) {
    std::vector<KnowledgeSource> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) {
        KnowledgeSource s;
        s.id = source_id_for(g);
        s.tier = Tier::Data;
        s.scope.variables = g.variables;
        for (const auto& e : g.directed_edges) {
            auto canon = canonical_pair(e.from, e.to, Relation::Forward);
            s.assertions.push_back({canon.pair, canon.relation, 1.0});
        }
        for (const auto& p : g.undirected_edges) s.assertions.push_back({p, Relation::Undirected, 1.0});
        std::sort(s.assertions.begin(), s.assertions.end(),
                  [](const EdgeAssertion& x, const EdgeAssertion& y) { return x.pair < y.pair; });
        validate_source(s);
        out.push_back(std::move(s));
    }
    return out;
}

GridResult run_learner_grid(std::span<const Dataset> datasets, std::span<const std::string> learners,
                            const Whitelist& whitelist, double ci_alpha) {
    struct Job {
        std::string learner;
        const Dataset* data;
    };
    std::vector<Job> jobs;
    for (const auto& l : learners) {
        if (l != "pc" && l != "hc" && l != "mmhc") {
            throw Error(ErrorKind::ValidationError, "unknown learner '" + l + "'");
        }
        for (const auto& d : datasets) jobs.push_back({l, &d});
    }
    std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
        return std::tie(a.learner, a.data->name) < std::tie(b.learner, b.data->name);
    });

    std::vector<std::future<LearnedGraph>> futures;
    futures.reserve(jobs.size());
    for (const auto& job : jobs) {
        futures.push_back(std::async(std::launch::async, [&job, &whitelist, ci_alpha] {
            if (job.learner == "pc") return pc_learn(*job.data, whitelist, ci_alpha);
            HillClimbOptions opts;
            opts.restrict_to_mmpc = job.learner == "mmhc";
            opts.mmpc_alpha = ci_alpha;
            return hc_learn(*job.data, whitelist, opts);
        }));
    }

    GridResult out;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        try {
            out.graphs.push_back(futures[i].get());
        } catch (const Error& e) {
            out.failures.push_back({jobs[i].learner, jobs[i].data->name, e.what()});
        }
    }
    return out;
}

}  // namespace ckh
