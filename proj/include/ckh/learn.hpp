#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ckh/core.hpp"
#include "ckh/ingest.hpp"

namespace ckh {

struct LearnedGraph {
    VariableSet variables;
    EdgeSet directed_edges;
    std::set<VarPair> undirected_edges;
    std::string learner_id;
    std::string dataset_id;

    bool adjacent(const VariableId& x, const VariableId& y) const;
};

struct Whitelist {
    EdgeSet edges;

    // Edges whose endpoints are both in `variables`.
    EdgeSet restricted_to(const VariableSet& variables) const;
};

// Mean vector and maximum-likelihood covariance of a dataset; every CI test
// and BIC term is computed from these.
struct SampleMoments {
    Eigen::Index n = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;   // divides by n
    Eigen::MatrixXd correlation;

    explicit SampleMoments(const Dataset& data);
};

struct CiResult {
    bool independent = false;
    double p_value = 0.0;
};

// Fisher z-test of x _||_ y | cond on the partial correlation. The conditioning
// block of the correlation matrix is inverted; a singular block or a variable
// fully determined by `cond` throws SingularityError.
CiResult fisher_z_test(const SampleMoments& moments, Eigen::Index x, Eigen::Index y,
                       std::span<const Eigen::Index> cond, double ci_alpha);
CiResult fisher_z_test(const Dataset& data, const VariableId& x, const VariableId& y,
                       const VariableSet& cond, double ci_alpha);

// PC-stable skeleton search, v-structures from separating sets, then the two
// orientation rules to a fixed point. Whitelisted edges are never removed and
// are oriented before v-structure detection.
LearnedGraph pc_learn(const Dataset& data, const Whitelist& whitelist, double ci_alpha = 0.05);

struct HillClimbOptions {
    // Restrict additions to max-min parents-and-children candidates.
    bool restrict_to_mmpc = false;
    double mmpc_alpha = 0.05;
    int mmpc_max_conditioning = 3;
    int max_iterations = 10000;
};

// Steepest-ascent hill climbing over DAGs (add / delete / reverse) on the
// Gaussian BIC. Moves are scanned lexicographically; the first best move wins.
LearnedGraph hc_learn(const Dataset& data, const Whitelist& whitelist,
                      const HillClimbOptions& options = {});

// Candidate parents-and-children of `target` (column indices).
std::vector<Eigen::Index> mmpc(const SampleMoments& moments, Eigen::Index target, double ci_alpha,
                               int max_conditioning);

// Gaussian BIC term for one family: log-likelihood of the OLS fit of `child`
// on `parents` minus (k/2) log n with k = |parents| + 2.
double family_bic(const SampleMoments& moments, Eigen::Index child,
                  std::span<const Eigen::Index> parents);

// Sum of family terms over the dataset's columns. Undirected edges are not
// allowed; throws InvalidInput on a cycle.
double bic_score(const Dataset& data, const LearnedGraph& dag);

// OLS of every column on its parents. Roots get the sample mean and the
// unbiased sample variance; noise variances are unbiased residual variances.
std::map<VariableId, Mechanism> fit_parameters(const Dataset& data, const EdgeSet& edges);

// One Data-tier source per learned graph, scoped to the dataset's columns.
std::vector<KnowledgeSource> graphs_to_sources(std::span<const LearnedGraph> graphs);

std::string source_id_for(const LearnedGraph& graph);

struct LearnerFailure {
    std::string learner_id;
    std::string dataset_id;
    std::string message;
};

struct GridResult {
    std::vector<LearnedGraph> graphs;  // ordered by (learner_id, dataset_id)
    std::vector<LearnerFailure> failures;
};

// Runs every learner ("pc", "hc", "mmhc") on every dataset in parallel.
// A failing run is recorded and skipped.
GridResult run_learner_grid(std::span<const Dataset> datasets,
                            std::span<const std::string> learners, const Whitelist& whitelist,
                            double ci_alpha);

}  // namespace ckh
