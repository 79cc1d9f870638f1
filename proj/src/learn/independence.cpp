#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "ckh/learn.hpp"

namespace ckh {

SampleMoments::SampleMoments(const Dataset& data) : n(data.n_rows()) {
    if (n == 0) throw Error(ErrorKind::InsufficientData, "dataset '" + data.name + "' is empty");
    mean = data.rows.colwise().mean().transpose();
    const Eigen::MatrixXd centered = data.rows.rowwise() - mean.transpose();
    covariance = (centered.transpose() * centered) / static_cast<double>(n);
    const Eigen::VectorXd sd = covariance.diagonal().cwiseSqrt();
    correlation = covariance;
    for (Eigen::Index i = 0; i < correlation.rows(); ++i) {
        for (Eigen::Index j = 0; j < correlation.cols(); ++j) {
            correlation(i, j) = (sd(i) > 0 && sd(j) > 0) ? covariance(i, j) / (sd(i) * sd(j))
                                                         : std::numeric_limits<double>::quiet_NaN();
        }
        if (sd(i) > 0) correlation(i, i) = 1.0;
    }
}

namespace {

constexpr double kSingularTolerance = 1e-10;

double partial_correlation(const Eigen::MatrixXd& corr, Eigen::Index x, Eigen::Index y,
                           std::span<const Eigen::Index> cond) {
    for (Eigen::Index v : {x, y}) {
        if (!std::isfinite(corr(v, v))) {
            throw Error(ErrorKind::SingularityError, "zero-variance column in CI test");
        }
    }
    if (cond.empty()) return corr(x, y);

    const auto k = static_cast<Eigen::Index>(cond.size());
    Eigen::MatrixXd block(k, k);
    Eigen::MatrixXd cross(k, 2);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) block(i, j) = corr(cond[i], cond[j]);
        cross(i, 0) = corr(cond[i], x);
        cross(i, 1) = corr(cond[i], y);
    }
    if (!block.allFinite() || !cross.allFinite()) {
        throw Error(ErrorKind::SingularityError, "zero-variance column in conditioning set");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block);
    if (eig.eigenvalues().minCoeff() < kSingularTolerance) {
        throw Error(ErrorKind::SingularityError, "singular conditioning correlation block");
    }
    const Eigen::MatrixXd solved = eig.eigenvectors() *
                                   eig.eigenvalues().cwiseInverse().asDiagonal() *
                                   eig.eigenvectors().transpose() * cross;
    const Eigen::Matrix2d schur = Eigen::Matrix2d{{1.0, corr(x, y)}, {corr(y, x), 1.0}} -
                                  cross.transpose() * solved;
    if (schur(0, 0) < kSingularTolerance || schur(1, 1) < kSingularTolerance) {
        throw Error(ErrorKind::SingularityError, "variable determined by its conditioning set");
    }
    return schur(0, 1) / std::sqrt(schur(0, 0) * schur(1, 1));
}

}  // namespace

CiResult fisher_z_test(const SampleMoments& moments, Eigen::Index x, Eigen::Index y,
                       std::span<const Eigen::Index> cond, double ci_alpha) {
    if (x == y) throw Error(ErrorKind::InvalidPair, "CI test on a single variable");
    const auto k = static_cast<Eigen::Index>(cond.size());
    if (moments.n <= k + 3) {
        throw Error(ErrorKind::InsufficientData,
                    "CI test needs more than " + std::to_string(k + 3) + " rows");
    }
    // Canonical operand order makes the test exactly symmetric.
    if (y < x) std::swap(x, y);
    std::vector<Eigen::Index> sorted(cond.begin(), cond.end());
    std::sort(sorted.begin(), sorted.end());

    const double r = partial_correlation(moments.correlation, x, y, sorted);
    double p = 0.0;
    if (std::abs(r) < 1.0) {
        const double stat = std::sqrt(static_cast<double>(moments.n - k - 3)) * std::abs(std::atanh(r));
        p = std::erfc(stat / std::sqrt(2.0));
    }
    return {p > ci_alpha, p};
}

CiResult fisher_z_test(const Dataset& data, const VariableId& x, const VariableId& y,
                       const VariableSet& cond, double ci_alpha) {
    if (x == y) throw Error(ErrorKind::InvalidPair, "CI test on a single variable");
    if (cond.contains(x) || cond.contains(y)) {
        throw Error(ErrorKind::InvalidInput, "conditioning set contains a tested variable");
    }
    const SampleMoments moments(data);
    std::vector<Eigen::Index> idx;
    for (const auto& c : cond) idx.push_back(data.index_of(c));
    return fisher_z_test(moments, data.index_of(x), data.index_of(y), idx, ci_alpha);
}

}  // namespace ckh
