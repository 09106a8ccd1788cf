#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace shmcpd {

inline constexpr double kMinEigenvalue = 1e-10;

struct GaussianParams {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    Eigen::Index dim() const noexcept { return mean.size(); }
};

// Validated multivariate normal with a cached Cholesky factor. Construction
// rejects asymmetric covariances and ones whose smallest eigenvalue is below
// `min_eigenvalue`.
class Gaussian {
public:
    explicit Gaussian(GaussianParams params, double min_eigenvalue = kMinEigenvalue);

    const GaussianParams &params() const noexcept { return params_; }
    const Eigen::VectorXd &mean() const noexcept { return params_.mean; }
    const Eigen::MatrixXd &cov() const noexcept { return params_.cov; }
    Eigen::Index dim() const noexcept { return params_.mean.size(); }

    const Eigen::LLT<Eigen::MatrixXd> &llt() const noexcept { return llt_; }
    double log_det() const noexcept { return log_det_; }

    // ln N(x; mu, Sigma) through the triangular factor.
    double log_density(const Eigen::Ref<const Eigen::VectorXd> &x) const;

    // (x - mu)^T Sigma^-1 (x - mu)
    double mahalanobis_sq(const Eigen::Ref<const Eigen::VectorXd> &x) const;

private:
    GaussianParams params_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double log_det_ = 0.0;
};

inline double log_density(const Gaussian &g, const Eigen::Ref<const Eigen::VectorXd> &x) { return g.log_density(x); }

// Numerically stable ln(sum exp(v)); -inf for an empty or all -inf input.
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd> &v);

} // namespace shmcpd
