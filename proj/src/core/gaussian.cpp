#include "core/gaussian.hpp"

#include "core/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace shmcpd {

Gaussian::Gaussian(GaussianParams params, double min_eigenvalue) : params_(std::move(params)) {
    const auto m = params_.mean.size();
    if (m < 1)
        fail(ErrorCode::DimensionMismatch, "Gaussian dimension must be >= 1");
    if (params_.cov.rows() != m || params_.cov.cols() != m)
        fail(ErrorCode::DimensionMismatch, "covariance is " + std::to_string(params_.cov.rows()) + "x" +
                                               std::to_string(params_.cov.cols()) + ", mean has dimension " +
                                               std::to_string(m));
    if (!params_.mean.allFinite() || !params_.cov.allFinite())
        fail(ErrorCode::InvalidArgument, "Gaussian parameters must be finite");

    const double scale = std::max(1.0, params_.cov.cwiseAbs().maxCoeff());
    if ((params_.cov - params_.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        fail(ErrorCode::NotPositiveDefinite, "covariance is not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(params_.cov, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < min_eigenvalue)
        fail(ErrorCode::NotPositiveDefinite, "covariance smallest eigenvalue below floor");

    llt_.compute(params_.cov);
    if (llt_.info() != Eigen::Success)
        fail(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
    log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

double Gaussian::mahalanobis_sq(const Eigen::Ref<const Eigen::VectorXd> &x) const {
    if (x.size() != dim())
        fail(ErrorCode::DimensionMismatch, "point has dimension " + std::to_string(x.size()) + ", expected " +
                                               std::to_string(dim()));
    const Eigen::VectorXd z = llt_.matrixL().solve(x - params_.mean);
    return z.squaredNorm();
}

double Gaussian::log_density(const Eigen::Ref<const Eigen::VectorXd> &x) const {
    constexpr double ln2pi = 1.8378770664093454836; // ln(2 pi)
    return -0.5 * (static_cast<double>(dim()) * ln2pi + log_det_ + mahalanobis_sq(x));
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd> &v) {
    if (v.size() == 0)
        return -std::numeric_limits<double>::infinity();
    const double top = v.maxCoeff();
    if (!std::isfinite(top))
        return top;
    return top + std::log((v.array() - top).exp().sum());
}

} // namespace shmcpd
