#pragma once

// Maximum-likelihood estimation of an unknown post-change distribution and
// the adaptive detector built on it.
//
// With Pi(n) = sum_{k<=n} pi(k), the prior-weighted estimates
//   mu_1    = sum_k pi(k) sum_{n>=k} x_n / sum_k pi(k)(N-k+1)
//   Sigma_1 = sum_k pi(k) sum_{n>=k} (x_n-mu_1)(x_n-mu_1)^T / (same)
// collapse to Pi(n)-weighted sample moments, which are accumulated online.

#include "core/detector.hpp"
#include "core/gaussian.hpp"
#include "core/prior.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

namespace shmcpd {

// delta = max(1e-6 * trace(cov) / m, 1e-9)
double ridge_for(const Eigen::MatrixXd &cov);

// Pi(n)-weighted running mean and scatter (weighted Welford update).
class EstimatorState {
public:
    explicit EstimatorState(Eigen::Index dim);

    void add(const Eigen::Ref<const Eigen::VectorXd> &x, const ChangePrior &prior);

    long step() const noexcept { return step_; }
    double weight_sum() const noexcept { return weight_sum_; }
    const Eigen::VectorXd &mean() const noexcept { return mean_; }
    // Weighted scatter sum_n Pi(n)(x_n - mu)(x_n - mu)^T, no normalization.
    const Eigen::MatrixXd &scatter() const noexcept { return scatter_; }

    // Current (mu_1, Sigma_1 + delta I). Throws EmptyStream when no prior mass
    // has been observed yet.
    GaussianParams estimate() const;

private:
    long step_ = 0;
    double weight_sum_ = 0.0;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd scatter_;
};

GaussianParams estimate_params(std::span<const Eigen::VectorXd> dsfs, const ChangePrior &prior);

// Sample mean and unbiased covariance of undamaged training features, ridge
// regularized. Requires at least `min_samples` vectors (default m + 1).
GaussianParams fit_predamage(std::span<const Eigen::VectorXd> training, std::optional<std::size_t> min_samples = {});

// ln P(lambda <= N | x) under (g, f).
double exact_log_posterior(std::span<const Eigen::VectorXd> dsfs, const ChangePrior &prior, const Gaussian &g,
                           const Gaussian &f);

// Jensen expectation of the per-hypothesis log likelihoods over the prior
// restricted to k = 1..N (renormalized, plus ln of its mass), without ln C.
double jensen_bound_terms(std::span<const Eigen::VectorXd> dsfs, const ChangePrior &prior, const Gaussian &g,
                          const Gaussian &theta);

// ln C + jensen_bound_terms, with ln C from the exact posterior on the same
// data under theta. Never exceeds exact_log_posterior.
double jensen_lower_bound(std::span<const Eigen::VectorXd> dsfs, const ChangePrior &prior, const Gaussian &g,
                          const Gaussian &theta);

struct AdaptiveStep {
    double posterior = 0.0;
    double ccdf = 1.0;
    bool ready = false;
};

// Change detection with known g and estimated f. Every step refreshes the
// estimate and recomputes the posterior over all stored samples with that
// single frozen estimate. Detection stays suppressed during the warm-up,
// which lasts max(m + 1, warmup) steps.
class AdaptiveDetector {
public:
    AdaptiveDetector(Gaussian g, ChangePrior prior, double alpha = kDefaultAlpha, int sensor_id = 0, long warmup = 0);

    AdaptiveStep update(const Eigen::Ref<const Eigen::VectorXd> &x);

    long step() const noexcept { return static_cast<long>(samples_.size()); }
    long warmup() const noexcept { return std::max<long>(static_cast<long>(dim()) + 1, warmup_); }
    bool ready() const noexcept { return step() >= warmup(); }
    Eigen::Index dim() const noexcept { return g_.dim(); }
    int sensor_id() const noexcept { return sensor_id_; }

    double posterior() const noexcept { return last_.posterior; }
    double ccdf() const noexcept { return last_.ccdf; }
    std::optional<long> detection_time() const noexcept { return detection_time_; }
    const Gaussian &pre() const noexcept { return g_; }

    // Throws EstimatesUnready before the warm-up completes.
    GaussianParams estimate() const;
    const EstimatorState &estimator() const noexcept { return estimator_; }

private:
    Gaussian g_;
    ChangePrior prior_;
    double alpha_;
    int sensor_id_;
    long warmup_;
    std::vector<Eigen::VectorXd> samples_;
    std::vector<double> log_g_;
    std::vector<double> log_f_;
    EstimatorState estimator_;
    AdaptiveStep last_;
    std::optional<long> detection_time_;
};

} // namespace shmcpd
