#include "core/adaptive.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace shmcpd {

namespace {

constexpr double kRidgeScale = 1e-6;
constexpr double kRidgeFloor = 1e-9;

void check_stream(std::span<const Eigen::VectorXd> dsfs) {
    if (dsfs.empty())
        fail(ErrorCode::EmptyStream, "feature stream is empty");
    const auto m = dsfs.front().size();
    for (const auto &x : dsfs)
        if (x.size() != m)
            fail(ErrorCode::DimensionMismatch, "feature dimension changes within the stream");
}

struct LogDensities {
    std::vector<double> g;
    std::vector<double> f;
};

LogDensities log_densities(std::span<const Eigen::VectorXd> dsfs, const Gaussian &g, const Gaussian &f) {
    LogDensities out;
    out.g.reserve(dsfs.size());
    out.f.reserve(dsfs.size());
    for (const auto &x : dsfs) {
        out.g.push_back(g.log_density(x));
        out.f.push_back(f.log_density(x));
    }
    return out;
}

} // namespace

double ridge_for(const Eigen::MatrixXd &cov) {
    const double m = static_cast<double>(cov.rows());
    return std::max(kRidgeScale * cov.trace() / m, kRidgeFloor);
}

EstimatorState::EstimatorState(Eigen::Index dim)
    : mean_(Eigen::VectorXd::Zero(dim)), scatter_(Eigen::MatrixXd::Zero(dim, dim)) {
    if (dim < 1)
        fail(ErrorCode::DimensionMismatch, "estimator dimension must be >= 1");
}

void EstimatorState::add(const Eigen::Ref<const Eigen::VectorXd> &x, const ChangePrior &prior) {
    if (x.size() != mean_.size())
        fail(ErrorCode::DimensionMismatch, "feature has dimension " + std::to_string(x.size()) + ", expected " +
                                               std::to_string(mean_.size()));
    ++step_;
    const double w = prior.cdf(step_);
    if (w <= 0.0)
        return;
    weight_sum_ += w;
    const Eigen::VectorXd delta = x - mean_;
    mean_ += (w / weight_sum_) * delta;
    scatter_.noalias() += w * delta * (x - mean_).transpose();
}

GaussianParams EstimatorState::estimate() const {
    if (!(weight_sum_ > 0.0))
        fail(ErrorCode::EmptyStream, "no prior mass on the observed steps yet");
    GaussianParams out;
    out.mean = mean_;
    Eigen::MatrixXd cov = scatter_ / weight_sum_;
    cov = 0.5 * (cov + cov.transpose());
    const double delta = ridge_for(cov);
    cov.diagonal().array() += delta;
    out.cov = std::move(cov);
    return out;
}

GaussianParams estimate_params(std::span<const Eigen::VectorXd> dsfs, const ChangePrior &prior) {
    check_stream(dsfs);
    EstimatorState state(dsfs.front().size());
    for (const auto &x : dsfs)
        state.add(x, prior);
    return state.estimate();
}

GaussianParams fit_predamage(std::span<const Eigen::VectorXd> training, std::optional<std::size_t> min_samples) {
    if (training.empty())
        fail(ErrorCode::InsufficientTraining, "no training features");
    check_stream(training);
    const auto m = training.front().size();
    const std::size_t need = std::max<std::size_t>(2, min_samples.value_or(static_cast<std::size_t>(m) + 1));
    if (training.size() < need)
        fail(ErrorCode::InsufficientTraining, std::to_string(training.size()) + " training vectors for dimension " +
                                                  std::to_string(m) + " (need " + std::to_string(need) + ")");

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (const auto &x : training)
        mean += x;
    mean /= static_cast<double>(training.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
    for (const auto &x : training) {
        const Eigen::VectorXd d = x - mean;
        cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(training.size() - 1);
    cov.diagonal().array() += ridge_for(cov);
    return {std::move(mean), std::move(cov)};
}

double exact_log_posterior(std::span<const Eigen::VectorXd> dsfs, const ChangePrior &prior, const Gaussian &g,
                           const Gaussian &f) {
    check_stream(dsfs);
    const auto ld = log_densities(dsfs, g, f);
    const auto eval = evaluate_posterior(ld.g, ld.f, prior);
    return eval.log_change - eval.log_evidence;
}

double jensen_bound_terms(std::span<const Eigen::VectorXd> dsfs, const ChangePrior &prior, const Gaussian &g,
                          const Gaussian &theta) {
    check_stream(dsfs);
    const auto ld = log_densities(dsfs, g, theta);
    const auto n = static_cast<long>(dsfs.size());
    const double mass = prior.cdf(n);
    if (!(mass > 0.0))
        return -std::numeric_limits<double>::infinity();

    double total_f = 0.0;
    for (double v : ld.f)
        total_f += v;
    double pre_g = 0.0;
    double pre_f = 0.0;
    double expectation = 0.0;
    for (long k = 1; k <= n; ++k) {
        const double pk = prior.mass(k);
        if (pk > 0.0)
            expectation += (pk / mass) * (pre_g + total_f - pre_f);
        pre_g += ld.g[static_cast<std::size_t>(k - 1)];
        pre_f += ld.f[static_cast<std::size_t>(k - 1)];
    }
    return std::log(mass) + expectation;
}

double jensen_lower_bound(std::span<const Eigen::VectorXd> dsfs, const ChangePrior &prior, const Gaussian &g,
                          const Gaussian &theta) {
    check_stream(dsfs);
    const auto ld = log_densities(dsfs, g, theta);
    const double log_c = -evaluate_posterior(ld.g, ld.f, prior).log_evidence;
    return log_c + jensen_bound_terms(dsfs, prior, g, theta);
}

AdaptiveDetector::AdaptiveDetector(Gaussian g, ChangePrior prior, double alpha, int sensor_id, long warmup)
    : g_(std::move(g)), prior_(prior), alpha_(alpha), sensor_id_(sensor_id), warmup_(warmup), estimator_(g_.dim()) {
    if (!(alpha > 0.0 && alpha < 1.0))
        fail(ErrorCode::InvalidArgument, "false-alarm level alpha must lie in (0, 1)");
    if (warmup < 0)
        fail(ErrorCode::InvalidArgument, "warm-up length must be non-negative");
}

AdaptiveStep AdaptiveDetector::update(const Eigen::Ref<const Eigen::VectorXd> &x) {
    const double lg = g_.log_density(x);
    estimator_.add(x, prior_);
    samples_.emplace_back(x);
    log_g_.push_back(lg);

    if (!ready()) {
        last_ = {};
        return last_;
    }

    const Gaussian f(estimator_.estimate());
    log_f_.resize(samples_.size());
    for (std::size_t n = 0; n < samples_.size(); ++n)
        log_f_[n] = f.log_density(samples_[n]);

    const auto eval = evaluate_posterior(log_g_, log_f_, prior_);
    last_ = {eval.posterior, eval.ccdf, true};
    if (!detection_time_ && last_.posterior >= 1.0 - alpha_)
        detection_time_ = step();
    return last_;
}

GaussianParams AdaptiveDetector::estimate() const {
    if (!ready())
        fail(ErrorCode::EstimatesUnready, "adaptive estimate needs at least " + std::to_string(warmup()) +
                                              " samples, have " + std::to_string(step()));
    return estimator_.estimate();
}

} // namespace shmcpd
