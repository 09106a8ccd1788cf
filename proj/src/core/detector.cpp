#include "core/detector.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shmcpd {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        fail(ErrorCode::InvalidArgument, "false-alarm level alpha must lie in (0, 1)");
}

void refresh_posterior(DetectorState &state) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(state.changes.size()) + 1);
    for (std::size_t i = 0; i < state.changes.size(); ++i)
        w(static_cast<Eigen::Index>(i)) = state.changes[i].log_weight;
    w(w.size() - 1) = state.log_no_change;
    state.log_evidence = log_sum_exp(w);
    const double log_ccdf = state.log_no_change - state.log_evidence;
    state.ccdf = std::exp(log_ccdf);
    state.posterior = -std::expm1(log_ccdf);
}

void compact(std::vector<Hypothesis> &changes) {
    if (changes.size() < 2)
        return;
    double top = -std::numeric_limits<double>::infinity();
    for (const auto &h : changes)
        top = std::max(top, h.log_weight);
    std::erase_if(changes, [top](const Hypothesis &h) { return h.log_weight < top - kCompactionGap; });
}

} // namespace

void update_log(DetectorState &state, double log_g, double log_f, const ChangePrior &prior) {
    if (!std::isfinite(log_g) || !std::isfinite(log_f))
        fail(ErrorCode::InvalidArgument, "non-finite log density");

    const long next = state.step + 1;
    for (auto &h : state.changes)
        h.log_weight += log_f;

    // The old no-change hypothesis spawns change-at-(N+1).
    const double spawned = prior.log_mass(next) + state.log_pre_sum + log_f;
    if (std::isfinite(spawned))
        state.changes.push_back({next, spawned});

    state.log_pre_sum += log_g;
    state.log_no_change = prior.log_tail(next) + state.log_pre_sum;
    state.step = next;

    compact(state.changes);
    refresh_posterior(state);
}

void update(DetectorState &state, const Eigen::Ref<const Eigen::VectorXd> &x, const Gaussian &g, const Gaussian &f,
            const ChangePrior &prior) {
    if (g.dim() != f.dim())
        fail(ErrorCode::DimensionMismatch, "pre- and post-change dimensions differ");
    update_log(state, g.log_density(x), f.log_density(x), prior);
}

std::optional<long> detect(DetectorState &state, double alpha) {
    check_alpha(alpha);
    if (!state.detection_time && state.step >= 1 && state.posterior >= 1.0 - alpha)
        state.detection_time = state.step;
    return state.detection_time;
}

std::vector<double> normalized_weights(const DetectorState &state) {
    std::vector<double> out;
    out.reserve(state.changes.size() + 1);
    for (const auto &h : state.changes)
        out.push_back(std::exp(h.log_weight - state.log_evidence));
    out.push_back(std::exp(state.log_no_change - state.log_evidence));
    return out;
}

PosteriorEvaluation evaluate_posterior(std::span<const double> log_g, std::span<const double> log_f,
                                       const ChangePrior &prior) {
    if (log_g.size() != log_f.size())
        fail(ErrorCode::DimensionMismatch, "log-density sequences differ in length");
    const auto n = static_cast<long>(log_g.size());
    if (n == 0)
        fail(ErrorCode::EmptyStream, "posterior needs at least one sample");

    // w_k = ln pi(k) + G_{k-1} + (F_N - F_{k-1}) with prefix sums G, F.
    double total_f = 0.0;
    for (double v : log_f)
        total_f += v;

    Eigen::VectorXd w(n + 1);
    double pre_g = 0.0;
    double pre_f = 0.0;
    Eigen::Index used = 0;
    for (long k = 1; k <= n; ++k) {
        const double wk = prior.log_mass(k) + pre_g + (total_f - pre_f);
        if (std::isfinite(wk))
            w(used++) = wk;
        pre_g += log_g[static_cast<std::size_t>(k - 1)];
        pre_f += log_f[static_cast<std::size_t>(k - 1)];
    }
    PosteriorEvaluation out;
    out.log_no_change = prior.log_tail(n) + pre_g;
    out.log_change = log_sum_exp(w.head(used));
    w(used++) = out.log_no_change;
    out.log_evidence = log_sum_exp(w.head(used));
    const double log_ccdf = out.log_no_change - out.log_evidence;
    out.ccdf = std::exp(log_ccdf);
    out.posterior = -std::expm1(log_ccdf);
    return out;
}

double expected_delay(double alpha, double rho, double kl) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1]");
    if (!(rho >= 0.0 && rho < 1.0))
        fail(ErrorCode::InvalidArgument, "rho must lie in [0, 1)");
    if (!(kl >= 0.0))
        fail(ErrorCode::InvalidArgument, "KL distance must be non-negative");
    const double rate = -std::log1p(-rho) + kl;
    if (!(rate > 0.0))
        fail(ErrorCode::DegenerateDelay, "zero information rate: rho = 0 and KL = 0");
    return std::abs(std::log(alpha)) / rate;
}

KnownDetector::KnownDetector(Gaussian g, Gaussian f, ChangePrior prior, double alpha, int sensor_id)
    : g_(std::move(g)), f_(std::move(f)), prior_(prior), alpha_(alpha) {
    check_alpha(alpha);
    if (g_.dim() != f_.dim())
        fail(ErrorCode::DimensionMismatch, "pre- and post-change dimensions differ");
    state_.sensor_id = sensor_id;
}

double KnownDetector::update(const Eigen::Ref<const Eigen::VectorXd> &x) {
    shmcpd::update(state_, x, g_, f_, prior_);
    detect(state_, alpha_);
    return state_.posterior;
}

} // namespace shmcpd
