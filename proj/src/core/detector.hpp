#pragma once

// Bayesian change-point posterior with known pre-change (g) and post-change (f)
// Gaussian feature distributions, the thresholded stopping rule and the
// asymptotic delay formula.
//
// The posterior is carried as explicit per-hypothesis log weights:
//   w_k     = ln pi(k) + sum_{n<k} ln g(x_n) + sum_{n>=k} ln f(x_n),   k <= N
//   w_{N+1} = ln P(lambda > N) + sum_{n<=N} ln g(x_n)
// and P(lambda <= N | x) = 1 - exp(w_{N+1} - logsumexp(w)).

#include "core/gaussian.hpp"
#include "core/prior.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace shmcpd {

inline constexpr double kDefaultAlpha = 1e-5;
inline constexpr double kDefaultRho = 1e-5;
// Change hypotheses more than this far (in log weight) below the best change
// hypothesis are dropped; their relative weight can never recover.
inline constexpr double kCompactionGap = 700.0;

struct Hypothesis {
    long change_step = 0;
    double log_weight = 0.0;
};

struct DetectorState {
    int sensor_id = 0;
    long step = 0;
    std::vector<Hypothesis> changes; // change-at-k hypotheses, k ascending
    double log_pre_sum = 0.0;        // sum_{n<=N} ln g(x_n)
    double log_no_change = 0.0;      // w_{N+1}
    double log_evidence = 0.0;       // logsumexp of all weights, i.e. -ln C
    double posterior = 0.0;          // P(lambda <= N | x_1..x_N)
    double ccdf = 1.0;               // 1 - posterior, computed directly
    std::optional<long> detection_time;
};

// Advance `state` by one feature sample (step N -> N+1).
void update(DetectorState &state, const Eigen::Ref<const Eigen::VectorXd> &x, const Gaussian &g, const Gaussian &f,
            const ChangePrior &prior);

// Same update from precomputed ln g(x) and ln f(x).
void update_log(DetectorState &state, double log_g, double log_f, const ChangePrior &prior);

// Latches tau at the first step whose posterior is >= 1 - alpha.
std::optional<long> detect(DetectorState &state, double alpha);

// P(lambda = k | x) for every stored change hypothesis followed by the
// no-change hypothesis (last entry).
std::vector<double> normalized_weights(const DetectorState &state);

struct PosteriorEvaluation {
    double log_evidence = 0.0;  // -ln C
    double log_no_change = 0.0; // w_{N+1}
    double log_change = 0.0;    // logsumexp of w_k, k <= N (-inf when empty)
    double posterior = 0.0;
    double ccdf = 1.0;
};

// Whole-sequence posterior from per-sample log densities (O(N) prefix sums).
PosteriorEvaluation evaluate_posterior(std::span<const double> log_g, std::span<const double> log_f,
                                       const ChangePrior &prior);

// |ln alpha| / (-ln(1 - rho) + kl)
double expected_delay(double alpha, double rho, double kl);

// Convenience wrapper: one sensor, known g and f.
class KnownDetector {
public:
    KnownDetector(Gaussian g, Gaussian f, ChangePrior prior, double alpha = kDefaultAlpha, int sensor_id = 0);

    double update(const Eigen::Ref<const Eigen::VectorXd> &x);

    const DetectorState &state() const noexcept { return state_; }
    double posterior() const noexcept { return state_.posterior; }
    std::optional<long> detection_time() const noexcept { return state_.detection_time; }
    const Gaussian &pre() const noexcept { return g_; }
    const Gaussian &post() const noexcept { return f_; }

private:
    Gaussian g_;
    Gaussian f_;
    ChangePrior prior_;
    double alpha_;
    DetectorState state_;
};

} // namespace shmcpd
