// Acceptance suite: one PASS/FAIL line per criterion.

#include "core/adaptive.hpp"
#include "core/detector.hpp"
#include "core/dsf.hpp"
#include "core/io.hpp"
#include "core/localization.hpp"
#include "core/pipeline.hpp"
#include "core/shearsim.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace shmcpd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

Gaussian from(const oracle::Normal &n) { return Gaussian({n.mean, n.cov}); }

Gaussian scalar(double mean, double var) {
    return Gaussian({Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, var)});
}

Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------

Outcome posterior_oracle() {
    double worst = 0.0;
    std::uniform_real_distribution<double> rho_dist(1e-4, 0.5);
    for (int seed = 0; seed < 200; ++seed) {
        oracle::Rng rng(1000 + static_cast<std::uint64_t>(seed));
        for (int m : {1, 3}) {
            const auto g = oracle::random_normal(rng, m);
            const auto f = oracle::random_normal(rng, m);
            const double rho = rho_dist(rng);
            const auto prior = ChangePrior::geometric(rho);
            DetectorState state;
            std::vector<Eigen::VectorXd> xs;
            for (int n = 1; n <= 10; ++n) {
                xs.push_back(oracle::draw(rng, n <= 5 ? g : f));
                update(state, xs.back(), from(g), from(f), prior);
                const auto ref = oracle::enumerate_posterior(xs, g, f, rho);
                worst = std::max(worst, std::abs(state.posterior - ref.posterior));
            }
        }
    }
    return {worst < 1e-9, fmt("max |recursive - enumerated| = %.2e (limit 1e-9), 200 seeds x {1,3}-dim x N<=10", worst)};
}

Outcome mle_identity() {
    double worst_moment = 0.0;
    long bound_trials = 0, bound_violations = 0, equality_cases = 0;
    double closest = -INFINITY;
    std::uniform_real_distribution<double> rho_dist(1e-3, 0.3);
    for (int seed = 0; seed < 100; ++seed) {
        oracle::Rng rng(2000 + static_cast<std::uint64_t>(seed));
        const int m = 1 + seed % 3;
        const auto gn = oracle::random_normal(rng, m);
        const auto fn = oracle::random_normal(rng, m);
        const auto g = from(gn);
        const auto prior = ChangePrior::geometric(rho_dist(rng));
        EstimatorState state(m);
        std::vector<Eigen::VectorXd> xs;
        for (int n = 1; n <= 50; ++n) {
            xs.push_back(oracle::draw(rng, n <= 15 ? gn : fn));
            state.add(xs.back(), prior);
            const auto ref = oracle::double_sum_moments(xs, [&](long k) { return prior.mass(k); });
            const auto est = state.estimate();
            const Eigen::MatrixXd cov = est.cov - ridge_for(ref.cov) * Eigen::MatrixXd::Identity(m, m);
            worst_moment = std::max({worst_moment, (est.mean - ref.mean).cwiseAbs().maxCoeff(),
                                     (cov - ref.cov).cwiseAbs().maxCoeff(),
                                     std::abs(state.weight_sum() - ref.denominator)});

            for (const Gaussian &theta : {Gaussian(est), from(fn)}) {
                const double exact = exact_log_posterior(xs, prior, g, theta);
                const double bound = jensen_lower_bound(xs, prior, g, theta);
                ++bound_trials;
                // N = 1 is the equality case; allow round-off only
                bound_violations += bound > exact + 1e-12 * (1.0 + std::abs(exact));
                equality_cases += n == 1;
                if (n > 1)
                    closest = std::max(closest, bound - exact);
            }
        }
    }
    const bool pass = worst_moment < 1e-10 && bound_violations == 0;
    return {pass, fmt("max |incremental - double sum| = %.2e (limit 1e-10); Jensen bound above exact in %ld of %ld "
                      "trials (round-off allowance 1e-12 relative, %ld N=1 equality cases; max bound - exact for "
                      "N>1 = %.2e)",
                      worst_moment, bound_violations, bound_trials, equality_cases, closest)};
}

Outcome kl_monte_carlo() {
    double worst = 0.0;
    for (int instance = 0; instance < 20; ++instance) {
        oracle::Rng rng(3000 + static_cast<std::uint64_t>(instance));
        const auto fn = oracle::random_normal(rng, 3);
        const auto gn = oracle::random_normal(rng, 3);
        const Gaussian f = from(fn), g = from(gn);
        const double kl = kl_gaussian(f, g);
        double acc = 0.0;
        const int samples = 1'000'000;
        for (int s = 0; s < samples; ++s) {
            const auto x = oracle::draw(rng, fn);
            acc += f.log_density(x) - g.log_density(x);
        }
        worst = std::max(worst, std::abs(acc / samples - kl) / kl);
    }
    return {worst < 0.02, fmt("max relative error vs 1e6-sample Monte Carlo = %.3f%% (limit 2%%), 20 instances",
                              100.0 * worst)};
}

Outcome false_alarm() {
    const double alpha = 1e-2;
    const auto prior = ChangePrior::geometric(1e-3);
    const auto g = scalar(0.0, 1.0);
    const auto f = scalar(1.0, 1.0);
    int known_alarms = 0, adaptive_alarms = 0;
    for (int seed = 0; seed < 1000; ++seed) {
        std::mt19937_64 rng(4000 + static_cast<std::uint64_t>(seed));
        std::normal_distribution<double> z;
        KnownDetector known(g, f, prior, alpha);
        AdaptiveDetector adaptive(g, prior, alpha);
        for (int n = 0; n < 200; ++n) {
            const auto x = v1(z(rng));
            known.update(x);
            adaptive.update(x);
        }
        known_alarms += known.detection_time().has_value();
        adaptive_alarms += adaptive.detection_time().has_value();
    }
    const double fk = known_alarms / 1000.0, fa = adaptive_alarms / 1000.0;
    return {fk <= 0.02 && fa <= 0.02,
            fmt("false-alarm fraction known-f %.3f, adaptive %.3f (limit 0.02); alpha=1e-2 rho=1e-3 horizon 200, "
                "1000 seeds",
                fk, fa)};
}

Outcome delay_scaling() {
    // lambda is drawn from the geometric prior, delay = tau - lambda over runs with tau >= lambda.
    const double rho = 0.1;
    const std::vector<double> kls{0.5, 2.0, 8.0};
    const std::vector<double> alphas{1e-2, 1e-4};
    bool pass = true;
    std::string detail;
    std::vector<std::vector<double>> mean(kls.size(), std::vector<double>(alphas.size()));
    for (std::size_t i = 0; i < kls.size(); ++i) {
        const double mu = std::sqrt(2.0 * kls[i]);
        const auto g = scalar(0.0, 1.0);
        const auto f = scalar(mu, 1.0);
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            std::mt19937_64 rng(5000 + 10 * i + j);
            std::normal_distribution<double> z;
            std::geometric_distribution<long> lambda_dist(rho);
            double total = 0.0;
            int counted = 0;
            for (int seed = 0; seed < 500; ++seed) {
                const long lambda = lambda_dist(rng) + 1;
                KnownDetector det(g, f, ChangePrior::geometric(rho), alphas[j]);
                for (long n = 1; !det.detection_time(); ++n)
                    det.update(v1((n >= lambda ? mu : 0.0) + z(rng)));
                const long tau = *det.detection_time();
                if (tau < lambda)
                    continue;
                total += static_cast<double>(tau - lambda);
                ++counted;
            }
            mean[i][j] = total / counted;
            const double predicted = expected_delay(alphas[j], rho, kls[i]);
            const double ratio = mean[i][j] / predicted;
            pass = pass && ratio >= 0.5 && ratio <= 2.0;
            detail += fmt("%s KL=%g a=%g: %.2f/%.2f=%.2f", detail.empty() ? "" : ";", kls[i], alphas[j], mean[i][j],
                          predicted, ratio);
        }
    }
    bool monotone = true;
    for (std::size_t j = 0; j < alphas.size(); ++j)
        for (std::size_t i = 1; i < kls.size(); ++i)
            monotone = monotone && mean[i][j] < mean[i - 1][j];
    for (std::size_t i = 0; i < kls.size(); ++i)
        monotone = monotone && mean[i][1] > mean[i][0];
    return {pass && monotone, "empirical/predicted mean delay within [0.5, 2] and monotone=" +
                                  std::string(monotone ? "yes" : "no") + " (rho=0.1, 500 seeds):" + detail};
}

Outcome adaptive_vs_known() {
    const double alpha = kDefaultAlpha, rho = kDefaultRho;
    const long lambda = 41;
    const auto g = scalar(0.0, 1.0);
    const auto f = scalar(4.0, 1.0);
    std::vector<double> extra;
    int missing = 0;
    for (int seed = 0; seed < 200; ++seed) {
        std::mt19937_64 rng(6000 + static_cast<std::uint64_t>(seed));
        std::normal_distribution<double> z;
        KnownDetector known(g, f, ChangePrior::geometric(rho), alpha);
        AdaptiveDetector adaptive(g, ChangePrior::geometric(rho), alpha);
        for (long n = 1; n <= lambda + 100; ++n) {
            const auto x = v1((n >= lambda ? 4.0 : 0.0) + z(rng));
            known.update(x);
            adaptive.update(x);
        }
        if (!known.detection_time() || !adaptive.detection_time()) {
            ++missing;
            continue;
        }
        extra.push_back(static_cast<double>(*adaptive.detection_time() - *known.detection_time()));
    }
    const double med = extra.empty() ? INFINITY : median(extra);
    const double worst = extra.empty() ? INFINITY : *std::max_element(extra.begin(), extra.end());
    return {missing == 0 && med <= 5.0,
            fmt("median adaptive - known delay = %.1f steps (limit 5), max %.0f, undetected pairs %d; KL=8, "
                "alpha=rho=1e-5, lambda=41, 200 paired seeds",
                med, worst, missing)};
}

struct LocalizationTally {
    int detected = 0;
    int di1_ok = 0;
    int di2_ok = 0;
};

Outcome localization() {
    const int seeds = 100;
    const long lambda = 41;
    const int damaged_story = 2;
    LocalizationTally adaptive, known;
    auto features = [](const std::vector<double> &signal, const DsfConfig &cfg) {
        std::vector<Eigen::VectorXd> out;
        for (const auto &d : extract_dsf_stream(signal, cfg, 0))
            out.push_back(d.values);
        return out;
    };
    auto tally = [&](LocalizationTally &t, const std::vector<SensorResult> &results) {
        const auto report = build_report(results);
        if (!report.detected())
            return;
        ++t.detected;
        t.di1_ok += std::abs(report.ranking_di1.front() - damaged_story) <= 1;
        t.di2_ok += std::abs(report.ranking_di2.front() - damaged_story) <= 1;
    };

    for (int seed = 1; seed <= seeds; ++seed) {
        Scenario test;
        test.model = ShearFrameModel::uniform(4, 1000.0, 2e6);
        test.excitation.seed = 7000 + static_cast<std::uint64_t>(seed);
        test.excitation.duration_s = 60 * 8.0;
        test.damage = {damaged_story, 0.5, lambda};
        Scenario training = test;
        training.damage = {};
        training.excitation.seed += 100000;
        training.excitation.duration_s = 200 * 8.0;
        Scenario post = test;
        post.damage.lambda_chunk = 1;
        post.excitation.seed += 200000;
        post.excitation.duration_s = 200 * 8.0;

        const auto test_sim = simulate(test);
        const auto train_sim = simulate(training);
        const auto post_sim = simulate(post);

        DsfConfig low;
        low.order = 3;
        DsfConfig full;
        full.order = 7;
        std::vector<SensorResult> adaptive_results, known_results;
        for (std::size_t s = 0; s < test_sim.sensors.size(); ++s) {
            const int id = test_sim.sensors[s].id;
            {
                const Gaussian g(fit_predamage(features(train_sim.accelerations[s], low)));
                SensorStream stream(id, low, g, std::nullopt, ChangePrior::geometric(kDefaultRho), kDefaultAlpha,
                                    false, 10);
                stream.push(test_sim.accelerations[s]);
                adaptive_results.push_back(
                    {id, test_sim.sensors[s].position, g.params(), std::nullopt, stream.post_estimate(),
                     stream.detection_time()});
            }
            {
                const Gaussian g(fit_predamage(features(train_sim.accelerations[s], full)));
                const Gaussian f(fit_predamage(features(post_sim.accelerations[s], full)));
                SensorStream stream(id, full, g, f, ChangePrior::geometric(kDefaultRho), kDefaultAlpha);
                stream.push(test_sim.accelerations[s]);
                known_results.push_back(
                    {id, test_sim.sensors[s].position, g.params(), f.params(), std::nullopt, stream.detection_time()});
            }
        }
        tally(adaptive, adaptive_results);
        tally(known, known_results);
    }
    auto frac = [](int num, int den) { return den ? static_cast<double>(num) / den : 0.0; };
    const bool pass = adaptive.detected > 0 && known.detected > 0 && frac(adaptive.di1_ok, adaptive.detected) >= 0.9 &&
                      frac(adaptive.di2_ok, adaptive.detected) >= 0.8 && frac(known.di1_ok, known.detected) >= 0.9 &&
                      frac(known.di2_ok, known.detected) >= 0.8;
    return {pass, fmt("story-2 damage, top sensor at story 1-3: adaptive (p=3) DI1 %d/%d DI2 %d/%d; known-f (p=7) "
                      "DI1 %d/%d DI2 %d/%d (limits 90%% / 80%% of detected runs, 100 seeds)",
                      adaptive.di1_ok, adaptive.detected, adaptive.di2_ok, adaptive.detected, known.di1_ok,
                      known.detected, known.di2_ok, known.detected)};
}

Outcome ar_recovery() {
    const std::vector<double> coef{0.5, -0.3, 0.2};
    int correct = 0;
    double worst = 0.0;
    int within = 0;
    std::vector<double> bias(coef.size(), 0.0);
    for (int seed = 0; seed < 100; ++seed) {
        oracle::Rng rng(8000 + static_cast<std::uint64_t>(seed));
        std::vector<std::vector<double>> chunks;
        for (int c = 0; c < 10; ++c)
            chunks.push_back(oracle::ar_process(rng, coef, 1600));
        correct += select_order(chunks, 20) == 3;

        const auto x = oracle::ar_process(rng, coef, 10000);
        const auto fit = fit_ar(normalize_chunk(x), 3);
        double err = 0.0;
        for (std::size_t j = 0; j < coef.size(); ++j) {
            err = std::max(err, std::abs(fit.coefficients[j] - coef[j]));
            bias[j] += (fit.coefficients[j] - coef[j]) / 100.0;
        }
        worst = std::max(worst, err);
        within += err <= 0.03;
    }
    const double max_bias = std::max({std::abs(bias[0]), std::abs(bias[1]), std::abs(bias[2])});
    return {correct >= 95 && within >= 95 && max_bias < 0.005,
            fmt("AIC picks order 3 in %d/100 seeds (limit 95; 10 chunks of 1600); fit_ar at M=1e4 within 0.03 in "
                "%d/100 seeds (limit 95, max error %.4f), mean bias %.4f (limit 0.005)",
                correct, within, worst, max_bias)};
}

Outcome shear_frame() {
    double worst = 0.0;
    for (int stories = 1; stories <= 8; ++stories)
        for (double ratio : {1.0, 100.0, 2000.0, 50000.0}) {
            const auto f = modal_frequencies(ShearFrameModel::uniform(stories, 1000.0, 1000.0 * ratio));
            const auto ref = oracle::uniform_shear_frequencies(stories, 1000.0, 1000.0 * ratio);
            for (std::size_t j = 0; j < f.size(); ++j)
                worst = std::max(worst, std::abs(f[j] - ref[j]));
        }
    int configs = 0, lowered = 0;
    oracle::Rng rng(9000);
    std::uniform_real_distribution<double> u(0.3, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int stories = 1 + trial % 8;
        ShearFrameModel model;
        for (int s = 0; s < stories; ++s) {
            model.masses.push_back(1000.0 * u(rng));
            model.stiffnesses.push_back(1e6 * u(rng));
        }
        const double f1 = modal_frequencies(model).front();
        for (int s = 0; s < stories; ++s)
            for (double r : {0.9, 0.5, 0.1}) {
                auto damaged = model;
                damaged.stiffnesses[static_cast<std::size_t>(s)] *= r;
                ++configs;
                lowered += modal_frequencies(damaged).front() < f1;
            }
    }
    return {worst < 1e-9 && lowered == configs,
            fmt("max |f - closed form| = %.2e Hz (limit 1e-9), 1-8 stories; stiffness reduction lowered f1 in %d/%d "
                "configurations",
                worst, lowered, configs)};
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / ("shmcpd_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    const nlohmann::json scenario = {
        {"stories", 4},
        {"masses", 1000.0},
        {"stiffnesses", 2e6},
        {"damage", {{"story", 3}, {"r", 0.6}, {"lambda_chunk", 12}}},
        {"excitation", {{"seed", 21}, {"duration_s", 25 * 8.0}}},
        {"training", {{"seed", 22}, {"duration_s", 60 * 8.0}}},
        {"post_training", {{"seed", 23}, {"duration_s", 60 * 8.0}}}};
    gen(scenario, dir / "data");

    const std::vector<std::string> files{"summary.json", "report.json", "trace.csv", "dsf.csv", "estimates.csv"};
    int compared = 0, identical = 0;
    for (auto mode : {DetectionMode::Adaptive, DetectionMode::KnownPost}) {
        PipelineConfig cfg;
        cfg.input = dir / "data" / "signals.csv";
        cfg.training = dir / "data" / "training.csv";
        cfg.post_training = dir / "data" / "post_training.csv";
        cfg.meta = dir / "data" / "meta.json";
        cfg.mode = mode;
        cfg.order.reset();
        cfg.p_max = 10;
        cfg.write_dsf = true;
        cfg.write_estimates = true;
        const std::string tag = mode == DetectionMode::Adaptive ? "adaptive" : "known";
        cfg.output_dir = dir / (tag + "_1");
        cfg.threads = 1;
        run(cfg);
        cfg.output_dir = dir / (tag + "_2");
        cfg.threads = 4;
        run(cfg);
        for (const auto &file : files) {
            const auto a = dir / (tag + "_1") / file;
            if (!fs::exists(a))
                continue;
            ++compared;
            identical += read_text_file(a) == read_text_file(dir / (tag + "_2") / file);
        }
    }
    fs::remove_all(dir);
    return {compared >= 9 && identical == compared,
            fmt("%d/%d output files byte-identical across repeated runs (1 vs 4 worker threads, both modes)", identical,
                compared)};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char *name;
        std::function<Outcome()> check;
        double time_limit_s;
    };
    const std::vector<Criterion> criteria{
        {1, "posterior oracle equivalence", posterior_oracle, 10.0},
        {2, "MLE identity and Jensen bound", mle_identity, 0.0},
        {3, "KL correctness", kl_monte_carlo, 30.0},
        {4, "false-alarm rate", false_alarm, 0.0},
        {5, "delay scaling", delay_scaling, 120.0},
        {6, "adaptive vs known delay", adaptive_vs_known, 0.0},
        {7, "localization pattern", localization, 0.0},
        {8, "AR/AIC recovery", ar_recovery, 0.0},
        {9, "shear-frame oracle", shear_frame, 0.0},
        {10, "determinism", determinism, 0.0},
    };
    int failed = 0;
    for (const auto &c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.check();
        } catch (const std::exception &e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = fmt("%.1f s", secs);
        if (c.time_limit_s > 0.0) {
            timing += fmt(" (limit %.0f s)", c.time_limit_s);
            outcome.pass = outcome.pass && secs < c.time_limit_s;
        }
        failed += !outcome.pass;
        std::printf("criterion %2d %s: %s - %s [%s]\n", c.id, outcome.pass ? "PASS" : "FAIL", c.name,
                    outcome.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
