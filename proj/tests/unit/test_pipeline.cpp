#include "core/io.hpp"
#include "core/pipeline.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>

using namespace shmcpd;
using testutil::code_of;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string &name) {
    static std::atomic<int> counter{0};
    const auto dir = fs::temp_directory_path() /
                     ("shmcpd_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + "_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

nlohmann::json scenario(bool damaged) {
    nlohmann::json j = {{"stories", 4},
                        {"masses", 1000.0},
                        {"stiffnesses", 2e6},
                        {"zeta", 0.02},
                        {"chunk_size", 1600},
                        {"excitation", {{"seed", 7}, {"intensity", 1000.0}, {"fs", 200.0}, {"duration_s", 240.0}}},
                        {"training", {{"seed", 8}, {"duration_s", 800.0}}}};
    if (damaged) {
        j["damage"] = {{"story", 2}, {"r", 0.5}, {"lambda_chunk", 16}};
        j["post_training"] = {{"seed", 9}, {"duration_s", 800.0}};
    }
    return j;
}

PipelineConfig config_for(const fs::path &data, const fs::path &out) {
    PipelineConfig c;
    c.input = data / "signals.csv";
    c.training = data / "training.csv";
    c.meta = data / "meta.json";
    c.output_dir = out;
    c.order = 3;
    c.warmup = 10;
    return c;
}

std::vector<double> sample_signal(std::uint64_t seed, std::size_t n) {
    oracle::Rng rng(seed);
    return oracle::ar_process(rng, {0.6, -0.3}, n);
}

} // namespace

TEST_CASE("SensorStream: piecewise pushes equal a single pass") {
    const auto signal = sample_signal(1, 1600 * 25);
    const auto prior = ChangePrior::geometric(0.01);
    DsfConfig cfg;
    cfg.order = 3;
    const Gaussian g({Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3) * 0.01});

    SensorStream whole(1, cfg, g, std::nullopt, prior, 1e-5, true);
    whole.push(signal);
    SensorStream pieces(1, cfg, g, std::nullopt, prior, 1e-5, true);
    oracle::Rng rng(2);
    std::uniform_int_distribution<std::size_t> len(1, 4000);
    for (std::size_t pos = 0; pos < signal.size();) {
        const auto n = std::min(len(rng), signal.size() - pos);
        pieces.push(std::span(signal).subspan(pos, n));
        pos += n;
    }
    REQUIRE(whole.trace().size() == 25);
    REQUIRE(pieces.trace().size() == 25);
    for (std::size_t i = 0; i < 25; ++i) {
        CHECK(whole.trace()[i].posterior == pieces.trace()[i].posterior);
        CHECK(whole.features()[i].values == pieces.features()[i].values);
    }
    CHECK(whole.detection_time() == pieces.detection_time());
    CHECK(whole.estimates().size() == pieces.estimates().size());
}

TEST_CASE("SensorStream: known mode with the adaptive estimate reproduces the adaptive posterior") {
    auto signal = sample_signal(3, 1600 * 10);
    const auto after = [] {
        oracle::Rng rng(4);
        return oracle::ar_process(rng, {0.2, 0.4}, 1600 * 20);
    }();
    signal.insert(signal.end(), after.begin(), after.end());
    DsfConfig cfg;
    cfg.order = 2;
    const auto train = extract_dsf_stream(sample_signal(5, 1600 * 30), cfg, 1);
    std::vector<Eigen::VectorXd> tv;
    for (const auto &d : train)
        tv.push_back(d.values);
    const Gaussian g(fit_predamage(tv));
    const auto prior = ChangePrior::geometric(1e-3);

    SensorStream adaptive(1, cfg, g, std::nullopt, prior, 1e-5);
    adaptive.push(signal);
    const auto est = adaptive.post_estimate();
    REQUIRE(est.has_value());
    SensorStream known(1, cfg, g, Gaussian(*est), prior, 1e-5);
    known.push(signal);
    CHECK(std::abs(known.trace().back().posterior - adaptive.trace().back().posterior) < 1e-9);
    CHECK(std::abs(known.trace().back().ccdf - adaptive.trace().back().ccdf) < 1e-9);
    CHECK(adaptive.detection_time().has_value());
}

TEST_CASE("run: undamaged scenario reports no damage") {
    const auto data = fresh_dir("undamaged");
    gen(scenario(false), data);
    const auto out = data / "run";
    const auto r = run(config_for(data, out));
    CHECK(r.exit_code == kExitNoDamage);
    CHECK_FALSE(r.report.detected());
    for (const auto &s : r.report.sensors)
        CHECK_FALSE(s.di2.has_value());
    CHECK(fs::exists(out / "summary.json"));
    CHECK(fs::exists(out / "trace.csv"));
    fs::remove_all(data);
}

TEST_CASE("run: damaged scenario is detected, deterministically, in both modes") {
    const auto data = fresh_dir("damaged");
    const auto meta = gen(scenario(true), data);
    CHECK(meta.at("lambda_true") == 16);
    CHECK(fs::exists(data / "post_training.csv"));

    auto cfg = config_for(data, data / "a");
    cfg.write_dsf = true;
    cfg.write_estimates = true;
    const auto a = run(cfg);
    CHECK(a.exit_code == kExitDamage);
    bool any_delay = false;
    for (const auto &s : a.summary_json.at("sensors")) {
        CHECK(s.at("lambda_true") == 16);
        if (s.contains("delay")) {
            any_delay = true;
            CHECK(s.at("delay").get<long>() == s.at("tau").get<long>() - 16);
        }
    }
    CHECK(any_delay);

    cfg.output_dir = data / "b";
    run(cfg);
    for (const char *file : {"summary.json", "report.json", "trace.csv", "dsf.csv", "estimates.csv"})
        CHECK(read_text_file(data / "a" / file) == read_text_file(data / "b" / file));

    auto known = config_for(data, data / "k");
    known.mode = DetectionMode::KnownPost;
    known.post_training = data / "post_training.csv";
    known.order = 7;
    const auto k = run(known);
    CHECK(k.exit_code == kExitDamage);
    CHECK(k.report.ranking_di1.size() == 4);

    const auto table = report(data / "a");
    CHECK(table.find("story_2") != std::string::npos);
    const auto plot = read_text_file(data / "a" / "ccdf_plot.csv");
    CHECK(plot.rfind("step,threshold,lambda_marker,sensor_1", 0) == 0);
    fs::remove_all(data);
}

TEST_CASE("run: automatic order selection and per-sensor failures") {
    const auto data = fresh_dir("auto");
    gen(scenario(false), data);
    auto cfg = config_for(data, {});
    cfg.order.reset();
    cfg.p_max = 10;
    const auto r = run(cfg);
    CHECK(r.order >= 1);
    CHECK(r.order <= 10);

    // a constant column fails one sensor without stopping the others
    auto table = read_signal_csv(data / "signals.csv");
    std::fill(table.columns[0].begin(), table.columns[0].end(), 0.0);
    std::ofstream(data / "flat.csv") << [&] {
        std::ostringstream s;
        write_signal_csv(s, table);
        return s.str();
    }();
    cfg.order = 7;
    cfg.input = data / "flat.csv";
    const auto partial = run(cfg);
    REQUIRE(partial.sensors[0].error.has_value());
    CHECK(partial.sensors[0].error->find("ZeroVariance") != std::string::npos);
    CHECK_FALSE(partial.sensors[1].error.has_value());
    fs::remove_all(data);
}

TEST_CASE("run: malformed input cites the row") {
    const auto data = fresh_dir("malformed");
    gen(scenario(false), data);
    std::ofstream(data / "bad.csv") << "time,sensor_1,sensor_2,sensor_3,sensor_4\n0,1,2,3,4\n0.005,1,2,x,4\n";
    auto cfg = config_for(data, {});
    cfg.input = data / "bad.csv";
    try {
        run(cfg);
        FAIL("expected a parse error");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    fs::remove_all(data);
}

TEST_CASE("PipelineConfig: validation and JSON") {
    PipelineConfig c;
    c.input = "in.csv";
    c.training = "train.csv";
    c.validate();
    const auto round = pipeline_config_from_json(to_json(c));
    CHECK(round.alpha == c.alpha);
    CHECK(round.order == c.order);
    CHECK(round.input == c.input);

    auto bad = c;
    bad.alpha = 1.0;
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::ConfigError);
    bad = c;
    bad.training.clear();
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::ConfigError);
    bad = c;
    bad.mode = DetectionMode::KnownPost;
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::ConfigError);
    bad = c;
    bad.chunk_size = 8;
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::ConfigError);
    bad = c;
    bad.warmup = -1;
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { pipeline_config_from_json({{"mode", "psychic"}}); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { scenario_from_json({{"stories", 0}}); }) == ErrorCode::ConfigError);
}
