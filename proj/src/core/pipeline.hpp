#pragma once

// End-to-end orchestration: raw signals -> features -> per-sensor detection
// -> localization report, plus scenario generation and run summaries.

#include "core/adaptive.hpp"
#include "core/detector.hpp"
#include "core/dsf.hpp"
#include "core/localization.hpp"
#include "core/shearsim.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace shmcpd {

enum class DetectionMode { KnownPost, Adaptive };

struct PipelineConfig {
    std::size_t chunk_size = 1600;
    std::optional<int> order = 7; // empty selects the order by AIC on training data
    int p_max = 20;
    std::vector<int> subset;
    double alpha = kDefaultAlpha;
    double rho = kDefaultRho;
    DetectionMode mode = DetectionMode::Adaptive;
    long warmup = 0; // adaptive mode: steps before detection; 0 means m + 1
    std::filesystem::path input;
    std::filesystem::path training;
    std::filesystem::path post_training; // known mode: data of the damaged state
    std::filesystem::path output_dir;
    std::filesystem::path meta;          // optional scenario metadata from `gen`
    std::map<int, std::string> positions;
    std::optional<long> lambda_true;
    bool write_dsf = false;
    bool write_estimates = false;
    unsigned threads = 0; // 0 = hardware concurrency

    void validate() const;
};

PipelineConfig pipeline_config_from_json(const nlohmann::json &j);
nlohmann::json to_json(const PipelineConfig &config);

Scenario scenario_from_json(const nlohmann::json &j);

struct TracePoint {
    long step = 0;
    double posterior = 0.0;
    double ccdf = 1.0;
};

struct EstimatePoint {
    long step = 0;
    GaussianParams params;
};

// One sensor's streaming chain. Samples may arrive in arbitrary pieces; a
// detector step happens whenever a chunk completes.
class SensorStream {
public:
    SensorStream(int sensor_id, DsfConfig dsf, Gaussian pre, std::optional<Gaussian> post, ChangePrior prior,
                 double alpha, bool keep_estimates = false, long warmup = 0);

    void push(std::span<const double> samples);

    int sensor_id() const noexcept { return sensor_id_; }
    const std::vector<TracePoint> &trace() const noexcept { return trace_; }
    const std::vector<DsfVector> &features() const noexcept { return features_; }
    const std::vector<EstimatePoint> &estimates() const noexcept { return estimates_; }
    std::optional<long> detection_time() const;
    // Adaptive mode only, once the warm-up has completed.
    std::optional<GaussianParams> post_estimate() const;
    std::optional<GaussianParams> post_known() const;
    const Gaussian &pre() const;

private:
    void step(const Eigen::VectorXd &x);

    int sensor_id_;
    DsfConfig dsf_;
    std::variant<KnownDetector, AdaptiveDetector> detector_;
    bool keep_estimates_;
    std::vector<double> buffer_;
    std::vector<DsfVector> features_;
    std::vector<TracePoint> trace_;
    std::vector<EstimatePoint> estimates_;
};

struct SensorOutcome {
    int sensor_id = 0;
    std::string position;
    std::optional<std::string> error;
    std::optional<long> detection_time;
    std::vector<TracePoint> trace;
    std::vector<DsfVector> features;
    std::vector<EstimatePoint> estimates;
    std::optional<GaussianParams> pre;
    std::optional<GaussianParams> post_known;
    std::optional<GaussianParams> post_estimate;
};

struct RunResult {
    int exit_code = 0; // 0 no damage, 2 damage detected
    int order = 0;
    std::vector<SensorOutcome> sensors;
    LocalizationReport report;
    nlohmann::json summary_json;
    nlohmann::json report_json;
};

inline constexpr int kExitNoDamage = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitDamage = 2;

// Runs the full chain and writes summary.json, report.json, trace.csv (and
// dsf.csv / estimates.csv when enabled) into config.output_dir when it is set.
RunResult run(const PipelineConfig &config);

// Simulates the scenario and writes signals.csv and meta.json, plus
// training.csv / post_training.csv when the scenario asks for them.
nlohmann::json gen(const nlohmann::json &scenario, const std::filesystem::path &out_dir);

// Reads a run directory, writes ccdf_plot.csv next to it and returns a
// human-readable table.
std::string report(const std::filesystem::path &run_dir);

} // namespace shmcpd
