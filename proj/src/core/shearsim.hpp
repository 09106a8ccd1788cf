#pragma once

// Linear multi-story shear frame under white-noise story forces, with a
// story-stiffness reduction switched in at a known chunk.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace shmcpd {

struct ShearFrameModel {
    std::vector<double> masses;      // kg, floor 1 .. S
    std::vector<double> stiffnesses; // N/m, story s links floor s-1 to floor s
    double zeta = 0.02;              // modal damping ratio, every mode

    int stories() const noexcept { return static_cast<int>(masses.size()); }
    void validate() const;

    static ShearFrameModel uniform(int stories, double mass, double stiffness, double zeta = 0.02);
};

Eigen::MatrixXd mass_matrix(const ShearFrameModel &model);
Eigen::MatrixXd stiffness_matrix(const ShearFrameModel &model);
// C = M Phi diag(2 zeta omega) Phi^T M with mass-normalized modes Phi.
Eigen::MatrixXd damping_matrix(const ShearFrameModel &model);

// Natural frequencies in Hz, ascending.
std::vector<double> modal_frequencies(const ShearFrameModel &model);

struct DamageScenario {
    std::optional<int> story; // 1-based; empty = undamaged
    double retention = 1.0;   // stiffness retention factor r in (0, 1]
    long lambda_chunk = 1;    // first damaged chunk (1-based)

    bool damaged() const noexcept { return story.has_value() && retention < 1.0; }
    void validate(int stories) const;
};

struct Excitation {
    std::uint64_t seed = 1;
    double intensity = 1000.0;   // force standard deviation per story, N
    double sample_rate = 200.0;  // Hz
    double duration_s = 480.0;
    std::optional<double> stop_after_s; // forcing switched off after this time
    std::optional<double> snr_db = 40.0; // measurement noise; empty = noiseless
};

struct Scenario {
    ShearFrameModel model;
    DamageScenario damage;
    Excitation excitation;
    std::size_t chunk_size = 1600;
    int sensors_per_story = 1;

    void validate() const;
};

struct SensorLabel {
    int id = 0;
    int story = 0;
    std::string position;
};

struct SimulationResult {
    double sample_rate = 0.0;
    std::size_t chunk_size = 0;
    std::vector<SensorLabel> sensors;
    std::vector<std::vector<double>> accelerations; // one channel per sensor
    std::optional<long> lambda_true;
    std::optional<std::size_t> damage_sample;

    std::size_t samples() const noexcept { return accelerations.empty() ? 0 : accelerations.front().size(); }
};

// Deterministic given the scenario (including the seed). Absolute floor
// accelerations from an exact zero-order-hold discretization.
SimulationResult simulate(const Scenario &scenario);

} // namespace shmcpd
