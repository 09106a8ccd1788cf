#include "core/shearsim.hpp"

#include "core/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace shmcpd {

namespace {

struct DiscreteSystem {
    Eigen::MatrixXd ad;     // state transition over one sample
    Eigen::MatrixXd bd;     // zero-order-hold input matrix
    Eigen::MatrixXd c_out;  // acceleration from state
    Eigen::MatrixXd d_out;  // acceleration feedthrough (M^-1)
};

DiscreteSystem discretize(const ShearFrameModel &model, double dt) {
    const auto s = static_cast<Eigen::Index>(model.stories());
    const Eigen::MatrixXd m_inv = mass_matrix(model).inverse(); // diagonal
    const Eigen::MatrixXd k = stiffness_matrix(model);
    const Eigen::MatrixXd c = damping_matrix(model);

    // Augmented exponential exp([[A, B], [0, 0]] dt) = [[Ad, Bd], [0, I]].
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(3 * s, 3 * s);
    aug.block(0, s, s, s).setIdentity();
    aug.block(s, 0, s, s) = -m_inv * k;
    aug.block(s, s, s, s) = -m_inv * c;
    aug.block(s, 2 * s, s, s) = m_inv;
    const Eigen::MatrixXd e = (aug * dt).exp();

    DiscreteSystem sys;
    sys.ad = e.topLeftCorner(2 * s, 2 * s);
    sys.bd = e.block(0, 2 * s, 2 * s, s);
    sys.c_out.resize(s, 2 * s);
    sys.c_out << -m_inv * k, -m_inv * c;
    sys.d_out = m_inv;
    return sys;
}

} // namespace

void ShearFrameModel::validate() const {
    if (masses.empty())
        fail(ErrorCode::ConfigError, "shear frame needs at least one story");
    if (masses.size() != stiffnesses.size())
        fail(ErrorCode::ConfigError, "masses and stiffnesses differ in length");
    for (double v : masses)
        if (!(v > 0.0) || !std::isfinite(v))
            fail(ErrorCode::ConfigError, "story masses must be positive");
    for (double v : stiffnesses)
        if (!(v > 0.0) || !std::isfinite(v))
            fail(ErrorCode::ConfigError, "story stiffnesses must be positive");
    if (!(zeta >= 0.0 && zeta < 1.0))
        fail(ErrorCode::ConfigError, "damping ratio must lie in [0, 1)");
}

ShearFrameModel ShearFrameModel::uniform(int stories, double mass, double stiffness, double zeta) {
    if (stories < 1)
        fail(ErrorCode::ConfigError, "shear frame needs at least one story");
    ShearFrameModel model;
    model.masses.assign(static_cast<std::size_t>(stories), mass);
    model.stiffnesses.assign(static_cast<std::size_t>(stories), stiffness);
    model.zeta = zeta;
    return model;
}

Eigen::MatrixXd mass_matrix(const ShearFrameModel &model) {
    model.validate();
    return Eigen::Map<const Eigen::VectorXd>(model.masses.data(), model.stories()).asDiagonal();
}

Eigen::MatrixXd stiffness_matrix(const ShearFrameModel &model) {
    model.validate();
    const int s = model.stories();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(s, s);
    for (int i = 0; i < s; ++i) {
        const double below = model.stiffnesses[static_cast<std::size_t>(i)];
        k(i, i) += below;
        if (i > 0) {
            k(i - 1, i - 1) += below;
            k(i - 1, i) -= below;
            k(i, i - 1) -= below;
        }
    }
    return k;
}

namespace {

Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solve_modes(const ShearFrameModel &model) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(stiffness_matrix(model), mass_matrix(model));
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
        fail(ErrorCode::EigenFailure, "generalized eigenproblem K phi = w^2 M phi failed");
    return eig;
}

} // namespace

Eigen::MatrixXd damping_matrix(const ShearFrameModel &model) {
    const auto eig = solve_modes(model);
    const Eigen::MatrixXd mass = mass_matrix(model);
    const Eigen::MatrixXd &phi = eig.eigenvectors(); // phi^T M phi = I
    const Eigen::VectorXd omega = eig.eigenvalues().cwiseSqrt();
    Eigen::MatrixXd c = mass * phi * (2.0 * model.zeta * omega).asDiagonal() * phi.transpose() * mass;
    return 0.5 * (c + c.transpose());
}

std::vector<double> modal_frequencies(const ShearFrameModel &model) {
    const auto eig = solve_modes(model);
    std::vector<double> hz;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
        hz.push_back(std::sqrt(eig.eigenvalues()(i)) / (2.0 * std::numbers::pi));
    std::sort(hz.begin(), hz.end());
    return hz;
}

void DamageScenario::validate(int stories) const {
    if (!(retention > 0.0 && retention <= 1.0))
        fail(ErrorCode::ConfigError, "stiffness retention must lie in (0, 1]");
    if (story && (*story < 1 || *story > stories))
        fail(ErrorCode::ConfigError, "damaged story " + std::to_string(*story) + " outside 1.." +
                                         std::to_string(stories));
    if (lambda_chunk < 1)
        fail(ErrorCode::ConfigError, "damage chunk index must be >= 1");
}

void Scenario::validate() const {
    model.validate();
    damage.validate(model.stories());
    if (chunk_size < 2)
        fail(ErrorCode::ConfigError, "chunk size must be >= 2");
    if (sensors_per_story < 1)
        fail(ErrorCode::ConfigError, "need at least one sensor per story");
    if (!(excitation.sample_rate > 0.0))
        fail(ErrorCode::ConfigError, "sample rate must be positive");
    if (!(excitation.duration_s > 0.0))
        fail(ErrorCode::ConfigError, "duration must be positive");
    if (!(excitation.intensity >= 0.0))
        fail(ErrorCode::ConfigError, "excitation intensity must be non-negative");
    const auto total = static_cast<std::size_t>(std::llround(excitation.duration_s * excitation.sample_rate));
    if (damage.damaged() && total < static_cast<std::size_t>(damage.lambda_chunk) * chunk_size)
        fail(ErrorCode::ConfigError, "duration " + std::to_string(total) + " samples does not cover damage chunk " +
                                         std::to_string(damage.lambda_chunk) + " of " + std::to_string(chunk_size) +
                                         " samples");
}

SimulationResult simulate(const Scenario &scenario) {
    scenario.validate();
    const auto &ex = scenario.excitation;
    const int stories = scenario.model.stories();
    const double dt = 1.0 / ex.sample_rate;
    const auto total = static_cast<std::size_t>(std::llround(ex.duration_s * ex.sample_rate));

    SimulationResult out;
    out.sample_rate = ex.sample_rate;
    out.chunk_size = scenario.chunk_size;
    for (int s = 1; s <= stories; ++s)
        for (int j = 1; j <= scenario.sensors_per_story; ++j) {
            SensorLabel label;
            label.id = static_cast<int>(out.sensors.size()) + 1;
            label.story = s;
            label.position = scenario.sensors_per_story == 1
                                 ? "story_" + std::to_string(s)
                                 : "story_" + std::to_string(s) + "_" + std::to_string(j);
            out.sensors.push_back(std::move(label));
        }

    const DiscreteSystem healthy = discretize(scenario.model, dt);
    DiscreteSystem damaged;
    std::size_t switch_at = total;
    if (scenario.damage.damaged()) {
        ShearFrameModel broken = scenario.model;
        broken.stiffnesses[static_cast<std::size_t>(*scenario.damage.story - 1)] *= scenario.damage.retention;
        damaged = discretize(broken, dt);
        switch_at = static_cast<std::size_t>(scenario.damage.lambda_chunk - 1) * scenario.chunk_size;
        out.lambda_true = scenario.damage.lambda_chunk;
        out.damage_sample = switch_at;
    }

    std::mt19937_64 force_rng(ex.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const std::size_t forcing_end =
        ex.stop_after_s ? static_cast<std::size_t>(std::llround(*ex.stop_after_s * ex.sample_rate)) : total;

    std::vector<std::vector<double>> floor_acc(static_cast<std::size_t>(stories), std::vector<double>(total));
    Eigen::VectorXd state = Eigen::VectorXd::Zero(2 * stories);
    Eigen::VectorXd force(stories);
    Eigen::VectorXd acc(stories);
    for (std::size_t n = 0; n < total; ++n) {
        const DiscreteSystem &sys = n < switch_at ? healthy : damaged;
        for (int s = 0; s < stories; ++s)
            force(s) = n < forcing_end ? ex.intensity * unit(force_rng) : 0.0;
        acc.noalias() = sys.c_out * state + sys.d_out * force;
        for (int s = 0; s < stories; ++s)
            floor_acc[static_cast<std::size_t>(s)][n] = acc(s);
        state = sys.ad * state + sys.bd * force;
    }

    std::seed_seq noise_seed{static_cast<std::uint32_t>(ex.seed), static_cast<std::uint32_t>(ex.seed >> 32),
                             0x6e6f6973u};
    std::mt19937_64 noise_rng(noise_seed);
    for (const auto &label : out.sensors) {
        std::vector<double> channel = floor_acc[static_cast<std::size_t>(label.story - 1)];
        if (ex.snr_db) {
            double power = 0.0;
            for (double v : channel)
                power += v * v;
            const double rms = total > 0 ? std::sqrt(power / static_cast<double>(total)) : 0.0;
            const double sd = rms * std::pow(10.0, -*ex.snr_db / 20.0);
            for (double &v : channel)
                v += sd * unit(noise_rng);
        }
        out.accelerations.push_back(std::move(channel));
    }
    return out;
}

} // namespace shmcpd
