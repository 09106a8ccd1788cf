#pragma once

// Damage-sensitive features: per-chunk normalization, least-squares AR
// fitting, AIC order selection and the chunked feature stream.

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace shmcpd {

struct ArModel {
    std::vector<double> coefficients; // gamma_1 .. gamma_p
    double residual_variance = 0.0;   // RSS / (M - p)

    int order() const noexcept { return static_cast<int>(coefficients.size()); }
};

// One feature sample of one sensor at one detector step (1-based).
struct DsfVector {
    int sensor_id = 0;
    long step = 0;
    Eigen::VectorXd values;
};

inline constexpr double kDefaultVarianceFloor = 1e-12;

struct DsfConfig {
    std::size_t chunk_size = 1600;
    int order = 7;
    // 1-based AR coefficient indices; empty selects all `order` coefficients.
    std::vector<int> subset;
    double variance_floor = kDefaultVarianceFloor;

    int dimension() const noexcept { return subset.empty() ? order : static_cast<int>(subset.size()); }
    void validate() const;
};

// Zero mean, unit sample standard deviation (n-1 denominator).
// Throws ZeroVariance when the chunk standard deviation is below `floor`.
std::vector<double> normalize_chunk(std::span<const double> chunk, double floor = kDefaultVarianceFloor);

// Ordinary least squares on lagged regressors over n = p+1..M.
ArModel fit_ar(std::span<const double> normalized, int order);

// AIC(p) = M_eff ln(RSS(p)/M_eff) + 2p for p = 1..p_max, averaged over chunks.
// Every order is regressed on the same window n = p_max+1..M so the residual
// sums are comparable. Chunks are normalized first. Index 0 holds p = 1.
std::vector<double> aic_curve(std::span<const std::vector<double>> chunks, int p_max,
                              double floor = kDefaultVarianceFloor);

// argmin of aic_curve, ties toward smaller p.
int select_order(std::span<const std::vector<double>> chunks, int p_max, double floor = kDefaultVarianceFloor);

// Feature vector of one raw chunk: normalize, fit, project onto the subset.
Eigen::VectorXd chunk_features(std::span<const double> raw_chunk, const DsfConfig &config);

// One DsfVector per complete chunk; a trailing partial chunk is dropped.
std::vector<DsfVector> extract_dsf_stream(std::span<const double> stream, const DsfConfig &config,
                                          int sensor_id = 0);

} // namespace shmcpd
