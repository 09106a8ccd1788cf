#pragma once

#include "core/gaussian.hpp"

#include <optional>
#include <string>
#include <vector>

namespace shmcpd {

// D_KL(f || g) for multivariate normals, through Cholesky factors of both
// covariances. Tiny negative round-off is clamped to 0.
double kl_gaussian(const Gaussian &f, const Gaussian &g);

struct SensorResult {
    int id = 0;
    std::string position;
    std::optional<GaussianParams> pre;        // g
    std::optional<GaussianParams> post_known; // f, when supplied
    std::optional<GaussianParams> post_estimate;
    std::optional<long> detection_time;
};

struct SensorIndices {
    int id = 0;
    std::string position;
    std::optional<double> di1; // KL distance, nats
    std::optional<long> di2;   // detection step
    int rank_di1 = 0;          // 1-based
    int rank_di2 = 0;
};

struct LocalizationReport {
    std::vector<SensorIndices> sensors; // input order
    std::vector<int> ranking_di1;       // sensor ids, best first
    std::vector<int> ranking_di2;

    bool detected() const;
};

// DI1 uses the known post-change distribution when supplied, the adaptive
// estimate otherwise. DI1 ranks descending, DI2 ascending; sensors without a
// value go last; ties break by ascending sensor id.
LocalizationReport build_report(const std::vector<SensorResult> &results);

// Ranking of precomputed indices with the same ordering rules.
std::vector<int> rank_descending(const std::vector<int> &ids, const std::vector<std::optional<double>> &values);
std::vector<int> rank_ascending(const std::vector<int> &ids, const std::vector<std::optional<long>> &values);

} // namespace shmcpd
