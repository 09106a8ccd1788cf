#include "core/dsf.hpp"

#include "core/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace shmcpd {

namespace {

struct LeastSquares {
    Eigen::VectorXd coefficients;
    double rss = 0.0;
    std::size_t rows = 0;
};

// Regress x[n] on x[n-1..n-p] for n = first..M-1 (0-based).
LeastSquares regress_lags(std::span<const double> x, int order, std::size_t first) {
    const std::size_t m = x.size();
    const auto p = static_cast<std::size_t>(order);
    const std::size_t rows = m - first;
    Eigen::MatrixXd design(rows, p);
    Eigen::VectorXd target(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t n = first + r;
        target(r) = x[n];
        for (std::size_t j = 0; j < p; ++j)
            design(r, j) = x[n - j - 1];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    // Absolute guard as well: an all-zero design has rank 0 but a relative
    // threshold on a zero pivot is meaningless.
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(p) || qr.maxPivot() < 1e-300)
        fail(ErrorCode::SingularDesign,
             "lag regressor matrix is rank-deficient (rank " + std::to_string(qr.rank()) + " < " +
                 std::to_string(p) + ")");

    LeastSquares out;
    out.coefficients = qr.solve(target);
    out.rss = (target - design * out.coefficients).squaredNorm();
    out.rows = rows;
    return out;
}

} // namespace

void DsfConfig::validate() const {
    if (order < 1)
        fail(ErrorCode::ConfigError, "AR order must be >= 1");
    if (chunk_size < static_cast<std::size_t>(order) + 2)
        fail(ErrorCode::ConfigError, "chunk size must exceed AR order + 1");
    if (!(variance_floor >= 0.0))
        fail(ErrorCode::ConfigError, "variance floor must be non-negative");
    std::vector<int> seen;
    for (int idx : subset) {
        if (idx < 1 || idx > order)
            fail(ErrorCode::ConfigError, "coefficient index " + std::to_string(idx) + " outside 1.." +
                                             std::to_string(order));
        if (std::find(seen.begin(), seen.end(), idx) != seen.end())
            fail(ErrorCode::ConfigError, "duplicate coefficient index " + std::to_string(idx));
        seen.push_back(idx);
    }
}

std::vector<double> normalize_chunk(std::span<const double> chunk, double floor) {
    const std::size_t n = chunk.size();
    if (n < 2)
        fail(ErrorCode::InvalidArgument, "chunk needs at least 2 samples");

    const double mean = std::accumulate(chunk.begin(), chunk.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : chunk)
        ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd >= floor) || sd == 0.0)
        fail(ErrorCode::ZeroVariance, "chunk standard deviation below floor (dead or saturated sensor)");

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = (chunk[i] - mean) / sd;

    // One correction pass removes the rounding left by the first.
    const double residual_mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(n);
    double ss2 = 0.0;
    for (double &v : out) {
        v -= residual_mean;
        ss2 += v * v;
    }
    const double scale = 1.0 / std::sqrt(ss2 / static_cast<double>(n - 1));
    for (double &v : out)
        v *= scale;
    return out;
}

ArModel fit_ar(std::span<const double> normalized, int order) {
    if (order < 1)
        fail(ErrorCode::InvalidArgument, "AR order must be >= 1");
    if (normalized.size() <= static_cast<std::size_t>(order) + 1)
        fail(ErrorCode::InvalidArgument, "sequence length must exceed AR order + 1");

    const auto fit = regress_lags(normalized, order, static_cast<std::size_t>(order));
    ArModel model;
    model.coefficients.assign(fit.coefficients.data(), fit.coefficients.data() + fit.coefficients.size());
    model.residual_variance = fit.rss / static_cast<double>(fit.rows);
    return model;
}

std::vector<double> aic_curve(std::span<const std::vector<double>> chunks, int p_max, double floor) {
    if (p_max < 1)
        fail(ErrorCode::InvalidArgument, "p_max must be >= 1");
    if (chunks.empty())
        fail(ErrorCode::EmptyStream, "order selection needs at least one chunk");

    std::vector<double> curve(static_cast<std::size_t>(p_max), 0.0);
    for (const auto &raw : chunks) {
        if (raw.size() <= static_cast<std::size_t>(p_max) + 1)
            fail(ErrorCode::InvalidArgument, "chunk length must exceed p_max + 1");
        const auto x = normalize_chunk(raw, floor);
        for (int p = 1; p <= p_max; ++p) {
            const auto fit = regress_lags(x, p, static_cast<std::size_t>(p_max));
            const double m_eff = static_cast<double>(fit.rows);
            curve[static_cast<std::size_t>(p - 1)] += m_eff * std::log(fit.rss / m_eff) + 2.0 * p;
        }
    }
    for (double &v : curve)
        v /= static_cast<double>(chunks.size());
    return curve;
}

int select_order(std::span<const std::vector<double>> chunks, int p_max, double floor) {
    const auto curve = aic_curve(chunks, p_max, floor);
    // min_element returns the first minimum, which is the smallest order.
    return static_cast<int>(std::min_element(curve.begin(), curve.end()) - curve.begin()) + 1;
}

Eigen::VectorXd chunk_features(std::span<const double> raw_chunk, const DsfConfig &config) {
    const auto model = fit_ar(normalize_chunk(raw_chunk, config.variance_floor), config.order);
    if (config.subset.empty())
        return Eigen::Map<const Eigen::VectorXd>(model.coefficients.data(), model.order());

    std::vector<int> idx = config.subset;
    std::sort(idx.begin(), idx.end());
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = model.coefficients[static_cast<std::size_t>(idx[i] - 1)];
    return out;
}

std::vector<DsfVector> extract_dsf_stream(std::span<const double> stream, const DsfConfig &config, int sensor_id) {
    config.validate();
    const std::size_t m = config.chunk_size;
    if (stream.size() < m)
        fail(ErrorCode::InvalidArgument, "stream shorter than one chunk");

    const std::size_t chunks = stream.size() / m;
    std::vector<DsfVector> out;
    out.reserve(chunks);
    for (std::size_t k = 0; k < chunks; ++k) {
        try {
            out.push_back({sensor_id, static_cast<long>(k + 1), chunk_features(stream.subspan(k * m, m), config)});
        } catch (const Error &e) {
            throw Error(e.code(), "chunk " + std::to_string(k + 1) + ": " + e.what());
        }
        if (!out.back().values.allFinite())
            fail(ErrorCode::SingularDesign, "chunk " + std::to_string(k + 1) + ": non-finite AR coefficients");
    }
    return out;
}

} // namespace shmcpd
