#include "core/localization.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace shmcpd {

double kl_gaussian(const Gaussian &f, const Gaussian &g) {
    if (f.dim() != g.dim())
        fail(ErrorCode::DimensionMismatch, "KL between Gaussians of different dimension");
    const auto m = static_cast<double>(f.dim());

    // tr(S0^-1 S1) = ||L0^-1 L1||_F^2
    const Eigen::MatrixXd l1 = f.llt().matrixL();
    const Eigen::MatrixXd a = g.llt().matrixL().solve(l1);
    const double trace = a.squaredNorm();
    const double maha = g.mahalanobis_sq(f.mean());
    const double kl = 0.5 * (trace + maha - m + g.log_det() - f.log_det());
    return kl < 0.0 ? 0.0 : kl;
}

bool LocalizationReport::detected() const {
    return std::any_of(sensors.begin(), sensors.end(), [](const SensorIndices &s) { return s.di2.has_value(); });
}

std::vector<int> rank_descending(const std::vector<int> &ids, const std::vector<std::optional<double>> &values) {
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto &va = values[a];
        const auto &vb = values[b];
        if (va.has_value() != vb.has_value())
            return va.has_value();
        if (va && *va != *vb)
            return *va > *vb;
        return ids[a] < ids[b];
    });
    std::vector<int> out;
    out.reserve(order.size());
    for (auto i : order)
        out.push_back(ids[i]);
    return out;
}

std::vector<int> rank_ascending(const std::vector<int> &ids, const std::vector<std::optional<long>> &values) {
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto &va = values[a];
        const auto &vb = values[b];
        if (va.has_value() != vb.has_value())
            return va.has_value();
        if (va && *va != *vb)
            return *va < *vb;
        return ids[a] < ids[b];
    });
    std::vector<int> out;
    out.reserve(order.size());
    for (auto i : order)
        out.push_back(ids[i]);
    return out;
}

LocalizationReport build_report(const std::vector<SensorResult> &results) {
    LocalizationReport report;
    std::vector<int> ids;
    std::vector<std::optional<double>> di1;
    std::vector<std::optional<long>> di2;

    for (const auto &r : results) {
        if (std::find(ids.begin(), ids.end(), r.id) != ids.end())
            fail(ErrorCode::InvalidArgument, "duplicate sensor id " + std::to_string(r.id));
        SensorIndices s;
        s.id = r.id;
        s.position = r.position;
        s.di2 = r.detection_time;
        const auto &post = r.post_known ? r.post_known : r.post_estimate;
        if (r.pre && post)
            s.di1 = kl_gaussian(Gaussian(*post), Gaussian(*r.pre));
        ids.push_back(s.id);
        di1.push_back(s.di1);
        di2.push_back(s.di2);
        report.sensors.push_back(std::move(s));
    }

    report.ranking_di1 = rank_descending(ids, di1);
    report.ranking_di2 = rank_ascending(ids, di2);
    for (auto &s : report.sensors) {
        s.rank_di1 = static_cast<int>(std::find(report.ranking_di1.begin(), report.ranking_di1.end(), s.id) -
                                      report.ranking_di1.begin()) + 1;
        s.rank_di2 = static_cast<int>(std::find(report.ranking_di2.begin(), report.ranking_di2.end(), s.id) -
                                      report.ranking_di2.begin()) + 1;
    }
    return report;
}

} // namespace shmcpd
