#include "shmcpd.h"

#include "core/adaptive.hpp"
#include "core/detector.hpp"
#include "core/dsf.hpp"
#include "core/error.hpp"
#include "core/localization.hpp"
#include "core/pipeline.hpp"
#include "core/shearsim.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <variant>

using namespace shmcpd;

static_assert(static_cast<int>(ErrorCode::InvalidArgument) == SHM_ERR_INVALID_ARGUMENT);
static_assert(static_cast<int>(ErrorCode::EstimatesUnready) == SHM_ERR_ESTIMATES_UNREADY);
static_assert(static_cast<int>(ErrorCode::ParseError) == SHM_ERR_PARSE);

struct shm_gaussian {
    Gaussian value;
};

struct shm_detector {
    std::variant<KnownDetector, AdaptiveDetector> value;
};

namespace {

thread_local std::string last_error;

shm_status to_status(ErrorCode code) { return static_cast<shm_status>(static_cast<int>(code)); }

template <typename Fn>
shm_status guarded(Fn &&fn) noexcept {
    try {
        fn();
        return SHM_OK;
    } catch (const Error &e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc &) {
        last_error = "out of memory";
        return SHM_ERR_INTERNAL;
    } catch (const std::exception &e) {
        last_error = e.what();
        return SHM_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown failure";
        return SHM_ERR_INTERNAL;
    }
}

void require(bool ok, const char *what) {
    if (!ok)
        fail(ErrorCode::InvalidArgument, what);
}

char *dup_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

Eigen::VectorXd vec(const double *p, size_t n) { return Eigen::Map<const Eigen::VectorXd>(p, static_cast<Eigen::Index>(n)); }

Eigen::MatrixXd row_major(const double *p, size_t dim) {
    const auto m = static_cast<Eigen::Index>(dim);
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(p, m, m);
}

nlohmann::json parse_json(const char *text) {
    require(text != nullptr, "JSON text is null");
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        fail(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
    }
}

} // namespace

extern "C" {

const char *shm_version(void) { return "0.1.0"; }

const char *shm_status_name(shm_status status) {
    if (status == SHM_OK)
        return "OK";
    if (status == SHM_ERR_INTERNAL)
        return "Internal";
    if (status >= SHM_ERR_INVALID_ARGUMENT && status <= SHM_ERR_PARSE)
        return to_string(static_cast<ErrorCode>(status));
    return "Unknown";
}

const char *shm_last_error(void) { return last_error.c_str(); }

void shm_string_free(char *s) { std::free(s); }

shm_status shm_normalize_chunk(const double *chunk, size_t n, double *out) {
    return guarded([&] {
        require(chunk && out, "null buffer");
        const auto v = normalize_chunk({chunk, n});
        std::copy(v.begin(), v.end(), out);
    });
}

shm_status shm_fit_ar(const double *normalized, size_t n, int order, double *coefficients,
                      double *residual_variance) {
    return guarded([&] {
        require(normalized && coefficients, "null buffer");
        const auto model = fit_ar({normalized, n}, order);
        std::copy(model.coefficients.begin(), model.coefficients.end(), coefficients);
        if (residual_variance)
            *residual_variance = model.residual_variance;
    });
}

shm_status shm_select_order(const double *samples, size_t n_chunks, size_t chunk_len, int p_max, int *order,
                            double *aic) {
    return guarded([&] {
        require(samples && order, "null buffer");
        std::vector<std::vector<double>> chunks;
        for (size_t k = 0; k < n_chunks; ++k)
            chunks.emplace_back(samples + k * chunk_len, samples + (k + 1) * chunk_len);
        const auto curve = aic_curve(chunks, p_max);
        *order = select_order(chunks, p_max);
        if (aic)
            std::copy(curve.begin(), curve.end(), aic);
    });
}

shm_status shm_extract_dsf(const double *stream, size_t n, size_t chunk_len, int order, const int *subset,
                           size_t subset_len, double *out_values, size_t out_capacity, size_t *n_steps,
                           size_t *dim) {
    return guarded([&] {
        require(stream != nullptr, "null stream");
        DsfConfig cfg{chunk_len, order, {}};
        if (subset)
            cfg.subset.assign(subset, subset + subset_len);
        cfg.validate();
        const auto m = static_cast<size_t>(cfg.dimension());
        const size_t steps = chunk_len ? n / chunk_len : 0;
        if (n_steps)
            *n_steps = steps;
        if (dim)
            *dim = m;
        if (!out_values)
            return;
        require(out_capacity >= steps * m, "output buffer too small");
        const auto dsfs = extract_dsf_stream({stream, n}, cfg);
        for (size_t k = 0; k < dsfs.size(); ++k)
            std::copy(dsfs[k].values.data(), dsfs[k].values.data() + m, out_values + k * m);
    });
}

shm_status shm_gaussian_create(const double *mean, const double *cov, size_t dim, shm_gaussian **out) {
    return guarded([&] {
        require(mean && cov && out, "null argument");
        *out = new shm_gaussian{Gaussian({vec(mean, dim), row_major(cov, dim)})};
    });
}

shm_status shm_gaussian_fit(const double *rows, size_t n, size_t dim, shm_gaussian **out) {
    return guarded([&] {
        require(rows && out, "null argument");
        std::vector<Eigen::VectorXd> xs;
        for (size_t i = 0; i < n; ++i)
            xs.push_back(vec(rows + i * dim, dim));
        *out = new shm_gaussian{Gaussian(fit_predamage(xs))};
    });
}

void shm_gaussian_destroy(shm_gaussian *g) { delete g; }

size_t shm_gaussian_dim(const shm_gaussian *g) { return g ? static_cast<size_t>(g->value.dim()) : 0; }

shm_status shm_gaussian_params(const shm_gaussian *g, double *mean, double *cov) {
    return guarded([&] {
        require(g != nullptr, "null handle");
        const auto m = g->value.dim();
        if (mean)
            Eigen::Map<Eigen::VectorXd>(mean, m) = g->value.mean();
        if (cov)
            Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(cov, m, m) =
                g->value.cov();
    });
}

shm_status shm_gaussian_log_density(const shm_gaussian *g, const double *x, size_t dim, double *out) {
    return guarded([&] {
        require(g && x && out, "null argument");
        *out = g->value.log_density(vec(x, dim));
    });
}

shm_status shm_kl_gaussian(const shm_gaussian *f, const shm_gaussian *g, double *out) {
    return guarded([&] {
        require(f && g && out, "null argument");
        *out = kl_gaussian(f->value, g->value);
    });
}

shm_status shm_detector_create_known(const shm_gaussian *g, const shm_gaussian *f, double rho, double alpha,
                                     shm_detector **out) {
    return guarded([&] {
        require(g && f && out, "null argument");
        *out = new shm_detector{
            std::variant<KnownDetector, AdaptiveDetector>(std::in_place_type<KnownDetector>, g->value, f->value,
                                                          ChangePrior::geometric(rho), alpha)};
    });
}

shm_status shm_detector_create_adaptive(const shm_gaussian *g, double rho, double alpha, int64_t warmup,
                                        shm_detector **out) {
    return guarded([&] {
        require(g && out, "null argument");
        *out = new shm_detector{std::variant<KnownDetector, AdaptiveDetector>(
            std::in_place_type<AdaptiveDetector>, g->value, ChangePrior::geometric(rho), alpha, 0, warmup)};
    });
}

void shm_detector_destroy(shm_detector *d) { delete d; }

shm_status shm_detector_update(shm_detector *d, const double *x, size_t dim, double *posterior, double *ccdf) {
    return guarded([&] {
        require(d && x, "null argument");
        const Eigen::VectorXd v = vec(x, dim);
        std::visit(
            [&](auto &det) {
                using T = std::decay_t<decltype(det)>;
                if constexpr (std::is_same_v<T, KnownDetector>) {
                    det.update(v);
                    if (posterior)
                        *posterior = det.state().posterior;
                    if (ccdf)
                        *ccdf = det.state().ccdf;
                } else {
                    const auto s = det.update(v);
                    if (posterior)
                        *posterior = s.posterior;
                    if (ccdf)
                        *ccdf = s.ccdf;
                }
            },
            d->value);
    });
}

int64_t shm_detector_step(const shm_detector *d) {
    if (!d)
        return -1;
    return std::visit(
        [](const auto &det) -> int64_t {
            using T = std::decay_t<decltype(det)>;
            if constexpr (std::is_same_v<T, KnownDetector>)
                return det.state().step;
            else
                return det.step();
        },
        d->value);
}

double shm_detector_posterior(const shm_detector *d) {
    if (!d)
        return 0.0;
    return std::visit([](const auto &det) { return det.posterior(); }, d->value);
}

int64_t shm_detector_detection_time(const shm_detector *d) {
    if (!d)
        return -1;
    const auto tau = std::visit([](const auto &det) { return det.detection_time(); }, d->value);
    return tau ? *tau : -1;
}

shm_status shm_detector_post(const shm_detector *d, shm_gaussian **out) {
    return guarded([&] {
        require(d && out, "null argument");
        std::visit(
            [&](const auto &det) {
                using T = std::decay_t<decltype(det)>;
                if constexpr (std::is_same_v<T, KnownDetector>)
                    *out = new shm_gaussian{det.post()};
                else
                    *out = new shm_gaussian{Gaussian(det.estimate())};
            },
            d->value);
    });
}

shm_status shm_expected_delay(double alpha, double rho, double kl, double *out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = expected_delay(alpha, rho, kl);
    });
}

shm_status shm_modal_frequencies(const double *masses, const double *stiffnesses, size_t stories, double *out_hz) {
    return guarded([&] {
        require(masses && stiffnesses && out_hz, "null argument");
        ShearFrameModel model;
        model.masses.assign(masses, masses + stories);
        model.stiffnesses.assign(stiffnesses, stiffnesses + stories);
        const auto hz = modal_frequencies(model);
        std::copy(hz.begin(), hz.end(), out_hz);
    });
}

shm_status shm_gen(const char *scenario_json, const char *out_dir, char **meta_json) {
    return guarded([&] {
        require(out_dir != nullptr, "null output directory");
        const auto meta = gen(parse_json(scenario_json), out_dir);
        if (meta_json)
            *meta_json = dup_string(meta.dump(2));
    });
}

shm_status shm_run(const char *config_json, int *exit_code, char **summary_json) {
    return guarded([&] {
        require(exit_code != nullptr, "null exit code");
        const auto result = run(pipeline_config_from_json(parse_json(config_json)));
        *exit_code = result.exit_code;
        if (summary_json)
            *summary_json = dup_string(result.summary_json.dump(2));
    });
}

shm_status shm_report(const char *run_dir, char **table) {
    return guarded([&] {
        require(run_dir && table, "null argument");
        *table = dup_string(report(run_dir));
    });
}

} // extern "C"
