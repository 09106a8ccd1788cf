#include "core/pipeline.hpp"

#include "core/error.hpp"
#include "core/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

namespace shmcpd {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json &j, const char *key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null())
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &e) {
        fail(ErrorCode::ConfigError, std::string("config field '") + key + "': " + e.what());
    }
}

std::vector<double> per_story(const json &j, const char *key, int stories) {
    if (!j.contains(key))
        fail(ErrorCode::ConfigError, std::string("scenario needs '") + key + "'");
    const auto &v = j.at(key);
    if (v.is_number())
        return std::vector<double>(static_cast<std::size_t>(stories), v.get<double>());
    if (!v.is_array())
        fail(ErrorCode::ConfigError, std::string("'") + key + "' must be a number or an array");
    auto out = v.get<std::vector<double>>();
    if (out.size() != static_cast<std::size_t>(stories))
        fail(ErrorCode::ConfigError, std::string("'") + key + "' needs one entry per story");
    return out;
}

std::vector<Eigen::VectorXd> feature_values(const std::vector<DsfVector> &dsfs) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(dsfs.size());
    for (const auto &d : dsfs)
        out.push_back(d.values);
    return out;
}

std::vector<std::vector<double>> split_chunks(const std::vector<double> &column, std::size_t chunk) {
    std::vector<std::vector<double>> out;
    for (std::size_t start = 0; start + chunk <= column.size(); start += chunk)
        out.emplace_back(column.begin() + static_cast<std::ptrdiff_t>(start),
                         column.begin() + static_cast<std::ptrdiff_t>(start + chunk));
    return out;
}

std::string trace_csv(const std::vector<SensorOutcome> &sensors) {
    std::ostringstream out;
    out << "sensor_id,step,posterior,ccdf\n";
    for (const auto &s : sensors)
        for (const auto &t : s.trace)
            out << s.sensor_id << ',' << t.step << ',' << format_double(t.posterior) << ','
                << format_double(t.ccdf) << '\n';
    return out.str();
}

std::string dsf_csv(const std::vector<SensorOutcome> &sensors, int dim) {
    std::ostringstream out;
    out << "sensor_id,step";
    for (int i = 1; i <= dim; ++i)
        out << ",coef_" << i;
    out << '\n';
    for (const auto &s : sensors)
        for (const auto &d : s.features) {
            out << s.sensor_id << ',' << d.step;
            for (Eigen::Index i = 0; i < d.values.size(); ++i)
                out << ',' << format_double(d.values(i));
            out << '\n';
        }
    return out.str();
}

std::string estimates_csv(const std::vector<SensorOutcome> &sensors, int dim) {
    std::ostringstream out;
    out << "sensor_id,step";
    for (int i = 1; i <= dim; ++i)
        out << ",mu_hat_" << i;
    for (int r = 1; r <= dim; ++r)
        for (int c = 1; c <= dim; ++c)
            out << ",sigma_hat_" << r << '_' << c;
    out << '\n';
    for (const auto &s : sensors)
        for (const auto &e : s.estimates) {
            out << s.sensor_id << ',' << e.step;
            for (Eigen::Index i = 0; i < e.params.mean.size(); ++i)
                out << ',' << format_double(e.params.mean(i));
            for (Eigen::Index r = 0; r < e.params.cov.rows(); ++r)
                for (Eigen::Index c = 0; c < e.params.cov.cols(); ++c)
                    out << ',' << format_double(e.params.cov(r, c));
            out << '\n';
        }
    return out.str();
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn &&fn) {
    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++)
                fn(i);
        });
}

} // namespace

// ---------------------------------------------------------------------------
// Configuration

void PipelineConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
        fail(ErrorCode::ConfigError, "alpha must lie in (0, 1)");
    if (!(rho > 0.0 && rho < 1.0))
        fail(ErrorCode::ConfigError, "rho must lie in (0, 1)");
    if (warmup < 0)
        fail(ErrorCode::ConfigError, "warmup must be non-negative");
    const int p = order.value_or(p_max);
    if (p < 1)
        fail(ErrorCode::ConfigError, "AR order must be >= 1");
    if (chunk_size <= static_cast<std::size_t>(p) + 1)
        fail(ErrorCode::ConfigError, "chunk size must exceed AR order + 1");
    if (input.empty())
        fail(ErrorCode::ConfigError, "no input CSV given");
    if (training.empty())
        fail(ErrorCode::ConfigError, "no training CSV given (the pre-damage distribution is always learned)");
    if (mode == DetectionMode::KnownPost && post_training.empty())
        fail(ErrorCode::ConfigError, "known mode needs post-damage training data (post_training)");
    if (order)
        DsfConfig{chunk_size, *order, subset}.validate();
    else
        for (int idx : subset)
            if (idx < 1)
                fail(ErrorCode::ConfigError, "coefficient indices are 1-based");
}

PipelineConfig pipeline_config_from_json(const json &j) {
    if (!j.is_object())
        fail(ErrorCode::ConfigError, "pipeline config must be a JSON object");
    PipelineConfig c;
    c.chunk_size = get_or<std::size_t>(j, "chunk_size", c.chunk_size);
    if (j.contains("order")) {
        const auto &o = j.at("order");
        if (o.is_string() && o.get<std::string>() == "auto")
            c.order.reset();
        else if (o.is_number_integer())
            c.order = o.get<int>();
        else
            fail(ErrorCode::ConfigError, "order must be an integer or \"auto\"");
    }
    c.p_max = get_or<int>(j, "p_max", c.p_max);
    c.subset = get_or<std::vector<int>>(j, "subset", {});
    c.alpha = get_or<double>(j, "alpha", c.alpha);
    c.rho = get_or<double>(j, "rho", c.rho);
    const auto mode = get_or<std::string>(j, "mode", "adaptive");
    if (mode == "adaptive")
        c.mode = DetectionMode::Adaptive;
    else if (mode == "known")
        c.mode = DetectionMode::KnownPost;
    else
        fail(ErrorCode::ConfigError, "mode must be \"known\" or \"adaptive\"");
    c.warmup = get_or<long>(j, "warmup", 0);
    c.input = get_or<std::string>(j, "input", "");
    c.training = get_or<std::string>(j, "training", "");
    c.post_training = get_or<std::string>(j, "post_training", "");
    c.output_dir = get_or<std::string>(j, "output_dir", "");
    c.meta = get_or<std::string>(j, "meta", "");
    if (j.contains("positions")) {
        for (const auto &[key, value] : j.at("positions").items()) {
            try {
                c.positions[std::stoi(key)] = value.get<std::string>();
            } catch (const std::exception &) {
                fail(ErrorCode::ConfigError, "positions must map sensor ids to labels");
            }
        }
    }
    if (j.contains("lambda_true") && !j.at("lambda_true").is_null())
        c.lambda_true = get_or<long>(j, "lambda_true", 0);
    c.write_dsf = get_or<bool>(j, "write_dsf", false);
    c.write_estimates = get_or<bool>(j, "write_estimates", false);
    c.threads = get_or<unsigned>(j, "threads", 0);
    return c;
}

json to_json(const PipelineConfig &c) {
    json j;
    j["chunk_size"] = c.chunk_size;
    j["order"] = c.order ? json(*c.order) : json("auto");
    j["p_max"] = c.p_max;
    j["subset"] = c.subset;
    j["alpha"] = c.alpha;
    j["rho"] = c.rho;
    j["mode"] = c.mode == DetectionMode::Adaptive ? "adaptive" : "known";
    j["input"] = c.input.string();
    j["training"] = c.training.string();
    if (!c.post_training.empty())
        j["post_training"] = c.post_training.string();
    j["output_dir"] = c.output_dir.string();
    if (!c.meta.empty())
        j["meta"] = c.meta.string();
    json pos = json::object();
    for (const auto &[id, label] : c.positions)
        pos[std::to_string(id)] = label;
    j["positions"] = pos;
    j["lambda_true"] = c.lambda_true ? json(*c.lambda_true) : json(nullptr);
    j["write_dsf"] = c.write_dsf;
    j["warmup"] = c.warmup;
    j["write_estimates"] = c.write_estimates;
    j["threads"] = c.threads;
    return j;
}

Scenario scenario_from_json(const json &j) {
    if (!j.is_object())
        fail(ErrorCode::ConfigError, "scenario config must be a JSON object");
    Scenario s;
    const int stories = get_or<int>(j, "stories", 4);
    if (stories < 1)
        fail(ErrorCode::ConfigError, "stories must be >= 1");
    s.model.masses = per_story(j, "masses", stories);
    s.model.stiffnesses = per_story(j, "stiffnesses", stories);
    s.model.zeta = get_or<double>(j, "zeta", s.model.zeta);
    s.chunk_size = get_or<std::size_t>(j, "chunk_size", s.chunk_size);
    s.sensors_per_story = get_or<int>(j, "sensors_per_story", 1);
    if (j.contains("damage") && !j.at("damage").is_null()) {
        const auto &d = j.at("damage");
        if (d.contains("story") && !d.at("story").is_null())
            s.damage.story = d.at("story").get<int>();
        s.damage.retention = get_or<double>(d, "r", 1.0);
        s.damage.lambda_chunk = get_or<long>(d, "lambda_chunk", 1);
    }
    if (j.contains("excitation")) {
        const auto &e = j.at("excitation");
        s.excitation.seed = get_or<std::uint64_t>(e, "seed", s.excitation.seed);
        s.excitation.intensity = get_or<double>(e, "intensity", s.excitation.intensity);
        s.excitation.sample_rate = get_or<double>(e, "fs", s.excitation.sample_rate);
        s.excitation.duration_s = get_or<double>(e, "duration_s", s.excitation.duration_s);
        if (e.contains("stop_after_s") && !e.at("stop_after_s").is_null())
            s.excitation.stop_after_s = e.at("stop_after_s").get<double>();
    }
    if (j.contains("snr_db"))
        s.excitation.snr_db = j.at("snr_db").is_null() ? std::nullopt
                                                         : std::optional<double>(j.at("snr_db").get<double>());
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Streaming

SensorStream::SensorStream(int sensor_id, DsfConfig dsf, Gaussian pre, std::optional<Gaussian> post,
                           ChangePrior prior, double alpha, bool keep_estimates, long warmup)
    : sensor_id_(sensor_id), dsf_(std::move(dsf)),
      detector_(post ? std::variant<KnownDetector, AdaptiveDetector>(
                           std::in_place_type<KnownDetector>, std::move(pre), std::move(*post), prior, alpha, sensor_id)
                     : std::variant<KnownDetector, AdaptiveDetector>(std::in_place_type<AdaptiveDetector>,
                                                                     std::move(pre), prior, alpha, sensor_id, warmup)),
      keep_estimates_(keep_estimates) {
    dsf_.validate();
    if (this->pre().dim() != dsf_.dimension())
        fail(ErrorCode::DimensionMismatch, "pre-damage distribution dimension differs from the feature dimension");
    buffer_.reserve(dsf_.chunk_size);
}

void SensorStream::push(std::span<const double> samples) {
    while (!samples.empty()) {
        const std::size_t take = std::min(samples.size(), dsf_.chunk_size - buffer_.size());
        buffer_.insert(buffer_.end(), samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(take));
        samples = samples.subspan(take);
        if (buffer_.size() == dsf_.chunk_size) {
            const long k = static_cast<long>(features_.size()) + 1;
            Eigen::VectorXd x;
            try {
                x = chunk_features(buffer_, dsf_);
            } catch (const Error &e) {
                buffer_.clear();
                throw Error(e.code(), "chunk " + std::to_string(k) + ": " + e.what());
            }
            buffer_.clear();
            step(x);
        }
    }
}

void SensorStream::step(const Eigen::VectorXd &x) {
    features_.push_back({sensor_id_, static_cast<long>(features_.size()) + 1, x});
    std::visit(
        [&](auto &det) {
            using T = std::decay_t<decltype(det)>;
            if constexpr (std::is_same_v<T, KnownDetector>) {
                det.update(x);
                trace_.push_back({det.state().step, det.state().posterior, det.state().ccdf});
            } else {
                const auto s = det.update(x);
                trace_.push_back({det.step(), s.posterior, s.ccdf});
                if (keep_estimates_ && det.ready())
                    estimates_.push_back({det.step(), det.estimate()});
            }
        },
        detector_);
}

std::optional<long> SensorStream::detection_time() const {
    return std::visit([](const auto &det) { return det.detection_time(); }, detector_);
}

std::optional<GaussianParams> SensorStream::post_estimate() const {
    if (const auto *a = std::get_if<AdaptiveDetector>(&detector_); a && a->ready())
        return a->estimate();
    return std::nullopt;
}

std::optional<GaussianParams> SensorStream::post_known() const {
    if (const auto *k = std::get_if<KnownDetector>(&detector_))
        return k->post().params();
    return std::nullopt;
}

const Gaussian &SensorStream::pre() const {
    return std::visit([](const auto &det) -> const Gaussian & { return det.pre(); }, detector_);
}

// ---------------------------------------------------------------------------
// run

RunResult run(const PipelineConfig &config_in) {
    PipelineConfig config = config_in;
    if (!config.meta.empty()) {
        json meta;
        try {
            meta = json::parse(read_text_file(config.meta));
        } catch (const json::exception &e) {
            fail(ErrorCode::ParseError, config.meta.string() + ": " + e.what());
        }
        if (!config.lambda_true && meta.contains("lambda_true") && !meta.at("lambda_true").is_null())
            config.lambda_true = meta.at("lambda_true").get<long>();
        if (meta.contains("sensors"))
            for (const auto &s : meta.at("sensors"))
                config.positions.try_emplace(s.at("id").get<int>(), s.at("position").get<std::string>());
    }
    config.validate();

    const SignalTable input = read_signal_csv(config.input);
    const SignalTable training = read_signal_csv(config.training);
    std::optional<SignalTable> post_training;
    if (config.mode == DetectionMode::KnownPost)
        post_training = read_signal_csv(config.post_training);

    RunResult result;
    if (config.order) {
        result.order = *config.order;
    } else {
        std::vector<std::vector<double>> chunks;
        for (const auto &col : training.columns)
            for (auto &c : split_chunks(col, config.chunk_size))
                chunks.push_back(std::move(c));
        result.order = select_order(chunks, config.p_max);
    }
    const DsfConfig dsf{config.chunk_size, result.order, config.subset};
    dsf.validate();
    const auto prior = ChangePrior::geometric(config.rho);

    std::vector<SensorOutcome> outcomes(input.sensor_ids.size());
    parallel_for(outcomes.size(), config.threads, [&](std::size_t i) {
        SensorOutcome &out = outcomes[i];
        out.sensor_id = input.sensor_ids[i];
        if (const auto it = config.positions.find(out.sensor_id); it != config.positions.end())
            out.position = it->second;
        try {
            const auto train_dsf = extract_dsf_stream(training.column(out.sensor_id), dsf, out.sensor_id);
            const auto pre = fit_predamage(feature_values(train_dsf));
            out.pre = pre;
            std::optional<Gaussian> post;
            if (post_training) {
                const auto post_dsf = extract_dsf_stream(post_training->column(out.sensor_id), dsf, out.sensor_id);
                post.emplace(fit_predamage(feature_values(post_dsf)));
                out.post_known = post->params();
            }
            SensorStream stream(out.sensor_id, dsf, Gaussian(pre), std::move(post), prior, config.alpha,
                                config.write_estimates, config.warmup);
            stream.push(input.column(out.sensor_id));
            out.detection_time = stream.detection_time();
            out.post_estimate = stream.post_estimate();
            out.trace = stream.trace();
            out.features = stream.features();
            out.estimates = stream.estimates();
        } catch (const Error &e) {
            out.error = std::string(to_string(e.code())) + ": " + e.what();
        }
    });

    if (std::all_of(outcomes.begin(), outcomes.end(), [](const SensorOutcome &o) { return o.error.has_value(); })) {
        std::string msg = "every sensor failed";
        for (const auto &o : outcomes)
            msg += "; sensor " + std::to_string(o.sensor_id) + ": " + *o.error;
        fail(ErrorCode::InvalidArgument, msg);
    }

    std::vector<SensorResult> results;
    for (const auto &o : outcomes)
        results.push_back({o.sensor_id, o.position, o.pre, o.post_known, o.post_estimate, o.detection_time});
    result.report = build_report(results);

    const bool detected = result.report.detected();
    result.exit_code = detected ? kExitDamage : kExitNoDamage;

    json sensors = json::array();
    for (const auto &o : outcomes) {
        json s;
        s["sensor_id"] = o.sensor_id;
        s["position"] = o.position;
        s["tau"] = o.detection_time ? json(*o.detection_time) : json(nullptr);
        if (config.lambda_true) {
            s["lambda_true"] = *config.lambda_true;
            if (o.detection_time) {
                const long delay = *o.detection_time - *config.lambda_true;
                s["false_alarm"] = delay < 0;
                if (delay >= 0)
                    s["delay"] = delay;
            }
        }
        if (o.error)
            s["error"] = *o.error;
        sensors.push_back(std::move(s));
    }
    result.summary_json = {{"mode", config.mode == DetectionMode::Adaptive ? "adaptive" : "known"},
                           {"alpha", config.alpha},
                           {"rho", config.rho},
                           {"order", result.order},
                           {"chunk_size", config.chunk_size},
                           {"lambda_true", config.lambda_true ? json(*config.lambda_true) : json(nullptr)},
                           {"detected", detected},
                           {"sensors", sensors}};

    json rep = json::array();
    for (const auto &s : result.report.sensors) {
        json r = {{"id", s.id},
                  {"position", s.position},
                  {"di1", s.di1 ? json(*s.di1) : json(nullptr)},
                  {"rank_di1", s.rank_di1},
                  {"rank_di2", s.rank_di2}};
        if (s.di2)
            r["di2"] = *s.di2;
        rep.push_back(std::move(r));
    }
    result.report_json = {{"sensors", rep}, {"detected", detected}, {"alpha", config.alpha}, {"rho", config.rho}};

    if (!config.output_dir.empty()) {
        const auto &dir = config.output_dir;
        write_text_file(dir / "summary.json", result.summary_json.dump(2) + "\n");
        write_text_file(dir / "report.json", result.report_json.dump(2) + "\n");
        write_text_file(dir / "trace.csv", trace_csv(outcomes));
        if (config.write_dsf)
            write_text_file(dir / "dsf.csv", dsf_csv(outcomes, dsf.dimension()));
        if (config.write_estimates && config.mode == DetectionMode::Adaptive)
            write_text_file(dir / "estimates.csv", estimates_csv(outcomes, dsf.dimension()));
    }
    result.sensors = std::move(outcomes);
    return result;
}

// ---------------------------------------------------------------------------
// gen

namespace {

SignalTable to_table(const SimulationResult &sim) {
    SignalTable t;
    t.time.resize(sim.samples());
    for (std::size_t n = 0; n < t.time.size(); ++n)
        t.time[n] = static_cast<double>(n) / sim.sample_rate;
    for (std::size_t i = 0; i < sim.sensors.size(); ++i) {
        t.sensor_ids.push_back(sim.sensors[i].id);
        t.columns.push_back(sim.accelerations[i]);
    }
    return t;
}

void write_table(const std::filesystem::path &path, const SignalTable &t) {
    std::ostringstream out;
    write_signal_csv(out, t);
    write_text_file(path, out.str());
}

} // namespace

json gen(const json &scenario_json, const std::filesystem::path &out_dir) {
    const Scenario scenario = scenario_from_json(scenario_json);
    const SimulationResult sim = simulate(scenario);
    write_table(out_dir / "signals.csv", to_table(sim));

    json files = {{"signals", "signals.csv"}};
    // Companion records of the undamaged and fully damaged structure.
    auto companion = [&](const char *key, const char *file, bool damaged_from_start) {
        if (!scenario_json.contains(key) || scenario_json.at(key).is_null())
            return;
        const auto &settings = scenario_json.at(key);
        Scenario s = scenario;
        s.excitation.seed = get_or<std::uint64_t>(settings, "seed", scenario.excitation.seed + 1);
        s.excitation.duration_s = get_or<double>(settings, "duration_s", scenario.excitation.duration_s);
        s.excitation.stop_after_s.reset();
        if (damaged_from_start) {
            if (!scenario.damage.damaged())
                fail(ErrorCode::ConfigError, "post_training requested for an undamaged scenario");
            s.damage.lambda_chunk = 1;
        } else {
            s.damage = DamageScenario{};
        }
        write_table(out_dir / file, to_table(simulate(s)));
        files[key] = file;
    };
    companion("training", "training.csv", false);
    companion("post_training", "post_training.csv", true);

    json sensors = json::array();
    for (const auto &s : sim.sensors)
        sensors.push_back({{"id", s.id},
                           {"column", "sensor_" + std::to_string(s.id)},
                           {"position", s.position},
                           {"story", s.story}});
    json meta = {{"lambda_true", sim.lambda_true ? json(*sim.lambda_true) : json(nullptr)},
                 {"damage_story", scenario.damage.damaged() ? json(*scenario.damage.story) : json(nullptr)},
                 {"retention", scenario.damage.retention},
                 {"sample_rate", sim.sample_rate},
                 {"chunk_size", sim.chunk_size},
                 {"samples", sim.samples()},
                 {"modal_frequencies_hz", modal_frequencies(scenario.model)},
                 {"sensors", sensors},
                 {"files", files}};
    write_text_file(out_dir / "meta.json", meta.dump(2) + "\n");
    return meta;
}

// ---------------------------------------------------------------------------
// report

std::string report(const std::filesystem::path &run_dir) {
    json summary;
    json rep;
    try {
        summary = json::parse(read_text_file(run_dir / "summary.json"));
        rep = json::parse(read_text_file(run_dir / "report.json"));
    } catch (const json::exception &e) {
        fail(ErrorCode::ParseError, run_dir.string() + ": " + e.what());
    }

    // trace.csv -> per-sensor ccdf series
    std::map<int, std::map<long, double>> series;
    long last_step = 0;
    {
        std::istringstream in(read_text_file(run_dir / "trace.csv"));
        std::string line;
        std::size_t line_no = 0;
        std::getline(in, line);
        ++line_no;
        if (line != "sensor_id,step,posterior,ccdf")
            fail(ErrorCode::ParseError, (run_dir / "trace.csv").string() + ": line 1: unexpected header");
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty())
                continue;
            std::istringstream row(line);
            std::string id, step, post, ccdf;
            if (!std::getline(row, id, ',') || !std::getline(row, step, ',') || !std::getline(row, post, ',') ||
                !std::getline(row, ccdf))
                fail(ErrorCode::ParseError,
                     (run_dir / "trace.csv").string() + ": line " + std::to_string(line_no) + ": malformed row");
            try {
                const long s = std::stol(step);
                series[std::stoi(id)][s] = std::stod(ccdf);
                last_step = std::max(last_step, s);
            } catch (const std::exception &) {
                fail(ErrorCode::ParseError,
                     (run_dir / "trace.csv").string() + ": line " + std::to_string(line_no) + ": malformed row");
            }
        }
    }

    const double alpha = summary.value("alpha", kDefaultAlpha);
    const bool has_lambda = summary.contains("lambda_true") && !summary.at("lambda_true").is_null();
    const long lambda = has_lambda ? summary.at("lambda_true").get<long>() : 0;

    // Wide plot table: the CCDF crosses `threshold` (= alpha) exactly when the
    // posterior reaches 1 - alpha.
    std::ostringstream plot;
    plot << "step,threshold,lambda_marker";
    for (const auto &[id, _] : series)
        plot << ",sensor_" << id;
    plot << '\n';
    for (long n = 1; n <= last_step; ++n) {
        plot << n << ',' << format_double(alpha) << ',' << (has_lambda && lambda == n ? 1 : 0);
        for (const auto &[id, s] : series) {
            const auto it = s.find(n);
            plot << ',' << (it == s.end() ? std::string() : format_double(it->second));
        }
        plot << '\n';
    }
    write_text_file(run_dir / "ccdf_plot.csv", plot.str());

    std::ostringstream out;
    out << "mode " << summary.value("mode", std::string("?")) << ", alpha " << format_double(alpha) << ", rho "
        << format_double(summary.value("rho", kDefaultRho)) << ", AR order " << summary.value("order", 0);
    if (has_lambda)
        out << ", lambda_true " << lambda;
    out << '\n';
    out << (summary.value("detected", false) ? "damage detected" : "no damage detected") << "\n\n";
    out << std::left << std::setw(8) << "sensor" << std::setw(14) << "position" << std::right << std::setw(12)
        << "DI1" << std::setw(7) << "rank" << std::setw(8) << "tau" << std::setw(8) << "delay" << std::setw(7)
        << "rank" << "  note\n";

    std::map<int, json> by_id;
    for (const auto &s : summary.at("sensors"))
        by_id[s.at("sensor_id").get<int>()] = s;
    for (const auto &s : rep.at("sensors")) {
        const int id = s.at("id").get<int>();
        const json &sum = by_id[id];
        std::ostringstream di1;
        if (!s.at("di1").is_null())
            di1 << std::fixed << std::setprecision(4) << s.at("di1").get<double>();
        else
            di1 << '-';
        const std::string tau = sum.contains("tau") && !sum.at("tau").is_null()
                                    ? std::to_string(sum.at("tau").get<long>())
                                    : "-";
        const std::string delay = sum.contains("delay") ? std::to_string(sum.at("delay").get<long>()) : "-";
        std::string note;
        if (sum.value("false_alarm", false))
            note = "false alarm";
        if (sum.contains("error"))
            note = sum.at("error").get<std::string>();
        out << std::left << std::setw(8) << id << std::setw(14) << s.value("position", std::string()) << std::right
            << std::setw(12) << di1.str() << std::setw(7) << s.at("rank_di1").get<int>() << std::setw(8) << tau
            << std::setw(8) << delay << std::setw(7) << s.at("rank_di2").get<int>() << "  " << note << '\n';
    }
    return out.str();
}

} // namespace shmcpd
