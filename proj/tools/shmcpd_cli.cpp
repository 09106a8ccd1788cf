// shmcpd command line: gen / run / report over the C API.

#include "shmcpd.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

struct CString {
    char *p = nullptr;
    ~CString() { shm_string_free(p); }
};

json load_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

int report_failure(shm_status st) {
    std::cerr << "error (" << shm_status_name(st) << "): " << shm_last_error() << '\n';
    return 1;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Sequential structural damage detection and localization"};
    app.require_subcommand(1);
    app.set_version_flag("--version", shm_version());

    // gen ------------------------------------------------------------------
    auto *gen = app.add_subcommand("gen", "Simulate a labeled shear-frame scenario");
    std::string gen_config;
    std::string gen_out = "scenario";
    std::optional<std::uint64_t> gen_seed;
    std::optional<int> gen_story;
    std::optional<double> gen_r;
    std::optional<long> gen_lambda;
    std::optional<double> gen_duration;
    gen->add_option("-c,--config", gen_config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    gen->add_option("-o,--out", gen_out, "Output directory");
    gen->add_option("--seed", gen_seed, "Override excitation seed");
    gen->add_option("--damage-story", gen_story, "Override damaged story");
    gen->add_option("--retention", gen_r, "Override stiffness retention factor r");
    gen->add_option("--lambda", gen_lambda, "Override damage chunk index");
    gen->add_option("--duration", gen_duration, "Override duration in seconds");

    // run ------------------------------------------------------------------
    auto *run = app.add_subcommand("run", "Detect and localize damage");
    std::string run_config;
    std::optional<std::string> input, training, post_training, out_dir, meta, mode, order;
    std::optional<double> alpha, rho;
    std::optional<std::size_t> chunk_size;
    std::optional<int> p_max;
    std::optional<long> lambda_true, warmup;
    std::optional<unsigned> threads;
    std::vector<int> subset;
    std::vector<std::string> positions;
    bool write_dsf = false;
    bool write_estimates = false;
    run->add_option("-c,--config", run_config, "Pipeline config JSON (flags override it)")
        ->check(CLI::ExistingFile);
    run->add_option("-i,--input", input, "Raw signal CSV");
    run->add_option("-t,--training", training, "Undamaged training CSV");
    run->add_option("--post-training", post_training, "Damaged-state training CSV (known mode)");
    run->add_option("-o,--out", out_dir, "Output directory");
    run->add_option("--meta", meta, "Scenario metadata JSON from `gen`");
    run->add_option("-m,--mode", mode, "known | adaptive")->check(CLI::IsMember({"known", "adaptive"}));
    run->add_option("--alpha", alpha, "Probability of false alarm");
    run->add_option("--rho", rho, "Geometric prior parameter");
    run->add_option("-M,--chunk-size", chunk_size, "Samples per chunk");
    run->add_option("-p,--order", order, "AR order or 'auto'");
    run->add_option("--p-max", p_max, "Largest order tried by AIC");
    run->add_option("--subset", subset, "1-based AR coefficient indices used as features");
    run->add_option("--position", positions, "Sensor position label, id=label");
    run->add_option("--warmup", warmup, "Adaptive mode: steps before detection is allowed (default m+1)");
    run->add_option("--lambda-true", lambda_true, "Known damage step, for delay reporting");
    run->add_option("--threads", threads, "Worker threads (0 = all cores)");
    run->add_flag("--write-dsf", write_dsf, "Also write dsf.csv");
    run->add_flag("--write-estimates", write_estimates, "Also write estimates.csv (adaptive mode)");

    // report ---------------------------------------------------------------
    auto *rep = app.add_subcommand("report", "Summarize a run directory and emit plot data");
    std::string run_dir;
    rep->add_option("run_dir", run_dir, "Directory written by `run`")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            json scenario = load_json_file(gen_config);
            if (gen_seed)
                scenario["excitation"]["seed"] = *gen_seed;
            if (gen_duration)
                scenario["excitation"]["duration_s"] = *gen_duration;
            if (gen_story)
                scenario["damage"]["story"] = *gen_story;
            if (gen_r)
                scenario["damage"]["r"] = *gen_r;
            if (gen_lambda)
                scenario["damage"]["lambda_chunk"] = *gen_lambda;
            CString meta_text;
            const auto st = shm_gen(scenario.dump().c_str(), gen_out.c_str(), &meta_text.p);
            if (st != SHM_OK)
                return report_failure(st);
            std::cout << "wrote " << gen_out << '\n';
            return 0;
        }

        if (*run) {
            json cfg = run_config.empty() ? json::object() : load_json_file(run_config);
            auto set = [&](const char *key, const auto &opt) {
                if (opt)
                    cfg[key] = *opt;
            };
            set("input", input);
            set("training", training);
            set("post_training", post_training);
            set("output_dir", out_dir);
            set("meta", meta);
            set("mode", mode);
            set("alpha", alpha);
            set("rho", rho);
            set("chunk_size", chunk_size);
            set("p_max", p_max);
            set("lambda_true", lambda_true);
            set("threads", threads);
            set("warmup", warmup);
            if (order) {
                if (*order == "auto")
                    cfg["order"] = "auto";
                else
                    cfg["order"] = std::stoi(*order);
            }
            if (!subset.empty())
                cfg["subset"] = subset;
            for (const auto &p : positions) {
                const auto eq = p.find('=');
                if (eq == std::string::npos)
                    throw std::runtime_error("--position expects id=label, got '" + p + "'");
                cfg["positions"][p.substr(0, eq)] = p.substr(eq + 1);
            }
            if (write_dsf)
                cfg["write_dsf"] = true;
            if (write_estimates)
                cfg["write_estimates"] = true;

            int code = 1;
            CString summary;
            const auto st = shm_run(cfg.dump().c_str(), &code, &summary.p);
            if (st != SHM_OK)
                return report_failure(st);
            const auto doc = json::parse(summary.p);
            for (const auto &s : doc.at("sensors")) {
                std::cout << "sensor " << s.at("sensor_id").get<int>() << ": ";
                if (s.contains("error"))
                    std::cout << "error: " << s.at("error").get<std::string>();
                else if (s.at("tau").is_null())
                    std::cout << "no detection";
                else
                    std::cout << "tau=" << s.at("tau").get<long>();
                if (s.contains("delay"))
                    std::cout << " delay=" << s.at("delay").get<long>();
                if (s.value("false_alarm", false))
                    std::cout << " (false alarm)";
                std::cout << '\n';
            }
            std::cout << (code == 2 ? "damage detected" : "no damage detected") << '\n';
            return code;
        }

        if (*rep) {
            CString table;
            const auto st = shm_report(run_dir.c_str(), &table.p);
            if (st != SHM_OK)
                return report_failure(st);
            std::cout << table.p;
            return 0;
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
