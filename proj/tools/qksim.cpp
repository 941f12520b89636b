#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qksim/scenario.hpp"
#include "qksim/version.hpp"

// Scenario front end: `run` evaluates one scenario (analytic plus seeded
// Monte Carlo), `sweep` tabulates rate/QBER versus distance, `calibrate`
// fits mu or the extra-loss budget to a target QBER.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

namespace {

struct CommonOptions {
    std::string config_path;
    std::string protocol_override;
    double distance_km = -1.0;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> symbols;
    std::string out_dir;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool with_distance = true) {
    cmd->add_option("--config", opt.config_path, "scenario config file (JSON)")->required();
    cmd->add_option("--protocol", opt.protocol_override, "override: cow|bb84-pol|bb84-tb");
    if (with_distance) {
        cmd->add_option("--distance-km", opt.distance_km, "override the channel length");
    }
    cmd->add_option("--seed", opt.seed, "override the Monte Carlo seed");
    cmd->add_option("--symbols", opt.symbols, "override num_symbols (0 = analytic only)");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--format", opt.format, "comma-separated outputs: csv,svg");
}

qksim::ScenarioConfig load_config(const CommonOptions& opt) {
    qksim::ScenarioConfig cfg;
    if (opt.protocol_override.empty()) {
        cfg = qksim::parse_config(opt.config_path);
    } else {
        // Substitute the protocol before parsing so protocol-dependent
        // defaults and checks are applied consistently.
        std::ifstream in(opt.config_path);
        if (!in) {
            throw qksim::ConfigError("cannot open config file: " + opt.config_path);
        }
        nlohmann::json root = nlohmann::json::parse(in, nullptr, false);
        if (root.is_discarded()) {
            throw qksim::ConfigError("config is not valid JSON: " + opt.config_path);
        }
        root["protocol"] = opt.protocol_override;
        cfg = qksim::parse_config_string(root.dump());
    }
    if (opt.distance_km >= 0.0) {
        cfg.channel.length_km = opt.distance_km;
    }
    if (opt.seed) {
        cfg.seed = *opt.seed;
    }
    if (opt.symbols) {
        cfg.num_symbols = *opt.symbols;
    }
    if (!opt.out_dir.empty()) {
        cfg.output.dir = opt.out_dir;
    }
    return cfg;
}

std::set<std::string> parse_formats(const std::string& spec) {
    std::set<std::string> formats;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            formats.insert(item);
        }
    }
    if (formats.empty()) {
        formats.insert("csv");
    }
    return formats;
}

std::vector<double> parse_sweep(const std::string& spec) {
    double start = 0, stop = 0, step = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || step <= 0.0 ||
        stop < start || start < 0.0) {
        throw qksim::ConfigError("--sweep expects start:stop:step with step > 0");
    }
    std::vector<double> distances;
    for (double d = start; d <= stop + 1e-9; d += step) {
        distances.push_back(d);
    }
    return distances;
}

void print_row(const qksim::DistanceRow& row) {
    std::printf("%8.2f km  loss %6.2f dB  click %.6g  qber %.4f%%  raw %.6g Hz  secret %.6g Hz\n",
                row.distance_km, row.loss_db, row.click_prob, row.qber * 100.0, row.raw_rate_hz,
                row.secret_rate_hz);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qksim: silicon-photonic QKD link simulator"};
    app.set_version_flag("--version", qksim::kVersion);
    app.require_subcommand(1);

    CommonOptions run_opt, sweep_opt, cal_opt;
    std::string sweep_spec;
    std::string cal_knob = "mu";
    double cal_target = 0.011, cal_distance = 20.0;

    CLI::App* run = app.add_subcommand("run", "run one scenario (analytic + Monte Carlo)");
    add_common(run, run_opt);

    CLI::App* sweep = app.add_subcommand("sweep", "analytic sweep over distance");
    add_common(sweep, sweep_opt, false);
    sweep->add_option("--sweep", sweep_spec, "distances as start:stop:step (km)")->required();

    CLI::App* cal = app.add_subcommand("calibrate", "fit mu or extra loss to a target QBER");
    add_common(cal, cal_opt, false);
    cal->add_option("--knob", cal_knob, "mu|extra-loss")
        ->check(CLI::IsMember({"mu", "extra-loss"}));
    cal->add_option("--target-qber", cal_target, "target QBER (fraction)");
    cal->add_option("--distance-km", cal_distance, "distance at which to match the target");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) != 0 ? 2 : 0;
    }

    try {
        if (run->parsed()) {
            const qksim::ScenarioConfig cfg = load_config(run_opt);
            const qksim::ScenarioResult result = qksim::run_scenario(cfg);
            print_row(result.rows.front());
            if (result.mc) {
                std::printf(
                    "   monte carlo (%llu symbols): click %.6g  qber %.4f%%  secret %.6g Hz\n",
                    static_cast<unsigned long long>(result.mc->num_symbols),
                    result.mc->stats.click_prob, result.mc->stats.qber * 100.0,
                    result.mc->rates.secret_rate_hz);
            }
            for (const auto& path :
                 qksim::emit_outputs(result, cfg.output.dir, parse_formats(run_opt.format))) {
                std::printf("wrote %s\n", path.string().c_str());
            }
        } else if (sweep->parsed()) {
            const qksim::ScenarioConfig cfg = load_config(sweep_opt);
            const qksim::ScenarioResult result =
                qksim::sweep_distance(cfg, parse_sweep(sweep_spec));
            for (const auto& row : result.rows) {
                print_row(row);
            }
            if (result.cutoff_km) {
                std::printf("secret rate reaches zero at %.2f km\n", *result.cutoff_km);
            }
            for (const auto& path :
                 qksim::emit_outputs(result, cfg.output.dir, parse_formats(sweep_opt.format))) {
                std::printf("wrote %s\n", path.string().c_str());
            }
        } else if (cal->parsed()) {
            const qksim::ScenarioConfig cfg = load_config(cal_opt);
            const auto knob = cal_knob == "mu" ? qksim::CalibrationKnob::Mu
                                               : qksim::CalibrationKnob::ExtraLossDb;
            const qksim::CalibrationResult res =
                qksim::calibrate(cfg, knob, cal_target, cal_distance);
            std::printf("fitted %s = %.8g (qber %.6f at %.2f km)\n", cal_knob.c_str(),
                        res.fitted_value, res.achieved_qber, cal_distance);
            std::fputs(qksim::serialize_config(res.config).c_str(), stdout);
        }
    } catch (const qksim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
