#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qksim/channel.hpp"
#include "qksim/circuits.hpp"
#include "qksim/modulators.hpp"
#include "qksim/protocol.hpp"

// Configuration-driven scenario runner: analytic rate/QBER pipeline for the
// three circuit topologies, the seeded Monte Carlo counterpart, distance
// sweeps, and calibration fits.

namespace qksim {

/// Configuration failures (bad file, unknown key, invariant violation);
/// mapped to exit code 2 by the CLI.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Per-scenario circuit tuning. Phase offsets model interferometer
/// misalignment; the carver detune reproduces a finite experimental
/// extinction ratio.
struct CircuitParams {
    double split_ratio = 0.9;                // COW data:monitor routing
    double monitor_delay_s = 580e-12;        // COW visibility AMZI
    double monitor_phase_offset_rad = 0.0;
    double carver_bias_detune_rad = 0.0;
    double receiver_phase_rad = 0.0;         // time-bin decoding AMZI
    double p2p_loss_db = 0.5;                // path-to-polarisation converter
    TimebinCircuitParams timebin;
};

struct OutputConfig {
    std::string dir = "out";
    bool csv = true;
    bool svg = false;
};

struct ScenarioConfig {
    ProtocolConfig protocol;
    ChannelParams channel;
    DetectorParams detector;  // slot_duration_s 0 = derive from clock/bins
    TopmParams topm;
    CdmParams cdm;
    CircuitParams circuit;
    std::uint64_t seed = 1;
    std::uint64_t num_symbols = 1000000;
    OutputConfig output;
};

/// Loads and validates a scenario; defaults are applied for missing keys and
/// unknown keys are rejected (strict schema). Throws ConfigError naming the
/// offending key.
ScenarioConfig parse_config(const std::filesystem::path& path);
ScenarioConfig parse_config_string(const std::string& text);

/// Canonical serialization; parse(serialize(cfg)) is a fixed point.
std::string serialize_config(const ScenarioConfig& cfg);

/// FNV-1a over the canonical serialization, as a 16-digit hex string.
std::string config_hash(const ScenarioConfig& cfg);

/// One analytic record of the fixed CSV schema. Visibility is meaningful
/// for COW only and left as NaN otherwise (emitted as an empty field).
struct DistanceRow {
    double distance_km = 0.0;
    double loss_db = 0.0;
    double click_prob = 0.0;
    double qber = 0.0;
    double visibility = 0.0;
    double raw_rate_hz = 0.0;
    double secret_fraction = 0.0;
    double secret_rate_hz = 0.0;
};

/// Monte Carlo summary recorded next to the analytic row.
struct McSummary {
    SiftedStats stats;
    KeyRateResult rates;
    std::uint64_t num_symbols = 0;
    std::uint64_t num_events = 0;
};

struct ScenarioResult {
    ScenarioConfig config;
    std::vector<DistanceRow> rows;
    std::optional<McSummary> mc;
    std::vector<DetectionEvent> events;
    std::optional<double> cutoff_km;  // first swept distance with zero secret rate
    std::string hash;
    std::string version;
};

/// Analytic record at one distance (channel length overridden).
DistanceRow evaluate_analytic(const ScenarioConfig& cfg, double distance_km);

/// Analytic pipeline plus, when num_symbols > 0, the seeded Monte Carlo
/// pipeline at the configured distance; both are recorded side by side.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// One analytic row per distance (must be sorted, non-negative). Also
/// reports the first distance at which the secret fraction reaches zero.
ScenarioResult sweep_distance(const ScenarioConfig& cfg, const std::vector<double>& distances_km);

enum class CalibrationKnob { Mu, ExtraLossDb };

struct CalibrationResult {
    double fitted_value = 0.0;
    double achieved_qber = 0.0;
    ScenarioConfig config;  // with the fitted value applied
};

/// Bisects the chosen knob until the analytic QBER at the target distance
/// matches `target_qber` within 1e-4 (absolute). Throws ConfigError when
/// the target cannot be bracketed.
CalibrationResult calibrate(const ScenarioConfig& cfg, CalibrationKnob knob, double target_qber,
                            double distance_km);

/// Writes results.csv (and events.csv / mc_summary.csv / plot.svg as
/// applicable) into `dir`; returns the paths written.
std::vector<std::filesystem::path> emit_outputs(const ScenarioResult& result,
                                                const std::filesystem::path& dir,
                                                const std::set<std::string>& formats);

}  // namespace qksim
