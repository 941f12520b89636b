#include "qksim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "qksim/version.hpp"

namespace qksim {

namespace {

using json = nlohmann::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

void reject_unknown_keys(const json& obj, const std::string& scope,
                         std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::none_of(allowed.begin(), allowed.end(),
                         [&](const char* k) { return it.key() == k; })) {
            throw ConfigError("unknown config key \"" + scope + it.key() + "\"");
        }
    }
}

double get_number(const json& obj, const std::string& scope, const char* key, double def) {
    if (!obj.contains(key)) {
        return def;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
        throw ConfigError("config key \"" + scope + key + "\" must be a number");
    }
    return v.get<double>();
}

std::uint64_t get_uint(const json& obj, const std::string& scope, const char* key,
                       std::uint64_t def) {
    if (!obj.contains(key)) {
        return def;
    }
    const json& v = obj.at(key);
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
        throw ConfigError("config key \"" + scope + key + "\" must be a non-negative integer");
    }
    if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
        throw ConfigError("config key \"" + scope + key + "\" must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

bool get_bool(const json& obj, const std::string& scope, const char* key, bool def) {
    if (!obj.contains(key)) {
        return def;
    }
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
        throw ConfigError("config key \"" + scope + key + "\" must be a boolean");
    }
    return v.get<bool>();
}

Protocol parse_protocol(const std::string& name) {
    if (name == "cow") return Protocol::Cow;
    if (name == "bb84-pol") return Protocol::Bb84Pol;
    if (name == "bb84-tb") return Protocol::Bb84Tb;
    throw ConfigError("config key \"protocol\" must be one of cow, bb84-pol, bb84-tb");
}

void validate_scenario(const ScenarioConfig& cfg) {
    try {
        validate(cfg.protocol);
        validate(cfg.channel);
        validate(cfg.detector);
        validate(cfg.topm);
        validate(cfg.cdm);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const CircuitParams& c = cfg.circuit;
    if (!(c.split_ratio > 0.0 && c.split_ratio < 1.0)) {
        throw ConfigError("circuit.split_ratio must lie strictly inside (0, 1)");
    }
    if (c.p2p_loss_db < 0.0) {
        throw ConfigError("circuit.p2p_loss_db must be >= 0");
    }
    if (c.timebin.delay_loss_db < 0.0) {
        throw ConfigError("circuit.delay_loss_db must be >= 0");
    }
    if (!(c.timebin.bin_separation_s > 0.0)) {
        throw ConfigError("circuit.bin_separation_s must be > 0");
    }
    // Slot timing feasibility against the clock rate.
    const double symbol_period = 1.0 / cfg.protocol.symbol_rate_hz();
    if (cfg.protocol.protocol == Protocol::Cow) {
        const double clock_slot = 1.0 / cfg.protocol.clock_hz;
        if (c.timebin.pulse_fwhm_s > clock_slot) {
            throw ConfigError("circuit.pulse_fwhm_s exceeds the clock slot duration");
        }
        if (std::abs(c.monitor_delay_s / clock_slot - 1.0) > 0.01) {
            throw ConfigError(
                "circuit.monitor_delay_s must equal one clock slot period within 1%");
        }
    } else if (cfg.protocol.protocol == Protocol::Bb84Tb) {
        if (c.timebin.pulse_fwhm_s > c.timebin.bin_separation_s) {
            throw ConfigError("circuit.pulse_fwhm_s exceeds the bin separation");
        }
        if (symbol_period < 3.0 * c.timebin.bin_separation_s) {
            throw ConfigError(
                "protocol.clock_hz too fast: the receiver needs three clear time slots per symbol");
        }
    } else {
        if (c.timebin.pulse_fwhm_s > symbol_period) {
            throw ConfigError("circuit.pulse_fwhm_s exceeds the symbol period");
        }
    }
}

ScenarioConfig parse_config_json(const json& root) {
    if (!root.is_object()) {
        throw ConfigError("config root must be a JSON object");
    }
    reject_unknown_keys(root, "",
                        {"protocol", "clock_hz", "symbols_per_clock", "mu", "decoy_fraction",
                         "basis_probabilities", "error_correction_efficiency", "channel",
                         "detector", "topm", "cdm", "circuit", "seed", "num_symbols", "output"});

    ScenarioConfig cfg;
    if (!root.contains("protocol") || !root.at("protocol").is_string()) {
        throw ConfigError("config key \"protocol\" is required and must be a string");
    }
    cfg.protocol.protocol = parse_protocol(root.at("protocol").get<std::string>());
    const bool cow = cfg.protocol.protocol == Protocol::Cow;

    cfg.protocol.clock_hz = get_number(root, "", "clock_hz", cow ? 1.72e9 : 1.0e9);
    cfg.protocol.symbols_per_clock = get_number(root, "", "symbols_per_clock", cow ? 0.5 : 1.0);
    cfg.protocol.mu = get_number(root, "", "mu", cow ? 0.5 : 0.2);
    cfg.protocol.decoy_fraction = get_number(root, "", "decoy_fraction", cow ? 0.1 : 0.0);
    cfg.protocol.error_correction_efficiency =
        get_number(root, "", "error_correction_efficiency", 1.0);
    if (root.contains("basis_probabilities")) {
        const json& bp = root.at("basis_probabilities");
        if (!bp.is_array() || bp.size() != 2 || !bp[0].is_number() || !bp[1].is_number()) {
            throw ConfigError("config key \"basis_probabilities\" must be a pair of numbers");
        }
        const double pz = bp[0].get<double>(), px = bp[1].get<double>();
        if (std::abs(pz + px - 1.0) > 1e-9) {
            throw ConfigError("config key \"basis_probabilities\" must sum to 1");
        }
        cfg.protocol.basis_probability_z = pz;
    }

    if (root.contains("channel")) {
        const json& ch = root.at("channel");
        reject_unknown_keys(ch, "channel.",
                            {"length_km", "atten_db_per_km", "extra_loss_db", "emulated_by_voa"});
        cfg.channel.length_km = get_number(ch, "channel.", "length_km", 0.0);
        cfg.channel.atten_db_per_km = get_number(ch, "channel.", "atten_db_per_km", 0.2);
        cfg.channel.extra_loss_db = get_number(ch, "channel.", "extra_loss_db", 0.0);
        cfg.channel.emulated_by_voa = get_bool(ch, "channel.", "emulated_by_voa", false);
    }

    if (root.contains("detector")) {
        const json& d = root.at("detector");
        reject_unknown_keys(d, "detector.", {"efficiency", "dark_rate_cps", "slot_duration_s"});
        cfg.detector.efficiency = get_number(d, "detector.", "efficiency", 0.40);
        cfg.detector.dark_rate_cps = get_number(d, "detector.", "dark_rate_cps", 500.0);
        cfg.detector.slot_duration_s = get_number(d, "detector.", "slot_duration_s", 0.0);
    }

    if (root.contains("topm")) {
        const json& t = root.at("topm");
        reject_unknown_keys(t, "topm.", {"v_2pi_volts", "resistance_ohms", "length_um"});
        cfg.topm.v_2pi = get_number(t, "topm.", "v_2pi_volts", 24.0);
        cfg.topm.resistance_ohms = get_number(t, "topm.", "resistance_ohms", 6140.0);
        cfg.topm.length_um = get_number(t, "topm.", "length_um", 150.0);
    }

    if (root.contains("cdm")) {
        const json& m = root.at("cdm");
        reject_unknown_keys(m, "cdm.",
                            {"phi_sat_rad", "v_c_volts", "loss0_db", "loss_relief_db", "v_t_volts",
                             "length_mm"});
        CdmParams def;
        cfg.cdm.phi_sat_rad = get_number(m, "cdm.", "phi_sat_rad", def.phi_sat_rad);
        cfg.cdm.v_c_volts = get_number(m, "cdm.", "v_c_volts", def.v_c_volts);
        cfg.cdm.loss0_db = get_number(m, "cdm.", "loss0_db", def.loss0_db);
        cfg.cdm.loss_relief_db = get_number(m, "cdm.", "loss_relief_db", def.loss_relief_db);
        cfg.cdm.v_t_volts = get_number(m, "cdm.", "v_t_volts", def.v_t_volts);
        cfg.cdm.length_mm = get_number(m, "cdm.", "length_mm", def.length_mm);
    }

    if (root.contains("circuit")) {
        const json& c = root.at("circuit");
        reject_unknown_keys(c, "circuit.",
                            {"split_ratio", "monitor_delay_s", "monitor_phase_offset_rad",
                             "carver_bias_detune_rad", "receiver_phase_rad", "p2p_loss_db",
                             "bin_separation_s", "pulse_fwhm_s", "delay_loss_db"});
        CircuitParams def;
        cfg.circuit.split_ratio = get_number(c, "circuit.", "split_ratio", def.split_ratio);
        cfg.circuit.monitor_delay_s =
            get_number(c, "circuit.", "monitor_delay_s", cow ? 1.0 / cfg.protocol.clock_hz
                                                             : def.monitor_delay_s);
        cfg.circuit.monitor_phase_offset_rad =
            get_number(c, "circuit.", "monitor_phase_offset_rad", 0.0);
        cfg.circuit.carver_bias_detune_rad =
            get_number(c, "circuit.", "carver_bias_detune_rad", 0.0);
        cfg.circuit.receiver_phase_rad = get_number(c, "circuit.", "receiver_phase_rad", 0.0);
        cfg.circuit.p2p_loss_db = get_number(c, "circuit.", "p2p_loss_db", def.p2p_loss_db);
        cfg.circuit.timebin.bin_separation_s =
            get_number(c, "circuit.", "bin_separation_s", def.timebin.bin_separation_s);
        cfg.circuit.timebin.pulse_fwhm_s =
            get_number(c, "circuit.", "pulse_fwhm_s",
                       cow ? 175e-12 : def.timebin.pulse_fwhm_s);
        cfg.circuit.timebin.delay_loss_db =
            get_number(c, "circuit.", "delay_loss_db", def.timebin.delay_loss_db);
    } else if (cow) {
        cfg.circuit.monitor_delay_s = 1.0 / cfg.protocol.clock_hz;
        cfg.circuit.timebin.pulse_fwhm_s = 175e-12;
    }

    cfg.seed = get_uint(root, "", "seed", 1);
    cfg.num_symbols = get_uint(root, "", "num_symbols", 1000000);

    if (root.contains("output")) {
        const json& o = root.at("output");
        reject_unknown_keys(o, "output.", {"dir", "formats"});
        if (o.contains("dir")) {
            if (!o.at("dir").is_string()) {
                throw ConfigError("config key \"output.dir\" must be a string");
            }
            cfg.output.dir = o.at("dir").get<std::string>();
        }
        if (o.contains("formats")) {
            const json& f = o.at("formats");
            if (!f.is_array()) {
                throw ConfigError("config key \"output.formats\" must be an array");
            }
            cfg.output.csv = false;
            cfg.output.svg = false;
            for (const json& item : f) {
                if (!item.is_string()) {
                    throw ConfigError("config key \"output.formats\" must hold strings");
                }
                const std::string s = item.get<std::string>();
                if (s == "csv") {
                    cfg.output.csv = true;
                } else if (s == "svg") {
                    cfg.output.svg = true;
                } else {
                    throw ConfigError("config key \"output.formats\": unknown format \"" + s +
                                      "\"");
                }
            }
        }
    }

    // Derived default: the dark-count integration window is one clock slot
    // (COW/pol) or one time bin (tb).
    if (cfg.detector.slot_duration_s == 0.0) {
        cfg.detector.slot_duration_s = cfg.protocol.protocol == Protocol::Bb84Tb
                                           ? cfg.circuit.timebin.bin_separation_s
                                           : 1.0 / cfg.protocol.clock_hz;
    }

    validate_scenario(cfg);
    return cfg;
}

}  // namespace

ScenarioConfig parse_config_string(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config_json(root);
}

ScenarioConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_string(buf.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
    json root;
    root["protocol"] = to_string(cfg.protocol.protocol);
    root["clock_hz"] = cfg.protocol.clock_hz;
    root["symbols_per_clock"] = cfg.protocol.symbols_per_clock;
    root["mu"] = cfg.protocol.mu;
    root["decoy_fraction"] = cfg.protocol.decoy_fraction;
    root["basis_probabilities"] = {cfg.protocol.basis_probability_z,
                                   1.0 - cfg.protocol.basis_probability_z};
    root["error_correction_efficiency"] = cfg.protocol.error_correction_efficiency;
    root["channel"] = {{"length_km", cfg.channel.length_km},
                       {"atten_db_per_km", cfg.channel.atten_db_per_km},
                       {"extra_loss_db", cfg.channel.extra_loss_db},
                       {"emulated_by_voa", cfg.channel.emulated_by_voa}};
    root["detector"] = {{"efficiency", cfg.detector.efficiency},
                        {"dark_rate_cps", cfg.detector.dark_rate_cps},
                        {"slot_duration_s", cfg.detector.slot_duration_s}};
    root["topm"] = {{"v_2pi_volts", cfg.topm.v_2pi},
                    {"resistance_ohms", cfg.topm.resistance_ohms},
                    {"length_um", cfg.topm.length_um}};
    root["cdm"] = {{"phi_sat_rad", cfg.cdm.phi_sat_rad},
                   {"v_c_volts", cfg.cdm.v_c_volts},
                   {"loss0_db", cfg.cdm.loss0_db},
                   {"loss_relief_db", cfg.cdm.loss_relief_db},
                   {"v_t_volts", cfg.cdm.v_t_volts},
                   {"length_mm", cfg.cdm.length_mm}};
    root["circuit"] = {{"split_ratio", cfg.circuit.split_ratio},
                       {"monitor_delay_s", cfg.circuit.monitor_delay_s},
                       {"monitor_phase_offset_rad", cfg.circuit.monitor_phase_offset_rad},
                       {"carver_bias_detune_rad", cfg.circuit.carver_bias_detune_rad},
                       {"receiver_phase_rad", cfg.circuit.receiver_phase_rad},
                       {"p2p_loss_db", cfg.circuit.p2p_loss_db},
                       {"bin_separation_s", cfg.circuit.timebin.bin_separation_s},
                       {"pulse_fwhm_s", cfg.circuit.timebin.pulse_fwhm_s},
                       {"delay_loss_db", cfg.circuit.timebin.delay_loss_db}};
    root["seed"] = cfg.seed;
    root["num_symbols"] = cfg.num_symbols;
    json formats = json::array();
    if (cfg.output.csv) formats.push_back("csv");
    if (cfg.output.svg) formats.push_back("svg");
    root["output"] = {{"dir", cfg.output.dir}, {"formats", formats}};
    return root.dump(2) + "\n";
}

std::string config_hash(const ScenarioConfig& cfg) {
    const std::string s = serialize_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Analytic pipelines
// ---------------------------------------------------------------------------

namespace {

ChannelParams at_distance(ChannelParams ch, double km) {
    ch.length_km = km;
    return ch;
}

double cell_click(double signal_mean, double p_dark) {
    return 1.0 - (1.0 - p_dark) * std::exp(-signal_mean);
}

struct CowModel {
    CarverOperatingPoint op;
    Complex bright, dark;  // normalized slot amplitudes
    double leak = 0.0;
    double mu_data = 0.0;  // bright-slot mean on the data line
    double mu_mon = 0.0;   // bright-slot mean on the monitor line
    double p_dark = 0.0;
    double mon_plus = 0.0, mon_minus = 0.0;  // interference fractions for bright-bright
};

CowModel build_cow_model(const ScenarioConfig& cfg, double distance_km) {
    CowModel m;
    m.op = optimize_carver(cfg.topm, cfg.cdm, cfg.circuit.carver_bias_detune_rad);
    if (cfg.circuit.carver_bias_detune_rad == 0.0 && m.op.extinction_db < 25.0) {
        throw std::runtime_error("cow pipeline: carver cannot reach 25 dB extinction");
    }
    const double bright_mag = std::abs(m.op.bright_amplitude);
    m.bright = m.op.bright_amplitude / bright_mag;
    m.dark = m.op.dark_amplitude / bright_mag;
    m.leak = std::norm(m.dark);

    const double T = fibre_transmittance(at_distance(cfg.channel, distance_km));
    const CowSplit split = cow_receiver_split(cfg.circuit.split_ratio);
    const double mu_out = cfg.protocol.mu * T * cfg.detector.efficiency;
    m.mu_data = mu_out * split.data_weight;
    m.mu_mon = mu_out * split.monitor_weight;
    m.p_dark = dark_click_probability(cfg.detector);

    const Complex rot = std::polar(1.0, cfg.circuit.monitor_phase_offset_rad);
    m.mon_plus = std::norm(m.bright + rot * m.bright) / 4.0;
    m.mon_minus = std::norm(m.bright - rot * m.bright) / 4.0;
    return m;
}

DistanceRow evaluate_cow(const ScenarioConfig& cfg, double distance_km) {
    const CowModel m = build_cow_model(cfg, distance_km);

    const double p_sig_c = 1.0 - std::exp(-m.mu_data);
    const double p_sig_w = 1.0 - std::exp(-m.mu_data * m.leak);
    const double p_dark_pair = 1.0 - (1.0 - m.p_dark) * (1.0 - m.p_dark);

    SiftedStats stats;
    stats.qber = expected_qber(p_sig_c, p_sig_w, p_dark_pair);
    stats.click_prob =
        1.0 - (1.0 - p_sig_c) * (1.0 - p_sig_w) * (1.0 - m.p_dark) * (1.0 - m.p_dark);
    const double p_plus = cell_click(m.mu_mon * m.mon_plus, m.p_dark);
    const double p_minus = cell_click(m.mu_mon * m.mon_minus, m.p_dark);
    stats.visibility = (p_plus + p_minus) > 0.0
                           ? std::abs(p_plus - p_minus) / (p_plus + p_minus)
                           : 1.0;
    stats.sifted_rate_hz = cfg.protocol.symbol_rate_hz() * stats.click_prob *
                           (1.0 - cfg.protocol.decoy_fraction);

    const double r = cow_secret_fraction(stats.qber, stats.visibility, cfg.protocol);
    const KeyRateResult key = secret_key_rate(stats, r, cfg.protocol);

    return DistanceRow{distance_km,
                       at_distance(cfg.channel, distance_km).total_loss_db(),
                       stats.click_prob,
                       stats.qber,
                       stats.visibility,
                       key.raw_rate_hz,
                       key.secret_fraction,
                       key.secret_rate_hz};
}

const std::array<Bb84State, 4> kBb84States = {Bb84State{Basis::Z, 0}, Bb84State{Basis::Z, 1},
                                              Bb84State{Basis::X, 0}, Bb84State{Basis::X, 1}};

struct Bb84Model {
    // cells[state][cell]: per-symbol mean photon numbers after all optics.
    // Polarisation: 4 cells (slot 0, port = 2*basis + bit).
    // Time-bin: 6 cells (slot 0..2, port 0..1).
    struct Cell {
        int slot = 0;
        int port = 0;
        double mean = 0.0;
    };
    std::array<std::vector<Cell>, 4> cells;
    double p_dark = 0.0;
    double state_prob_z = 0.5;
};

Bb84Model build_pol_model(const ScenarioConfig& cfg, double distance_km) {
    Bb84Model m;
    m.p_dark = dark_click_probability(cfg.detector);
    m.state_prob_z = cfg.protocol.basis_probability_z;

    const double T = fibre_transmittance(at_distance(cfg.channel, distance_km)) *
                     std::pow(10.0, -cfg.circuit.p2p_loss_db / 10.0);
    const double s_mean = cfg.protocol.mu * T * cfg.detector.efficiency;

    const TransmitterBiases biases = default_bb84_biases(cfg.cdm);
    for (std::size_t i = 0; i < kBb84States.size(); ++i) {
        const PathState prepared =
            prepare_bb84_path_state(kBb84States[i], cfg.topm, cfg.cdm, biases);
        for (int port = 0; port < 4; ++port) {
            const Bb84State det{port < 2 ? Basis::Z : Basis::X, port & 1};
            const double proj = state_fidelity(prepared, ideal_state(det));
            m.cells[i].push_back({0, port, 0.5 * s_mean * proj});
        }
    }
    return m;
}

Bb84Model build_tb_model(const ScenarioConfig& cfg, double distance_km) {
    Bb84Model m;
    m.p_dark = dark_click_probability(cfg.detector);
    m.state_prob_z = cfg.protocol.basis_probability_z;

    const double T = fibre_transmittance(at_distance(cfg.channel, distance_km));
    const double s_mean = cfg.protocol.mu * T * cfg.detector.efficiency;

    for (std::size_t i = 0; i < kBb84States.size(); ++i) {
        TimebinState enc = timebin_encode(kBb84States[i], cfg.topm, cfg.cdm, cfg.circuit.timebin);
        const double n = std::sqrt(enc.norm2());
        enc.amp_early /= n;  // mu is defined at the transmitter output
        enc.amp_late /= n;
        const TimebinTable table = timebin_receive(enc, cfg.circuit.receiver_phase_rad,
                                                   enc.bin_separation_s);
        for (int slot = 0; slot < 3; ++slot) {
            for (int port = 0; port < 2; ++port) {
                m.cells[i].push_back({slot, port, s_mean * table.p[slot][port]});
            }
        }
    }
    return m;
}

DistanceRow evaluate_bb84(const ScenarioConfig& cfg, double distance_km) {
    const Bb84Model m = cfg.protocol.protocol == Protocol::Bb84Pol
                            ? build_pol_model(cfg, distance_km)
                            : build_tb_model(cfg, distance_km);

    double gain = 0.0, errors = 0.0, click = 0.0;
    for (std::size_t i = 0; i < kBb84States.size(); ++i) {
        const Bb84State& sent = kBb84States[i];
        const double weight =
            0.5 * (sent.basis == Basis::Z ? m.state_prob_z : 1.0 - m.state_prob_z);
        double no_click = 1.0;
        for (const auto& cell : m.cells[i]) {
            const double p = cell_click(cell.mean, m.p_dark);
            no_click *= 1.0 - p;
            const Bb84EventDecode d = decode_bb84_event(
                cfg.protocol.protocol, DetectionEvent{0, cell.slot, cell.port, false});
            if (d.basis != sent.basis) {
                continue;
            }
            gain += weight * p;
            if (d.bit != sent.bit) {
                errors += weight * p;
            }
        }
        click += weight * (1.0 - no_click);
    }

    SiftedStats stats;
    stats.qber = errors / gain;
    stats.click_prob = click;
    stats.visibility = kNan;
    stats.sifted_rate_hz = cfg.protocol.symbol_rate_hz() * click * cfg.protocol.sift_factor();

    const double r = bb84_secret_fraction(stats.qber, cfg.protocol.mu, click, cfg.protocol);
    const KeyRateResult key = secret_key_rate(stats, r, cfg.protocol);

    return DistanceRow{distance_km,
                       at_distance(cfg.channel, distance_km).total_loss_db(),
                       click,
                       stats.qber,
                       kNan,
                       key.raw_rate_hz,
                       key.secret_fraction,
                       key.secret_rate_hz};
}

// ---------------------------------------------------------------------------
// Monte Carlo samplers (counter-based draws; layout fixed per symbol)
// ---------------------------------------------------------------------------

struct CowTransmission {
    std::vector<CowSymbol> pattern;
    std::vector<DetectionEvent> events;
};

CowSymbol cow_kind(const ScenarioConfig& cfg, std::uint64_t seed, std::uint64_t s) {
    const double bit_each = (1.0 - cfg.protocol.decoy_fraction) / 2.0;
    const double u = uniform_draw(seed, s, 0);
    if (u < bit_each) return CowSymbol::Bit0;
    if (u < 2.0 * bit_each) return CowSymbol::Bit1;
    return CowSymbol::Decoy;
}

CowTransmission sample_cow(const ScenarioConfig& cfg, const CowModel& m, std::uint64_t n,
                           std::uint64_t seed) {
    CowTransmission tx;
    tx.pattern.reserve(n);
    auto bright_first = [](CowSymbol k) { return k == CowSymbol::Bit0 || k == CowSymbol::Decoy; };
    auto bright_second = [](CowSymbol k) { return k == CowSymbol::Bit1 || k == CowSymbol::Decoy; };

    for (std::uint64_t s = 0; s < n; ++s) {
        const CowSymbol kind = cow_kind(cfg, seed, s);
        tx.pattern.push_back(kind);

        const double mean0 = bright_first(kind) ? m.mu_data : m.mu_data * m.leak;
        const double mean1 = bright_second(kind) ? m.mu_data : m.mu_data * m.leak;

        std::uint64_t draw = 1;
        for (int slot = 0; slot < 2; ++slot) {
            const double mean = slot == 0 ? mean0 : mean1;
            const bool sig = uniform_draw(seed, s, draw++) < 1.0 - std::exp(-mean);
            const bool dark = uniform_draw(seed, s, draw++) < m.p_dark;
            if (sig || dark) {
                tx.events.push_back(DetectionEvent{s, slot, kCowDataPort, dark && !sig});
            }
        }

        // Monitor interference gates: boundary with the previous symbol
        // (slot 0) and the internal pulse-pair boundary (slot 1). Only
        // nominally bright-bright boundaries feed the visibility estimate.
        const bool leading = s > 0 && bright_second(cow_kind(cfg, seed, s - 1)) &&
                             bright_first(kind);
        const bool internal = bright_first(kind) && bright_second(kind);
        const bool gates[2] = {leading, internal};
        for (int b = 0; b < 2; ++b) {
            for (int sign = 0; sign < 2; ++sign) {
                const double mean = m.mu_mon * (sign == 0 ? m.mon_plus : m.mon_minus);
                const bool sig =
                    gates[b] && uniform_draw(seed, s, draw) < 1.0 - std::exp(-mean);
                ++draw;
                const bool dark = gates[b] && uniform_draw(seed, s, draw) < m.p_dark;
                ++draw;
                if (sig || dark) {
                    const int port = sign == 0 ? kCowMonitorConstructive : kCowMonitorDestructive;
                    tx.events.push_back(DetectionEvent{s, b, port, dark && !sig});
                }
            }
        }
    }
    return tx;
}

struct Bb84Transmission {
    std::vector<Bb84State> states;
    std::vector<DetectionEvent> events;
};

Bb84Transmission sample_bb84(const Bb84Model& m, std::uint64_t n, std::uint64_t seed) {
    Bb84Transmission tx;
    tx.states.reserve(n);
    const double pz = m.state_prob_z;
    for (std::uint64_t s = 0; s < n; ++s) {
        const double u = uniform_draw(seed, s, 0);
        std::size_t idx;
        if (u < pz / 2.0) {
            idx = 0;
        } else if (u < pz) {
            idx = 1;
        } else if (u < pz + (1.0 - pz) / 2.0) {
            idx = 2;
        } else {
            idx = 3;
        }
        tx.states.push_back(kBb84States[idx]);

        std::uint64_t draw = 1;
        for (const auto& cell : m.cells[idx]) {
            const bool sig = uniform_draw(seed, s, draw++) < 1.0 - std::exp(-cell.mean);
            const bool dark = uniform_draw(seed, s, draw++) < m.p_dark;
            if (sig || dark) {
                tx.events.push_back(DetectionEvent{s, cell.slot, cell.port, dark && !sig});
            }
        }
    }
    return tx;
}

}  // namespace

DistanceRow evaluate_analytic(const ScenarioConfig& cfg, double distance_km) {
    if (distance_km < 0.0) {
        throw std::invalid_argument("evaluate_analytic: distance must be >= 0");
    }
    return cfg.protocol.protocol == Protocol::Cow ? evaluate_cow(cfg, distance_km)
                                                  : evaluate_bb84(cfg, distance_km);
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    ScenarioResult result;
    result.config = cfg;
    result.hash = config_hash(cfg);
    result.version = kVersion;
    result.rows.push_back(evaluate_analytic(cfg, cfg.channel.length_km));

    if (cfg.num_symbols > 0) {
        const auto bound = default_security_bound(cfg.protocol.protocol);
        McSummary mc;
        mc.num_symbols = cfg.num_symbols;
        if (cfg.protocol.protocol == Protocol::Cow) {
            const CowModel model = build_cow_model(cfg, cfg.channel.length_km);
            CowTransmission tx = sample_cow(cfg, model, cfg.num_symbols, cfg.seed);
            mc.stats = sift_cow(tx.events, tx.pattern, cfg.protocol);
            result.events = std::move(tx.events);
        } else {
            const Bb84Model model = cfg.protocol.protocol == Protocol::Bb84Pol
                                        ? build_pol_model(cfg, cfg.channel.length_km)
                                        : build_tb_model(cfg, cfg.channel.length_km);
            Bb84Transmission tx = sample_bb84(model, cfg.num_symbols, cfg.seed);
            mc.stats = sift_bb84(tx.events, tx.states, cfg.protocol);
            result.events = std::move(tx.events);
        }
        mc.num_events = result.events.size();
        mc.rates = secret_key_rate(mc.stats, bound->secret_fraction(mc.stats, cfg.protocol),
                                   cfg.protocol);
        result.mc = mc;
    }
    return result;
}

ScenarioResult sweep_distance(const ScenarioConfig& cfg, const std::vector<double>& distances_km) {
    if (distances_km.empty()) {
        throw std::invalid_argument("sweep_distance: empty distance list");
    }
    if (!std::is_sorted(distances_km.begin(), distances_km.end()) || distances_km.front() < 0.0) {
        throw std::invalid_argument("sweep_distance: distances must be sorted and non-negative");
    }
    ScenarioResult result;
    result.config = cfg;
    result.hash = config_hash(cfg);
    result.version = kVersion;
    for (double d : distances_km) {
        result.rows.push_back(evaluate_analytic(cfg, d));
        if (!result.cutoff_km && result.rows.back().secret_rate_hz <= 0.0) {
            result.cutoff_km = d;
        }
    }
    return result;
}

CalibrationResult calibrate(const ScenarioConfig& cfg, CalibrationKnob knob, double target_qber,
                            double distance_km) {
    if (!(target_qber > 0.0 && target_qber < 0.5)) {
        throw ConfigError("calibrate: target QBER must lie in (0, 0.5)");
    }
    auto with_value = [&](double v) {
        ScenarioConfig c = cfg;
        if (knob == CalibrationKnob::Mu) {
            c.protocol.mu = v;
        } else {
            c.channel.extra_loss_db = v;
        }
        return c;
    };
    auto qber_at = [&](double v) { return evaluate_analytic(with_value(v), distance_km).qber; };

    double lo, hi;
    bool decreasing;
    if (knob == CalibrationKnob::Mu) {
        // QBER falls with mu out of the dark-dominated regime and rises
        // again once the correct-slot detector saturates; fit on the
        // falling branch up to the minimum.
        lo = 1e-6;
        double best_mu = lo, best_q = qber_at(lo);
        for (int i = 0; i <= 120; ++i) {
            const double mu = std::exp(std::log(1e-6) + i * (std::log(10.0) - std::log(1e-6)) / 120.0);
            const double q = qber_at(mu);
            if (q < best_q) {
                best_q = q;
                best_mu = mu;
            }
        }
        hi = best_mu;
        decreasing = true;
        if (target_qber < best_q - 1e-12 || target_qber > qber_at(lo)) {
            throw ConfigError("calibrate: target QBER is not bracketed by the knob range");
        }
    } else {
        // QBER grows with extra loss as darks take over.
        lo = 0.0;
        hi = 60.0;
        decreasing = false;
        if (target_qber < qber_at(lo) || target_qber > qber_at(hi)) {
            throw ConfigError("calibrate: target QBER is not bracketed by the knob range");
        }
    }
    double mid = lo;
    for (int i = 0; i < 200; ++i) {
        mid = 0.5 * (lo + hi);
        const double q = qber_at(mid);
        if (std::abs(q - target_qber) <= 1e-4) {
            break;
        }
        const bool go_up = decreasing ? q > target_qber : q < target_qber;
        (go_up ? lo : hi) = mid;
    }

    CalibrationResult res;
    res.fitted_value = mid;
    res.achieved_qber = qber_at(mid);
    res.config = with_value(mid);
    if (std::abs(res.achieved_qber - target_qber) > 1e-4) {
        throw ConfigError("calibrate: could not reach the target QBER within tolerance");
    }
    return res;
}

}  // namespace qksim
