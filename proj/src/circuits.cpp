#include "qksim/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qksim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = kPi / 2.0;

const TransmitterBiases::DriveLevels& levels_for(const TransmitterBiases& biases,
                                                 const std::string& name) {
    auto it = biases.cdm_drive_voltages.find(name);
    if (it == biases.cdm_drive_voltages.end()) {
        throw std::invalid_argument("transmitter biases: missing CDM \"" + name + "\"");
    }
    return it->second;
}

double topm_bias(const TransmitterBiases& biases, const std::string& name) {
    auto it = biases.topm_phases.find(name);
    if (it == biases.topm_phases.end()) {
        throw std::invalid_argument("transmitter biases: missing TOPM \"" + name + "\"");
    }
    return it->second;
}

/// Which CDM a pi/2 drive turns |+i> into the requested state.
std::string drive_name_for(const Bb84State& s) {
    if (s.basis == Basis::Z) {
        return s.bit == 0 ? "mzi_top" : "mzi_bottom";
    }
    return s.bit == 0 ? "rail0" : "rail1";
}

}  // namespace

TransmitterBiases default_bb84_biases(const CdmParams& cdm) {
    TransmitterBiases b;
    b.topm_phases = {{"mzi_top", kHalfPi}, {"mzi_bottom", 0.0}, {"rail0", 0.0}, {"rail1", kHalfPi}};
    const double rest = 0.0;
    const double target = cdm_phase(cdm, rest) + kHalfPi;
    if (target >= cdm.phi_sat_rad) {
        throw std::invalid_argument(
            "default_bb84_biases: pi/2 drive unreachable under CDM saturation");
    }
    const double drive = cdm_voltage_for_phase(cdm, target);
    for (const char* name : {"mzi_top", "mzi_bottom", "rail0", "rail1"}) {
        b.cdm_drive_voltages[name] = {rest, drive};
    }
    return b;
}

void validate_biases(const TransmitterBiases& biases, const CdmParams& cdm) {
    constexpr double kCap = kHalfPi + 1e-6;
    for (const auto& [name, lv] : biases.cdm_drive_voltages) {
        const double shift = cdm_phase(cdm, lv.drive_volts) - cdm_phase(cdm, lv.rest_volts);
        if (shift < 0.0 || shift > kCap) {
            throw std::invalid_argument("transmitter biases: CDM \"" + name +
                                        "\" drive phase exceeds the pi/2 cap");
        }
    }
}

PathState prepare_bb84_path_state(const Bb84State& state, const TopmParams& topm,
                                  const CdmParams& cdm, const TransmitterBiases& biases) {
    validate(topm);
    validate(cdm);
    validate_biases(biases, cdm);

    const std::string driven = drive_name_for(state);
    auto volts = [&](const char* name) {
        const auto& lv = levels_for(biases, name);
        return driven == name ? lv.drive_volts : lv.rest_volts;
    };

    const Complex arm_top =
        std::polar(1.0, topm_bias(biases, "mzi_top")) * cdm_arm_factor(cdm, volts("mzi_top"));
    const Complex arm_bottom =
        std::polar(1.0, topm_bias(biases, "mzi_bottom")) * cdm_arm_factor(cdm, volts("mzi_bottom"));

    PathState s{{1.0, 0.0}, {0.0, 0.0}, 1.0};
    s = apply(mzi_transfer(arm_top, arm_bottom), s);
    s.amp0 *= std::polar(1.0, topm_bias(biases, "rail0")) * cdm_arm_factor(cdm, volts("rail0"));
    s.amp1 *= std::polar(1.0, topm_bias(biases, "rail1")) * cdm_arm_factor(cdm, volts("rail1"));
    return s;
}

PathState prepare_bb84_path_state(const Bb84State& state, const TopmParams& topm,
                                  const CdmParams& cdm) {
    return prepare_bb84_path_state(state, topm, cdm, default_bb84_biases(cdm));
}

PathState ideal_state(const Bb84State& state) {
    const double s = 1.0 / std::sqrt(2.0);
    if (state.basis == Basis::Z) {
        return state.bit == 0 ? PathState{{1.0, 0.0}, {0.0, 0.0}, 1.0}
                              : PathState{{0.0, 0.0}, {1.0, 0.0}, 1.0};
    }
    return state.bit == 0 ? PathState{{s, 0.0}, {s, 0.0}, 1.0}
                          : PathState{{s, 0.0}, {-s, 0.0}, 1.0};
}

double state_fidelity(const PathState& actual, const PathState& ideal) {
    if (std::abs(ideal.norm2() - 1.0) > 1e-6) {
        throw std::invalid_argument("state_fidelity: ideal state must have unit norm");
    }
    const double n2 = actual.norm2();
    if (n2 <= 0.0) {
        throw std::invalid_argument("state_fidelity: zero-norm actual state");
    }
    const Complex overlap = std::conj(ideal.amp0) * actual.amp0 + std::conj(ideal.amp1) * actual.amp1;
    return std::norm(overlap) / n2;
}

double extinction_ratio_db(const PathState& prepared, const Bb84State& target) {
    const double f = state_fidelity(prepared, ideal_state(target));
    const double orth = 1.0 - f;
    if (orth <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(f / orth);
}

// ---------------------------------------------------------------------------
// COW pulse carver
// ---------------------------------------------------------------------------

namespace {

/// Cross-port amplitude of the carving MZI for given top-arm drive voltage.
/// Both arms hold a CDM; the bottom one stays at rest so the dark condition
/// is set purely by the TOPM bias.
Complex carver_output(const CdmParams& cdm, double bias_phase, double rest_v, double top_v) {
    const Complex top = std::polar(1.0, bias_phase) * cdm_arm_factor(cdm, top_v);
    const Complex bottom = cdm_arm_factor(cdm, rest_v);
    const PathState out = apply(mzi_transfer(top, bottom), PathState{{1.0, 0.0}, {0.0, 0.0}, 1.0});
    return out.amp1;
}

}  // namespace

CarverOperatingPoint optimize_carver(const TopmParams& topm, const CdmParams& cdm,
                                     double bias_detune_rad, double max_drive_volts) {
    validate(topm);
    validate(cdm);

    CarverOperatingPoint op;
    op.rest_volts = 0.0;
    op.bias_phase_rad = kPi + bias_detune_rad;
    op.dark_amplitude = carver_output(cdm, op.bias_phase_rad, op.rest_volts, op.rest_volts);

    // Drive phase stays strictly below pi/2; the voltage cap may bind first.
    const double rest_phase = cdm_phase(cdm, op.rest_volts);
    const double max_shift = std::min(kHalfPi * (1.0 - 1e-9),
                                      cdm_phase(cdm, max_drive_volts) - rest_phase);
    const double dark_power = std::norm(op.dark_amplitude);

    auto bright_power = [&](double shift) {
        const double v = cdm_voltage_for_phase(cdm, rest_phase + shift);
        return std::norm(carver_output(cdm, op.bias_phase_rad, op.rest_volts, v));
    };

    constexpr int kGrid = 256;
    double best_shift = max_shift, best_power = -1.0;
    for (int i = 1; i <= kGrid; ++i) {
        const double shift = max_shift * i / kGrid;
        const double p = bright_power(shift);
        if (p > best_power) {
            best_power = p;
            best_shift = shift;
        }
    }
    // Golden-section refine around the best grid cell.
    double lo = std::max(0.0, best_shift - max_shift / kGrid);
    double hi = std::min(max_shift, best_shift + max_shift / kGrid);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 60; ++it) {
        const double x1 = hi - gr * (hi - lo);
        const double x2 = lo + gr * (hi - lo);
        if (bright_power(x1) < bright_power(x2)) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    const double refined = (lo + hi) / 2.0;
    if (bright_power(refined) > best_power) {
        best_shift = refined;
    }

    op.drive_volts = cdm_voltage_for_phase(cdm, rest_phase + best_shift);
    op.bright_amplitude = carver_output(cdm, op.bias_phase_rad, op.rest_volts, op.drive_volts);
    const double bright = std::norm(op.bright_amplitude);
    op.extinction_db = dark_power > 0.0 ? 10.0 * std::log10(bright / dark_power)
                                        : std::numeric_limits<double>::infinity();
    return op;
}

std::vector<PulseTrainSlot> carve_pulse_train(std::span<const CowSymbol> pattern,
                                              const TopmParams& topm, const CdmParams& cdm,
                                              double slot_duration_s) {
    const CarverOperatingPoint op = optimize_carver(topm, cdm);
    if (op.extinction_db < 25.0) {
        throw std::runtime_error(
            "carve_pulse_train: no drive voltage within the CDM range reaches 25 dB extinction");
    }
    return carve_pulse_train(pattern, op, slot_duration_s);
}

std::vector<PulseTrainSlot> carve_pulse_train(std::span<const CowSymbol> pattern,
                                              const CarverOperatingPoint& op,
                                              double slot_duration_s) {
    if (pattern.empty()) {
        throw std::invalid_argument("carve_pulse_train: empty pattern");
    }
    const double bright_mag = std::abs(op.bright_amplitude);
    if (bright_mag <= 0.0) {
        throw std::invalid_argument("carve_pulse_train: carver bright level vanishes");
    }
    const Complex bright = op.bright_amplitude / bright_mag;
    const Complex dark = op.dark_amplitude / bright_mag;

    std::vector<PulseTrainSlot> train;
    train.reserve(2 * pattern.size());
    auto push = [&](Complex a) {
        train.push_back(PulseTrainSlot{std::norm(a), slot_duration_s, a});
    };
    for (const CowSymbol sym : pattern) {
        switch (sym) {
            case CowSymbol::Bit0:
                push(bright);
                push(dark);
                break;
            case CowSymbol::Bit1:
                push(dark);
                push(bright);
                break;
            case CowSymbol::Decoy:
                push(bright);
                push(bright);
                break;
            case CowSymbol::Vacuum:
                push(dark);
                push(dark);
                break;
        }
    }
    return train;
}

double cow_monitor_visibility(std::span<const PulseTrainSlot> train, double monitor_delay_s,
                              double receiver_phase_rad) {
    if (train.size() < 2) {
        throw std::invalid_argument("cow_monitor_visibility: train too short");
    }
    const double slot = train.front().slot_duration_s;
    if (slot <= 0.0 || std::abs(monitor_delay_s / slot - 1.0) > 0.01) {
        throw std::invalid_argument(
            "cow_monitor_visibility: monitor delay must equal one slot period within 1%");
    }

    double peak = 0.0;
    for (const auto& s : train) {
        peak = std::max(peak, s.intensity);
    }
    const double occupied = 0.5 * peak;

    const Complex rot = std::polar(1.0, receiver_phase_rad);
    double constructive = 0.0, destructive = 0.0;
    std::size_t events = 0;
    for (std::size_t t = 1; t < train.size(); ++t) {
        if (train[t - 1].intensity < occupied || train[t].intensity < occupied) {
            continue;
        }
        const Complex a = train[t].amplitude;
        const Complex b = rot * train[t - 1].amplitude;
        constructive += std::norm(a + b) / 4.0;
        destructive += std::norm(a - b) / 4.0;
        ++events;
    }
    if (events == 0) {
        throw std::runtime_error("cow_monitor_visibility: insufficient successive-pulse events");
    }
    const double total = constructive + destructive;
    if (total <= 0.0) {
        throw std::runtime_error("cow_monitor_visibility: no monitor intensity");
    }
    return std::abs(constructive - destructive) / total;
}

CowSplit cow_receiver_split(double split_ratio) {
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
        throw std::invalid_argument("cow_receiver_split: ratio must lie strictly inside (0, 1)");
    }
    return CowSplit{split_ratio, 1.0 - split_ratio};
}

// ---------------------------------------------------------------------------
// Polarisation and time-bin encodings
// ---------------------------------------------------------------------------

PathState path_to_polarisation(const PathState& state, double converter_loss_db) {
    const double t = attenuation_from_db(converter_loss_db);
    return PathState{state.amp0 * t, state.amp1 * t, state.mean_photon_number};
}

TimebinState timebin_encode(const Bb84State& state, const TopmParams& topm, const CdmParams& cdm,
                            const TimebinCircuitParams& circuit) {
    validate(topm);
    validate(cdm);

    const double rest_v = 0.0;
    const double rest_phase = cdm_phase(cdm, rest_v);
    if (rest_phase + kHalfPi >= cdm.phi_sat_rad) {
        throw std::invalid_argument("timebin_encode: pi/2 drive unreachable under CDM saturation");
    }
    const double drive_v = cdm_voltage_for_phase(cdm, rest_phase + kHalfPi);

    const double delay_t = attenuation_from_db(circuit.delay_loss_db);
    const Complex rest_factor = cdm_arm_factor(cdm, rest_v);
    const Complex drive_factor = cdm_arm_factor(cdm, drive_v);

    // Balance is calibrated at the |+> (short-arm drive) condition so both
    // bins leave the chip with equal amplitude for that state.
    const double balance = delay_t * std::abs(rest_factor) / std::abs(drive_factor);
    if (balance > 1.0 + 1e-12) {
        throw std::runtime_error(
            "timebin_encode: loss balance outside the tunable-splitter range");
    }

    const bool drive_short = state.basis == Basis::X && state.bit == 0;
    const bool drive_long = state.basis == Basis::X && state.bit == 1;

    const TransferMatrix2 split = mmi_splitter();
    const Complex short_in =
        split.m00 * balance * (drive_short ? drive_factor : rest_factor);
    const Complex long_in = split.m10 * delay_t * (drive_long ? drive_factor : rest_factor);

    // Selector MZI: biased 50:50 (internal pi/2) for X states; driving its
    // top or bottom CDM routes one bin to the output and blocks the other.
    double sel_top_v = rest_v, sel_bot_v = rest_v;
    if (state.basis == Basis::Z) {
        (state.bit == 0 ? sel_top_v : sel_bot_v) = drive_v;
    }
    const TransferMatrix2 selector =
        mzi_transfer(std::polar(1.0, kHalfPi) * cdm_arm_factor(cdm, sel_top_v),
                     cdm_arm_factor(cdm, sel_bot_v));

    TimebinState out;
    out.amp_early = selector.m00 * short_in;
    out.amp_late = selector.m01 * long_in;
    out.bin_separation_s = circuit.bin_separation_s;
    out.pulse_fwhm_s = circuit.pulse_fwhm_s;
    return out;
}

double TimebinTable::total() const {
    double sum = 0.0;
    for (const auto& row : p) {
        sum += row[0] + row[1];
    }
    return sum;
}

TimebinTable timebin_receive(const TimebinState& state, double receiver_phase_rad,
                             double receiver_delay_s, double short_arm_transmission,
                             double long_arm_transmission) {
    if (state.bin_separation_s <= 0.0 ||
        std::abs(receiver_delay_s / state.bin_separation_s - 1.0) > 0.01) {
        throw std::invalid_argument(
            "timebin_receive: receiver delay must match the bin separation within 1%");
    }
    if (short_arm_transmission < 0.0 || short_arm_transmission > 1.0 ||
        long_arm_transmission < 0.0 || long_arm_transmission > 1.0) {
        throw std::invalid_argument("timebin_receive: arm transmissions must lie in [0, 1]");
    }

    const double ts = short_arm_transmission;
    const Complex tl = std::polar(long_arm_transmission, receiver_phase_rad);
    const Complex ae = state.amp_early;
    const Complex al = state.amp_late;

    // Port 0 collects the constructive combination in the interference slot:
    // out0(t) = (ts a(t) + tl a(t-1)) / 2,  out1(t) = i (ts a(t) - tl a(t-1)) / 2
    TimebinTable table;
    table.p[0][0] = std::norm(ts * ae) / 4.0;
    table.p[0][1] = std::norm(ts * ae) / 4.0;
    table.p[1][0] = std::norm(ts * al + tl * ae) / 4.0;
    table.p[1][1] = std::norm(ts * al - tl * ae) / 4.0;
    table.p[2][0] = std::norm(tl * al) / 4.0;
    table.p[2][1] = std::norm(tl * al) / 4.0;
    return table;
}

}  // namespace qksim
