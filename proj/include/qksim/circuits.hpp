#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qksim/modulators.hpp"
#include "qksim/optics.hpp"

// The three transmitter circuits and two receiver circuits, assembled from
// MMI couplers, thermo-optic DC biases, and carrier-depletion modulators.
//
// State preparation follows the combined TOPM+CDM scheme: the TOPMs bias the
// MZI to emit (|0> + i|1>)/sqrt(2), and each of four CDMs (two inside the
// MZI, two on the output rails) is driven by at most pi/2 to reach one of
// the four BB84 states. The residual error is the CDM's voltage-dependent
// loss, which unbalances the interferometer.

namespace qksim {

enum class Basis { Z, X };

struct Bb84State {
    Basis basis = Basis::Z;
    int bit = 0;  // 0 or 1
};

/// Named DC phases and two-level CDM drives for a transmitter.
/// CDM names used by the BB84 circuit: "mzi_top", "mzi_bottom", "rail0",
/// "rail1" (same names for the TOPMs).
struct TransmitterBiases {
    struct DriveLevels {
        double rest_volts = 0.0;
        double drive_volts = 0.0;
    };
    std::map<std::string, double> topm_phases;
    std::map<std::string, DriveLevels> cdm_drive_voltages;
};

/// Rest voltage 0, drive at the pi/2 point of the CDM model, TOPM offsets
/// pi/2 inside the MZI and pi/2 on rail 1 (the |+i> bias point).
TransmitterBiases default_bb84_biases(const CdmParams& cdm);

/// Enforces the pi/2 cap on every CDM drive (phase(drive) - phase(rest)
/// <= pi/2 + 1e-6). Throws std::invalid_argument otherwise.
void validate_biases(const TransmitterBiases& biases, const CdmParams& cdm);

/// Runs the path-encoded BB84 transmitter: MZI with per-arm TOPM+CDM, then
/// per-rail external TOPM+CDM. With every CDM at rest the output is |+i> up
/// to global phase and loss; driving the CDM assigned to `state` by pi/2
/// produces that BB84 state.
PathState prepare_bb84_path_state(const Bb84State& state, const TopmParams& topm,
                                  const CdmParams& cdm, const TransmitterBiases& biases);

PathState prepare_bb84_path_state(const Bb84State& state, const TopmParams& topm,
                                  const CdmParams& cdm);

/// Ideal amplitudes of a BB84 state on the {rail0, rail1} basis.
PathState ideal_state(const Bb84State& state);

/// |<ideal|actual>|^2 with the actual state renormalized (loss factored
/// out). The ideal state must have unit norm; a zero-norm actual state is
/// rejected.
double state_fidelity(const PathState& actual, const PathState& ideal);

/// 10*log10(P_target / P_orthogonal) of the renormalized state. Returns
/// +infinity when the orthogonal projection vanishes.
double extinction_ratio_db(const PathState& prepared, const Bb84State& target);

// ---------------------------------------------------------------------------
// COW pulse carver and receiver
// ---------------------------------------------------------------------------

enum class CowSymbol { Bit0, Bit1, Decoy, Vacuum };

struct PulseTrainSlot {
    double intensity = 0.0;       // relative power, bright slot == 1
    double slot_duration_s = 0.0;
    Complex amplitude{0.0, 0.0};  // carries the optical phase; |amp|^2 == intensity
};

/// Operating point of the pulse-carving MZI: TOPM bias sets the dark output,
/// one arm CDM is driven to open it.
struct CarverOperatingPoint {
    double bias_phase_rad = 0.0;   // net DC arm phase difference
    double rest_volts = 0.0;
    double drive_volts = 0.0;
    double extinction_db = 0.0;    // achieved bright/dark ratio
    Complex bright_amplitude{0.0, 0.0};  // absolute, before normalization
    Complex dark_amplitude{0.0, 0.0};
};

/// Searches drive voltage (grid + golden-section refine) for the best
/// bright/dark ratio with the drive phase capped strictly below pi/2.
/// `bias_detune_rad` shifts the TOPM bias off the dark point, reproducing a
/// finite experimental extinction ratio.
CarverOperatingPoint optimize_carver(const TopmParams& topm, const CdmParams& cdm,
                                     double bias_detune_rad = 0.0, double max_drive_volts = 12.0);

/// Two slots per symbol, intensities normalized to the bright level:
/// Bit0 -> (bright, dark), Bit1 -> (dark, bright), Decoy -> (bright, bright),
/// Vacuum -> (dark, dark). When no operating point is supplied the carver is
/// optimized first and must reach 25 dB extinction; otherwise it throws.
std::vector<PulseTrainSlot> carve_pulse_train(std::span<const CowSymbol> pattern,
                                              const TopmParams& topm, const CdmParams& cdm,
                                              double slot_duration_s);

std::vector<PulseTrainSlot> carve_pulse_train(std::span<const CowSymbol> pattern,
                                              const CarverOperatingPoint& op,
                                              double slot_duration_s);

/// Interference contrast between successive occupied slots after the monitor
/// AMZI (delay = one slot period, matched within 1%). Counted events are
/// consecutive slot pairs that are both nominally occupied; V is formed from
/// the mean constructive- and destructive-port intensities at the given
/// receiver phase. Throws when no such pair exists.
double cow_monitor_visibility(std::span<const PulseTrainSlot> train, double monitor_delay_s,
                              double receiver_phase_rad = 0.0);

struct CowSplit {
    double data_weight = 0.0;
    double monitor_weight = 0.0;
};

/// Data/monitor power split of the receiver's routing MZI; ratio must lie
/// strictly inside (0, 1).
CowSplit cow_receiver_split(double split_ratio);

// ---------------------------------------------------------------------------
// Polarisation and time-bin encodings
// ---------------------------------------------------------------------------

/// Rail0 -> H, rail1 -> V on the 2D grating coupler; amplitudes are kept and
/// the converter's fixed insertion loss is applied.
PathState path_to_polarisation(const PathState& state, double converter_loss_db);

struct TimebinState {
    Complex amp_early{0.0, 0.0};
    Complex amp_late{0.0, 0.0};
    double bin_separation_s = 1.5e-9;
    double pulse_fwhm_s = 350e-12;  // metadata

    double norm2() const { return std::norm(amp_early) + std::norm(amp_late); }
};

/// Geometry/tuning knobs of the time-bin transmitter.
struct TimebinCircuitParams {
    double bin_separation_s = 1.5e-9;
    double pulse_fwhm_s = 350e-12;
    double delay_loss_db = 4.95;  // long-arm delay line
};

/// Time-bin transmitter: AMZI with the 1.5 ns delay in the long arm, a
/// tunable-splitter MZI balancing the short arm, per-arm CDMs for |+>/|->
/// and a selector MZI choosing the output bin for Z states. The balance is
/// calibrated at the |+> drive condition so both bins leave with equal
/// amplitude. Throws when the required balance falls outside the tunable
/// splitter's range.
TimebinState timebin_encode(const Bb84State& state, const TopmParams& topm, const CdmParams& cdm,
                            const TimebinCircuitParams& circuit = {});

/// P[slot][port] for the three output time slots of the decoding AMZI;
/// slot 0 = early/short, slot 2 = late/long, slot 1 interferes early-long
/// with late-short: P[1][0] = |a_late + e^{i phase} a_early|^2 / 4, so port 0
/// is the constructive port at zero receiver phase.
struct TimebinTable {
    std::array<std::array<double, 2>, 3> p{};

    double total() const;
};

/// Matched AMZI receiver (delay within 1% of the bin separation, else
/// rejected). Path amplitude transmissions default to a balanced, lossless
/// interferometer; receiver insertion loss is accounted in the link budget.
TimebinTable timebin_receive(const TimebinState& state, double receiver_phase_rad,
                             double receiver_delay_s, double short_arm_transmission = 1.0,
                             double long_arm_transmission = 1.0);

}  // namespace qksim
