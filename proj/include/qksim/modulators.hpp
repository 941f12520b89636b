#pragma once

#include "qksim/optics.hpp"

// Voltage models for the two phase-shifter families used by the transmitter
// circuits: thermo-optic modulators (slow, lossless, phase ~ V^2) and
// carrier-depletion modulators (fast, saturating phase, voltage-dependent
// loss). Both are plain parameter records; refitted curves can be injected
// through the scenario config.

namespace qksim {

struct TopmParams {
    double v_2pi = 24.0;            // volts for a full 2*pi shift
    double resistance_ohms = 6140;  // informational
    double length_um = 150.0;       // informational
};

struct CdmParams {
    double phi_sat_rad = 0.95 * 3.14159265358979323846;  // asymptotic phase
    double v_c_volts = 3.0;                              // phase saturation constant
    double loss0_db = 5.0;                               // insertion loss at 0 V
    double loss_relief_db = 2.0;                         // loss reduction amplitude
    double v_t_volts = 4.0;                              // loss-relief constant
    double length_mm = 1.5;                              // informational
};

/// Basic invariant checks; throws std::invalid_argument naming the field.
void validate(const TopmParams& p);
void validate(const CdmParams& p);

/// 2*pi * (v / v_2pi)^2. Symmetric in v; no transmission change.
double topm_phase(const TopmParams& p, double volts);

/// Inverse of topm_phase on v >= 0. Rejects negative phase.
double topm_voltage_for_phase(const TopmParams& p, double phase_rad);

/// phi_sat * (1 - exp(-v / v_c)). Reverse bias only: rejects v < 0.
double cdm_phase(const CdmParams& p, double volts);

/// Exact inverse of cdm_phase. Phases at or above phi_sat are unreachable
/// and rejected.
double cdm_voltage_for_phase(const CdmParams& p, double phase_rad);

/// Insertion loss in dB at the given reverse bias:
/// loss0 - relief * (1 - exp(-v / v_t)), non-increasing in v.
double cdm_transmission_db(const CdmParams& p, double volts);

/// The single complex factor a photonic arm sees:
/// attenuation_from_db(loss(v)) * exp(i * phase(v)).
Complex cdm_arm_factor(const CdmParams& p, double volts);

}  // namespace qksim
