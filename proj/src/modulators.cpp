#include "qksim/modulators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qksim {

void validate(const TopmParams& p) {
    if (!(p.v_2pi > 0.0)) {
        throw std::invalid_argument("topm.v_2pi must be > 0");
    }
}

void validate(const CdmParams& p) {
    if (!(p.phi_sat_rad > 0.0)) {
        throw std::invalid_argument("cdm.phi_sat_rad must be > 0");
    }
    if (!(p.v_c_volts > 0.0)) {
        throw std::invalid_argument("cdm.v_c_volts must be > 0");
    }
    if (p.loss0_db < 0.0) {
        throw std::invalid_argument("cdm.loss0_db must be >= 0");
    }
    if (!(p.v_t_volts > 0.0)) {
        throw std::invalid_argument("cdm.v_t_volts must be > 0");
    }
    // Loss approaches loss0 - relief as v grows; it must stay non-negative.
    if (p.loss_relief_db < 0.0 || p.loss_relief_db > p.loss0_db) {
        throw std::invalid_argument("cdm.loss_relief_db must lie in [0, loss0_db]");
    }
    // The state-preparation scheme relies on the measured saturation below pi
    // at 8 V reverse bias.
    if (cdm_phase(p, 8.0) >= std::numbers::pi) {
        throw std::invalid_argument("cdm: phase at 8 V must stay below pi");
    }
}

double topm_phase(const TopmParams& p, double volts) {
    const double x = volts / p.v_2pi;
    return 2.0 * std::numbers::pi * x * x;
}

double topm_voltage_for_phase(const TopmParams& p, double phase_rad) {
    if (phase_rad < 0.0) {
        throw std::invalid_argument("topm_voltage_for_phase: phase must be >= 0");
    }
    return p.v_2pi * std::sqrt(phase_rad / (2.0 * std::numbers::pi));
}

double cdm_phase(const CdmParams& p, double volts) {
    if (volts < 0.0) {
        throw std::invalid_argument("cdm_phase: forward bias (v < 0) is outside the model");
    }
    return p.phi_sat_rad * (1.0 - std::exp(-volts / p.v_c_volts));
}

double cdm_voltage_for_phase(const CdmParams& p, double phase_rad) {
    if (phase_rad < 0.0) {
        throw std::invalid_argument("cdm_voltage_for_phase: phase must be >= 0");
    }
    if (phase_rad >= p.phi_sat_rad) {
        throw std::invalid_argument("cdm_voltage_for_phase: unreachable phase (saturation limit)");
    }
    return -p.v_c_volts * std::log(1.0 - phase_rad / p.phi_sat_rad);
}

double cdm_transmission_db(const CdmParams& p, double volts) {
    if (volts < 0.0) {
        throw std::invalid_argument("cdm_transmission_db: forward bias (v < 0) is outside the model");
    }
    if (p.loss_relief_db < 0.0 || p.loss_relief_db > p.loss0_db) {
        throw std::invalid_argument("cdm_transmission_db: loss would go negative at large v");
    }
    return p.loss0_db - p.loss_relief_db * (1.0 - std::exp(-volts / p.v_t_volts));
}

Complex cdm_arm_factor(const CdmParams& p, double volts) {
    return std::polar(attenuation_from_db(cdm_transmission_db(p, volts)), cdm_phase(p, volts));
}

}  // namespace qksim
