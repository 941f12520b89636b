#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qksim/modulators.hpp"

using namespace qksim;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("topm phase is quadratic with a 24 V two-pi point") {
    const TopmParams p;
    CHECK(topm_phase(p, 0.0) == 0.0);
    CHECK(topm_phase(p, 24.0) == doctest::Approx(2.0 * kPi).epsilon(1e-15));
    CHECK(topm_phase(p, 12.0) == doctest::Approx(kPi / 2.0).epsilon(1e-15));
    // Quadratic symmetry; no transmission term exists in the model at all.
    for (int i = 0; i <= 100; ++i) {
        const double v = -30.0 + 0.6 * i;
        CHECK(topm_phase(p, -v) == topm_phase(p, v));
    }
}

TEST_CASE("topm voltage inversion") {
    const TopmParams p;
    CHECK(topm_voltage_for_phase(p, 0.0) == 0.0);
    CHECK(topm_voltage_for_phase(p, 2.0 * kPi) == doctest::Approx(24.0).epsilon(1e-12));
    CHECK(topm_voltage_for_phase(p, kPi / 2.0) == doctest::Approx(12.0).epsilon(1e-12));
    for (int i = 1; i <= 50; ++i) {
        const double phase = 4.0 * kPi * i / 50.0;
        CHECK(std::abs(topm_phase(p, topm_voltage_for_phase(p, phase)) - phase) < 1e-9);
    }
    CHECK_THROWS_AS(topm_voltage_for_phase(p, -0.1), std::invalid_argument);
}

TEST_CASE("cdm phase saturates below pi") {
    const CdmParams p;
    CHECK(cdm_phase(p, 0.0) == 0.0);
    CHECK(cdm_phase(p, 8.0) < kPi);
    // Default model evaluated at 3 V: 0.95*pi*(1 - e^{-1}).
    CHECK(cdm_phase(p, 3.0) == doctest::Approx(1.8865720386089277).epsilon(1e-12));
    CHECK_THROWS_AS(cdm_phase(p, -1.0), std::invalid_argument);

    // Strictly increasing and concave over the drive range, and below pi
    // everywhere the paper's devices operate.
    double prev_phase = cdm_phase(p, 0.0);
    double prev_delta = -1.0;
    for (int i = 1; i <= 100; ++i) {
        const double v = 12.0 * i / 100.0;
        const double phase = cdm_phase(p, v);
        const double delta = phase - prev_phase;
        CHECK(phase < kPi);
        CHECK(delta > 0.0);
        if (prev_delta >= 0.0) {
            CHECK(delta < prev_delta);
        }
        prev_delta = delta;
        prev_phase = phase;
    }
}

TEST_CASE("cdm voltage inversion and saturation bound") {
    const CdmParams p;
    CHECK(cdm_voltage_for_phase(p, 0.0) == 0.0);
    // Exact inverse of the default model at pi/2: -3 ln(1 - (pi/2)/(0.95 pi)).
    CHECK(cdm_voltage_for_phase(p, kPi / 2.0) ==
          doctest::Approx(2.241643205490663).epsilon(1e-12));
    for (int i = 1; i < 50; ++i) {
        const double phase = p.phi_sat_rad * i / 50.0;
        CHECK(std::abs(cdm_phase(p, cdm_voltage_for_phase(p, phase)) - phase) < 1e-9);
    }
    CHECK_THROWS_AS(cdm_voltage_for_phase(p, p.phi_sat_rad), std::invalid_argument);
    CHECK_THROWS_AS(cdm_voltage_for_phase(p, 0.96 * kPi), std::invalid_argument);
}

TEST_CASE("cdm transmission recovers with bias") {
    const CdmParams p;
    CHECK(cdm_transmission_db(p, 0.0) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(cdm_transmission_db(p, 8.0) < cdm_transmission_db(p, 0.0));
    // Default model at 4 V: 5 - 2 (1 - e^{-1}).
    CHECK(cdm_transmission_db(p, 4.0) == doctest::Approx(3.7357588823428847).epsilon(1e-12));
    double prev = cdm_transmission_db(p, 0.0);
    for (int i = 1; i <= 100; ++i) {
        const double loss = cdm_transmission_db(p, 12.0 * i / 100.0);
        CHECK(loss >= 0.0);
        CHECK(loss <= prev);
        prev = loss;
    }
    CHECK_THROWS_AS(cdm_transmission_db(p, -1.0), std::invalid_argument);

    CdmParams bad = p;
    bad.loss_relief_db = 6.0;  // would drive the loss negative at large v
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    CHECK_THROWS_AS(cdm_transmission_db(bad, 1.0), std::invalid_argument);
}

TEST_CASE("cdm arm factor ties loss and phase together") {
    const CdmParams p;
    const Complex at_rest = cdm_arm_factor(p, 0.0);
    CHECK(std::abs(at_rest) == doctest::Approx(0.5623413251903491).epsilon(1e-12));
    CHECK(std::arg(at_rest) == doctest::Approx(0.0).epsilon(1e-15));

    double prev_mag = std::abs(at_rest);
    for (int i = 1; i <= 100; ++i) {
        const double v = 12.0 * i / 100.0;
        const Complex f = cdm_arm_factor(p, v);
        CHECK(std::abs(f) >= prev_mag);
        CHECK(std::arg(f) == doctest::Approx(cdm_phase(p, v)).epsilon(1e-12));
        prev_mag = std::abs(f);
    }
}

TEST_CASE("parameter validation names the field") {
    TopmParams t;
    t.v_2pi = 0.0;
    CHECK_THROWS_WITH_AS(validate(t), "topm.v_2pi must be > 0", std::invalid_argument);

    CdmParams c;
    c.phi_sat_rad = -1.0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);

    // A model violating the measured sub-pi saturation at 8 V is rejected.
    CdmParams sat;
    sat.phi_sat_rad = 1.2 * kPi;
    sat.v_c_volts = 1.0;
    CHECK_THROWS_AS(validate(sat), std::invalid_argument);
}
