#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "qksim/optics.hpp"

using namespace qksim;

namespace {

constexpr double kPi = std::numbers::pi;

// Small deterministic generator for property checks.
struct Lcg {
    std::uint64_t state = 0x243F6A8885A308D3ULL;
    double next() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    }
};

double port_power(const TransferMatrix2& m, int out, int in) {
    const Complex a = in == 0 ? (out == 0 ? m.m00 : m.m10) : (out == 0 ? m.m01 : m.m11);
    return std::norm(a);
}

}  // namespace

TEST_CASE("mmi splitter is the symmetric 50:50 coupler") {
    const TransferMatrix2 m = mmi_splitter();
    CHECK(std::abs(std::norm(m.m00) - 0.5) < 1e-12);
    const Complex ratio = m.m01 / m.m00;
    CHECK(std::abs(ratio - Complex{0.0, 1.0}) < 1e-12);
    CHECK(unitarity_defect(m) < 1e-12);

    // Two 50:50 couplers in series form a full swap.
    const TransferMatrix2 twice = m * m;
    CHECK(std::abs(port_power(twice, 1, 0) - 1.0) < 1e-12);
    CHECK(port_power(twice, 0, 0) < 1e-12);
}

TEST_CASE("phase_arm") {
    CHECK(std::abs(phase_arm(0.0, 1.0) - Complex{1.0, 0.0}) < 1e-12);
    CHECK(std::abs(phase_arm(kPi, 1.0) - Complex{-1.0, 0.0}) < 1e-12);

    // 0.5623 = 10^(-5/20), the carrier-depletion arm at zero bias.
    const Complex arm = phase_arm(kPi / 2.0, 0.5623413251903491);
    CHECK(std::abs(arm - Complex{0.0, 0.5623413251903491}) < 1e-12);

    CHECK_THROWS_AS(phase_arm(0.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(phase_arm(0.0, 1.1), std::invalid_argument);
}

TEST_CASE("mzi_transfer settles bar, cross, and 50:50") {
    // Equal arms: input port 0 exits port 1 with probability 1.
    const TransferMatrix2 cross = mzi_transfer({1.0, 0.0}, {1.0, 0.0});
    CHECK(std::abs(port_power(cross, 1, 0) - 1.0) < 1e-12);
    CHECK(port_power(cross, 0, 0) < 1e-12);

    // Pi phase difference: bar state.
    const TransferMatrix2 bar = mzi_transfer(std::polar(1.0, kPi), {1.0, 0.0});
    CHECK(std::abs(port_power(bar, 0, 0) - 1.0) < 1e-12);
    CHECK(port_power(bar, 1, 0) < 1e-12);

    // Pi/2 difference: 50:50.
    const TransferMatrix2 half = mzi_transfer(std::polar(1.0, kPi / 2.0), {1.0, 0.0});
    CHECK(std::abs(port_power(half, 0, 0) - 0.5) < 1e-12);
    CHECK(std::abs(port_power(half, 1, 0) - 0.5) < 1e-12);

    CHECK_THROWS_AS(mzi_transfer({1.5, 0.0}, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("mzi cross-port power follows cos^2(phi/2)") {
    for (int i = 0; i < 100; ++i) {
        const double phi = -2.0 * kPi + 4.0 * kPi * i / 99.0;
        const TransferMatrix2 m = mzi_transfer(std::polar(1.0, phi), {1.0, 0.0});
        const double expected = std::cos(phi / 2.0) * std::cos(phi / 2.0);
        CHECK(std::abs(port_power(m, 1, 0) - expected) < 1e-12);
    }
}

TEST_CASE("apply") {
    const PathState s{{0.6, 0.1}, {0.3, -0.2}, 0.25};

    const TransferMatrix2 identity{{1, 0}, {0, 0}, {0, 0}, {1, 0}};
    const PathState s1 = apply(identity, s);
    CHECK(std::abs(s1.amp0 - s.amp0) < 1e-15);
    CHECK(std::abs(s1.amp1 - s.amp1) < 1e-15);
    CHECK(s1.mean_photon_number == s.mean_photon_number);

    const double t = 0.7;
    const TransferMatrix2 att{{t, 0}, {0, 0}, {0, 0}, {t, 0}};
    CHECK(apply(att, s).norm2() == doctest::Approx(t * t * s.norm2()).epsilon(1e-12));

    const PathState out = apply(mmi_splitter(), PathState{{1, 0}, {0, 0}, 1.0});
    CHECK(std::abs(out.amp0 - Complex{1.0 / std::sqrt(2.0), 0.0}) < 1e-12);
    CHECK(std::abs(out.amp1 - Complex{0.0, 1.0 / std::sqrt(2.0)}) < 1e-12);
}

TEST_CASE("attenuation_from_db") {
    CHECK(attenuation_from_db(0.0) == 1.0);
    CHECK(attenuation_from_db(4.5) == doctest::Approx(0.5956621435290105).epsilon(1e-12));
    const double p = attenuation_from_db(4.5) * attenuation_from_db(4.5);
    CHECK(p == doctest::Approx(0.35481338923357547).epsilon(1e-12));
    const double p3 = attenuation_from_db(3.0) * attenuation_from_db(3.0);
    CHECK(p3 == doctest::Approx(0.5011872336272722).epsilon(1e-12));
    CHECK_THROWS_AS(attenuation_from_db(-0.1), std::invalid_argument);
}

TEST_CASE("attenuation is multiplicative over concatenated losses") {
    Lcg rng;
    for (int i = 0; i < 200; ++i) {
        const double a = rng.next() * 30.0;
        const double b = rng.next() * 30.0;
        CHECK(std::abs(attenuation_from_db(a) * attenuation_from_db(b) -
                       attenuation_from_db(a + b)) < 1e-12);
    }
}

TEST_CASE("compositions of couplers and unit arms stay unitary") {
    Lcg rng;
    for (int i = 0; i < 100; ++i) {
        TransferMatrix2 m = mmi_splitter();
        const int layers = 1 + static_cast<int>(rng.next() * 4);
        for (int l = 0; l < layers; ++l) {
            const Complex top = phase_arm(rng.next() * 2.0 * kPi, 1.0);
            const Complex bot = phase_arm(rng.next() * 2.0 * kPi, 1.0);
            m = mzi_transfer(top, bot) * m;
        }
        CHECK(unitarity_defect(m) < 1e-12);
        CHECK(max_singular_value(m) <= 1.0 + 1e-9);
    }
}

TEST_CASE("energy conservation for passive matrices") {
    Lcg rng;
    for (int i = 0; i < 200; ++i) {
        const bool lossless = rng.next() < 0.3;
        const double t_top = lossless ? 1.0 : rng.next();
        const double t_bot = lossless ? 1.0 : rng.next();
        const TransferMatrix2 m = mzi_transfer(phase_arm(rng.next() * 2.0 * kPi, t_top),
                                               phase_arm(rng.next() * 2.0 * kPi, t_bot));
        const PathState s{{rng.next() - 0.5, rng.next() - 0.5},
                          {rng.next() - 0.5, rng.next() - 0.5},
                          1.0};
        const double before = s.norm2();
        const double after = apply(m, s).norm2();
        CHECK(after <= before + 1e-12);
        if (lossless) {
            CHECK(after == doctest::Approx(before).epsilon(1e-12));
        }
    }
}

TEST_CASE("finite outputs on finite inputs") {
    Lcg rng;
    for (int i = 0; i < 100; ++i) {
        const TransferMatrix2 m = mzi_transfer(phase_arm(rng.next() * 10.0, rng.next()),
                                               phase_arm(rng.next() * 10.0, rng.next()));
        const PathState s = apply(m, PathState{{rng.next(), rng.next()},
                                               {rng.next(), rng.next()},
                                               1.0});
        CHECK(std::isfinite(s.amp0.real()));
        CHECK(std::isfinite(s.amp0.imag()));
        CHECK(std::isfinite(s.amp1.real()));
        CHECK(std::isfinite(s.amp1.imag()));
    }
}
