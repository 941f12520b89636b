#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qksim/protocol.hpp"

using namespace qksim;

namespace {

ProtocolConfig cow_config() {
    ProtocolConfig c;
    c.protocol = Protocol::Cow;
    c.clock_hz = 1.72e9;
    c.symbols_per_clock = 0.5;
    c.mu = 0.05;
    c.decoy_fraction = 0.1;
    return c;
}

ProtocolConfig bb84_config(Protocol p) {
    ProtocolConfig c;
    c.protocol = p;
    c.clock_hz = 1e9;
    c.symbols_per_clock = 1.0;
    c.mu = 0.2;
    c.decoy_fraction = 0.0;
    return c;
}

}  // namespace

TEST_CASE("binary_entropy") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(binary_entropy(0.11) == doctest::Approx(0.499915958164528).epsilon(1e-12));
    CHECK_THROWS_AS(binary_entropy(-0.01), std::invalid_argument);
    CHECK_THROWS_AS(binary_entropy(1.01), std::invalid_argument);

    // Symmetry and concavity (midpoint check) over a sampled grid.
    for (int i = 0; i <= 200; ++i) {
        const double p = i / 200.0;
        CHECK(std::abs(binary_entropy(p) - binary_entropy(1.0 - p)) < 1e-12);
    }
    for (int i = 1; i < 100; ++i) {
        const double p = i / 200.0;
        const double q = 0.5 + i / 300.0;
        const double mid = binary_entropy((p + q) / 2.0);
        CHECK(mid >= (binary_entropy(p) + binary_entropy(q)) / 2.0 - 1e-12);
    }
}

TEST_CASE("cow_secret_fraction") {
    const ProtocolConfig c = cow_config();
    CHECK(cow_secret_fraction(0.0, 1.0, c) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cow_secret_fraction(0.1, 0.0, c) == 0.0);
    CHECK(cow_secret_fraction(0.0101, 0.99, c) ==
          doctest::Approx(0.8731299623498502).epsilon(1e-12));
    CHECK_THROWS_AS(cow_secret_fraction(0.6, 1.0, c), std::invalid_argument);
    CHECK_THROWS_AS(cow_secret_fraction(0.1, 1.1, c), std::invalid_argument);

    // Non-increasing in qber, non-decreasing in visibility, clamped to [0,1].
    for (int vi = 0; vi <= 10; ++vi) {
        const double v = vi / 10.0;
        double prev = 2.0;
        for (int qi = 0; qi <= 50; ++qi) {
            const double r = cow_secret_fraction(qi / 100.0, v, c);
            CHECK(r >= 0.0);
            CHECK(r <= 1.0);
            CHECK(r <= prev + 1e-12);
            prev = r;
        }
    }
    for (int qi = 0; qi <= 10; ++qi) {
        double prev = -1.0;
        for (int vi = 0; vi <= 50; ++vi) {
            const double r = cow_secret_fraction(qi / 25.0 * 0.5, vi / 50.0, c);
            CHECK(r >= prev - 1e-12);
            prev = r;
        }
    }
}

TEST_CASE("bb84_secret_fraction") {
    const ProtocolConfig c = bb84_config(Protocol::Bb84Pol);
    // Single-photon limit: mu -> 0 with qber 0 approaches 1.
    CHECK(bb84_secret_fraction(0.0, 1e-9, 0.5, c) == doctest::Approx(1.0).epsilon(1e-6));
    // Tagging exhausts the key when every click could be multi-photon.
    CHECK(bb84_secret_fraction(0.0, 0.2, 0.017, c) == 0.0);
    CHECK(bb84_secret_fraction(0.011, 0.2, 0.028, c) ==
          doctest::Approx(0.21521963378105946).epsilon(1e-12));
    CHECK_THROWS_AS(bb84_secret_fraction(0.6, 0.2, 0.028, c), std::invalid_argument);
    CHECK_THROWS_AS(bb84_secret_fraction(0.1, 0.2, 0.0, c), std::invalid_argument);

    for (int i = 0; i <= 50; ++i) {
        double prev = 2.0;
        const double click = 0.005 + 0.002 * i;
        for (int qi = 0; qi <= 50; ++qi) {
            const double r = bb84_secret_fraction(qi / 100.0, 0.05, click, c);
            CHECK(r >= 0.0);
            CHECK(r <= 1.0);
            CHECK(r <= prev + 1e-12);
            prev = r;
        }
    }
}

TEST_CASE("security bound interface dispatches to the stand-ins") {
    SiftedStats s;
    s.qber = 0.0101;
    s.visibility = 0.99;
    s.click_prob = 0.028;
    const auto cow = default_security_bound(Protocol::Cow);
    CHECK(cow->secret_fraction(s, cow_config()) ==
          doctest::Approx(0.8731299623498502).epsilon(1e-12));
    s.qber = 0.011;
    const auto bb = default_security_bound(Protocol::Bb84Pol);
    CHECK(bb->secret_fraction(s, bb84_config(Protocol::Bb84Pol)) ==
          doctest::Approx(0.21521963378105946).epsilon(1e-12));
}

TEST_CASE("secret_key_rate formula") {
    const ProtocolConfig c = cow_config();
    SiftedStats s;
    s.click_prob = 0.01;
    const KeyRateResult zero = secret_key_rate(s, 0.0, c);
    CHECK(zero.secret_rate_hz == 0.0);
    CHECK(zero.raw_rate_hz == doctest::Approx(1.72e9 * 0.5 * 0.01 * 0.9).epsilon(1e-12));

    const KeyRateResult half = secret_key_rate(s, 0.5, c);
    CHECK(half.secret_rate_hz == doctest::Approx(half.raw_rate_hz * 0.5).epsilon(1e-15));
    // Negative fractions are clamped out of the rate.
    CHECK(secret_key_rate(s, -0.3, c).secret_rate_hz == 0.0);
}

TEST_CASE("sift_cow keys on unambiguous arrival slots") {
    const ProtocolConfig c = cow_config();
    const std::vector<CowSymbol> sent{CowSymbol::Bit0, CowSymbol::Bit1, CowSymbol::Decoy,
                                      CowSymbol::Bit0, CowSymbol::Vacuum};
    std::vector<DetectionEvent> events{
        {0, 0, kCowDataPort, false},  // correct slot for Bit0
        {1, 0, kCowDataPort, false},  // wrong slot for Bit1
        {2, 0, kCowDataPort, false},  // decoy data click: excluded from key
        {3, 0, kCowDataPort, false},  // double click -> ambiguous, dropped
        {3, 1, kCowDataPort, true},
        {0, 0, kCowMonitorConstructive, false},
        {0, 1, kCowMonitorConstructive, false},
        {1, 0, kCowMonitorConstructive, false},
        {1, 1, kCowMonitorDestructive, false},
    };
    const SiftedStats s = sift_cow(events, sent, c);
    CHECK(s.qber == doctest::Approx(0.5).epsilon(1e-15));     // 1 error / 2 key bits
    CHECK(s.click_prob == doctest::Approx(1.0).epsilon(1e-15));  // 3 of 3 bit symbols clicked
    CHECK(s.visibility == doctest::Approx(0.5).epsilon(1e-15));  // (3 - 1) / 4

    const std::vector<CowSymbol> no_clicks{CowSymbol::Bit0};
    const std::vector<DetectionEvent> none;
    CHECK_THROWS_AS(sift_cow(none, no_clicks, c), std::runtime_error);
    const std::vector<DetectionEvent> oob{{9, 0, 0, false}};
    CHECK_THROWS_AS(sift_cow(oob, no_clicks, c), std::invalid_argument);
}

TEST_CASE("all-correct sift gives zero qber") {
    const ProtocolConfig c = cow_config();
    const std::vector<CowSymbol> sent{CowSymbol::Bit0, CowSymbol::Bit1, CowSymbol::Bit1};
    const std::vector<DetectionEvent> events{
        {0, 0, kCowDataPort, false}, {1, 1, kCowDataPort, false}, {2, 1, kCowDataPort, false}};
    CHECK(sift_cow(events, sent, c).qber == 0.0);
}

TEST_CASE("decode_bb84_event layouts") {
    // Polarisation: port = 2*basis + bit.
    const auto z1 = decode_bb84_event(Protocol::Bb84Pol, {0, 0, 1, false});
    CHECK(z1.basis == Basis::Z);
    CHECK(z1.bit == 1);
    const auto x0 = decode_bb84_event(Protocol::Bb84Pol, {0, 0, 2, false});
    CHECK(x0.basis == Basis::X);
    CHECK(x0.bit == 0);
    CHECK_THROWS_AS(decode_bb84_event(Protocol::Bb84Pol, {0, 0, 4, false}),
                    std::invalid_argument);

    // Time-bin: outer slots give time of arrival, the middle slot the phase;
    // port 0 of the interference slot is the constructive (|+>) port.
    const auto tz0 = decode_bb84_event(Protocol::Bb84Tb, {0, 0, 1, false});
    CHECK(tz0.basis == Basis::Z);
    CHECK(tz0.bit == 0);
    const auto tz1 = decode_bb84_event(Protocol::Bb84Tb, {0, 2, 0, false});
    CHECK(tz1.basis == Basis::Z);
    CHECK(tz1.bit == 1);
    const auto tx0 = decode_bb84_event(Protocol::Bb84Tb, {0, 1, 0, false});
    CHECK(tx0.basis == Basis::X);
    CHECK(tx0.bit == 0);
    const auto tx1 = decode_bb84_event(Protocol::Bb84Tb, {0, 1, 1, false});
    CHECK(tx1.basis == Basis::X);
    CHECK(tx1.bit == 1);

    CHECK_THROWS_AS(decode_bb84_event(Protocol::Cow, {0, 0, 0, false}), std::invalid_argument);
}

TEST_CASE("sift_bb84 keeps matched-basis single clicks") {
    const ProtocolConfig c = bb84_config(Protocol::Bb84Pol);
    const std::vector<Bb84State> sent{
        {Basis::Z, 0}, {Basis::Z, 1}, {Basis::X, 0}, {Basis::X, 1}, {Basis::Z, 0}};
    const std::vector<DetectionEvent> events{
        {0, 0, 0, false},  // Z0 detector, matched, correct
        {1, 0, 0, false},  // Z0 detector on Z1: matched, error
        {2, 0, 0, false},  // Z detector on X state: basis mismatch, dropped
        {3, 0, 2, false},  // multi-click symbol, dropped
        {3, 0, 3, true},
    };
    const SiftedStats s = sift_bb84(events, sent, c);
    CHECK(s.qber == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.click_prob == doctest::Approx(0.8).epsilon(1e-15));  // 4 of 5 symbols clicked

    // Explicit receiver bases override the passive decoding.
    const std::vector<Basis> bases{Basis::X, Basis::Z, Basis::Z, Basis::Z, Basis::Z};
    const SiftedStats s2 = sift_bb84(events, sent, c, bases);
    CHECK(s2.qber == doctest::Approx(1.0).epsilon(1e-15));  // only the Z1 error survives

    const std::vector<DetectionEvent> none;
    CHECK_THROWS_AS(sift_bb84(none, sent, c), std::runtime_error);
    const std::vector<Basis> short_bases{Basis::Z};
    CHECK_THROWS_AS(sift_bb84(events, sent, c, short_bases), std::invalid_argument);
}

TEST_CASE("protocol config validation") {
    ProtocolConfig c = cow_config();
    CHECK_NOTHROW(validate(c));
    c.mu = 0.0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c = cow_config();
    c.decoy_fraction = 1.0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c = cow_config();
    c.error_correction_efficiency = 0.9;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);

    CHECK(cow_config().symbol_rate_hz() == doctest::Approx(0.86e9).epsilon(1e-12));
    CHECK(cow_config().sift_factor() == 1.0);
    CHECK(bb84_config(Protocol::Bb84Pol).sift_factor() == 0.5);
}
