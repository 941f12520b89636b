#include "qksim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qksim {

std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::Cow: return "cow";
        case Protocol::Bb84Pol: return "bb84-pol";
        case Protocol::Bb84Tb: return "bb84-tb";
    }
    return "?";
}

void validate(const ProtocolConfig& c) {
    if (!(c.clock_hz > 0.0)) {
        throw std::invalid_argument("protocol.clock_hz must be > 0");
    }
    if (!(c.symbols_per_clock > 0.0)) {
        throw std::invalid_argument("protocol.symbols_per_clock must be > 0");
    }
    if (!(c.mu > 0.0)) {
        throw std::invalid_argument("protocol.mu must be > 0");
    }
    if (!(c.decoy_fraction >= 0.0 && c.decoy_fraction < 1.0)) {
        throw std::invalid_argument("protocol.decoy_fraction must lie in [0, 1)");
    }
    if (!(c.basis_probability_z > 0.0 && c.basis_probability_z < 1.0)) {
        throw std::invalid_argument("protocol.basis_probability_z must lie in (0, 1)");
    }
    if (c.error_correction_efficiency < 1.0) {
        throw std::invalid_argument("protocol.error_correction_efficiency must be >= 1");
    }
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("binary_entropy: p must lie in [0, 1]");
    }
    if (p == 0.0 || p == 1.0) {
        return 0.0;
    }
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// ---------------------------------------------------------------------------
// Sifting
// ---------------------------------------------------------------------------

SiftedStats sift_cow(std::span<const DetectionEvent> events, std::span<const CowSymbol> sent,
                     const ProtocolConfig& config) {
    // Per-symbol data-line slot mask (bit 0 = slot 0, bit 1 = slot 1).
    std::vector<unsigned char> mask(sent.size(), 0);
    double mon_constructive = 0.0, mon_destructive = 0.0;
    for (const auto& e : events) {
        if (e.symbol_index >= sent.size()) {
            throw std::invalid_argument("sift_cow: event beyond the sent pattern");
        }
        if (e.port == kCowDataPort && (e.slot == 0 || e.slot == 1)) {
            mask[e.symbol_index] |= static_cast<unsigned char>(1 << e.slot);
        } else if (e.port == kCowMonitorConstructive) {
            mon_constructive += 1.0;
        } else if (e.port == kCowMonitorDestructive) {
            mon_destructive += 1.0;
        }
    }

    std::uint64_t bit_symbols = 0, clicked = 0, key = 0, errors = 0;
    for (std::size_t i = 0; i < sent.size(); ++i) {
        const bool is_bit = sent[i] == CowSymbol::Bit0 || sent[i] == CowSymbol::Bit1;
        if (!is_bit) {
            continue;  // decoy/vacuum clicks feed the monitor, not the key
        }
        ++bit_symbols;
        if (mask[i] == 0) {
            continue;
        }
        ++clicked;
        if (mask[i] == 3) {
            continue;  // double click, ambiguous arrival time
        }
        ++key;
        const int bit = mask[i] == 1 ? 0 : 1;
        const int sent_bit = sent[i] == CowSymbol::Bit0 ? 0 : 1;
        if (bit != sent_bit) {
            ++errors;
        }
    }
    if (key == 0 || bit_symbols == 0) {
        throw std::runtime_error("sift_cow: empty sift (no usable data-line clicks)");
    }

    SiftedStats stats;
    stats.qber = static_cast<double>(errors) / static_cast<double>(key);
    stats.click_prob = static_cast<double>(clicked) / static_cast<double>(bit_symbols);
    const double mon_total = mon_constructive + mon_destructive;
    stats.visibility = mon_total > 0.0 ? std::abs(mon_constructive - mon_destructive) / mon_total
                                       : 1.0;
    stats.sifted_rate_hz = config.symbol_rate_hz() * stats.click_prob * config.sift_factor() *
                           (1.0 - config.decoy_fraction);
    return stats;
}

Bb84EventDecode decode_bb84_event(Protocol protocol, const DetectionEvent& e) {
    if (protocol == Protocol::Bb84Pol) {
        if (e.port < 0 || e.port > 3) {
            throw std::invalid_argument("decode_bb84_event: polarisation port outside 0..3");
        }
        return Bb84EventDecode{e.port < 2 ? Basis::Z : Basis::X, e.port & 1};
    }
    if (protocol == Protocol::Bb84Tb) {
        if (e.slot < 0 || e.slot > 2 || e.port < 0 || e.port > 1) {
            throw std::invalid_argument("decode_bb84_event: time-bin cell outside the 3x2 table");
        }
        if (e.slot == 1) {
            return Bb84EventDecode{Basis::X, e.port};
        }
        return Bb84EventDecode{Basis::Z, e.slot == 0 ? 0 : 1};
    }
    throw std::invalid_argument("decode_bb84_event: not a BB84 protocol");
}

SiftedStats sift_bb84(std::span<const DetectionEvent> events, std::span<const Bb84State> sent,
                      const ProtocolConfig& config, std::span<const Basis> receiver_bases) {
    if (!receiver_bases.empty() && receiver_bases.size() != sent.size()) {
        throw std::invalid_argument("sift_bb84: receiver basis list does not match symbol count");
    }

    // First pass: single-click selection.
    std::vector<unsigned char> clicks(sent.size(), 0);
    for (const auto& e : events) {
        if (e.symbol_index >= sent.size()) {
            throw std::invalid_argument("sift_bb84: event beyond the sent sequence");
        }
        if (clicks[e.symbol_index] < 2) {
            ++clicks[e.symbol_index];
        }
    }

    std::uint64_t clicked = 0;
    for (auto c : clicks) {
        clicked += c > 0;
    }

    std::uint64_t kept = 0, errors = 0;
    for (const auto& e : events) {
        if (clicks[e.symbol_index] != 1) {
            continue;
        }
        const Bb84EventDecode d = decode_bb84_event(config.protocol, e);
        const Basis bob =
            receiver_bases.empty() ? d.basis : receiver_bases[e.symbol_index];
        if (bob != sent[e.symbol_index].basis) {
            continue;
        }
        ++kept;
        if (d.bit != sent[e.symbol_index].bit) {
            ++errors;
        }
    }
    if (kept == 0) {
        throw std::runtime_error("sift_bb84: empty sift (no matched-basis single clicks)");
    }

    SiftedStats stats;
    stats.qber = static_cast<double>(errors) / static_cast<double>(kept);
    stats.click_prob = static_cast<double>(clicked) / static_cast<double>(sent.size());
    stats.visibility = 1.0;
    stats.sifted_rate_hz = config.symbol_rate_hz() * stats.click_prob * config.sift_factor() *
                           (1.0 - config.decoy_fraction);
    return stats;
}

// ---------------------------------------------------------------------------
// Secret fractions and rates
// ---------------------------------------------------------------------------

double cow_secret_fraction(double qber, double visibility, const ProtocolConfig& config) {
    if (!(qber >= 0.0 && qber <= 0.5)) {
        throw std::invalid_argument("cow_secret_fraction: qber must lie in [0, 0.5]");
    }
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw std::invalid_argument("cow_secret_fraction: visibility must lie in [0, 1]");
    }
    const double r = 1.0 - config.error_correction_efficiency * binary_entropy(qber) -
                     binary_entropy((1.0 + visibility) / 2.0);
    return std::clamp(r, 0.0, 1.0);
}

double bb84_secret_fraction(double qber, double mu, double click_prob,
                            const ProtocolConfig& config) {
    if (!(qber >= 0.0 && qber <= 0.5)) {
        throw std::invalid_argument("bb84_secret_fraction: qber must lie in [0, 0.5]");
    }
    if (!(click_prob > 0.0)) {
        throw std::invalid_argument("bb84_secret_fraction: click probability must be > 0");
    }
    const double omega = std::max(0.0, (click_prob - multi_photon_probability(mu)) / click_prob);
    if (omega <= 0.0) {
        return 0.0;  // tagging exhausts the key
    }
    const double x = std::min(qber / omega, 0.5);
    const double r = omega * (1.0 - binary_entropy(x)) -
                     config.error_correction_efficiency * binary_entropy(qber);
    return std::clamp(r, 0.0, 1.0);
}

namespace {

class CowCollectiveStandIn final : public SecurityBound {
  public:
    double secret_fraction(const SiftedStats& s, const ProtocolConfig& c) const override {
        return cow_secret_fraction(s.qber, s.visibility, c);
    }
};

class Bb84TaggingStandIn final : public SecurityBound {
  public:
    double secret_fraction(const SiftedStats& s, const ProtocolConfig& c) const override {
        return bb84_secret_fraction(s.qber, c.mu, s.click_prob, c);
    }
};

}  // namespace

std::unique_ptr<SecurityBound> default_security_bound(Protocol protocol) {
    if (protocol == Protocol::Cow) {
        return std::make_unique<CowCollectiveStandIn>();
    }
    return std::make_unique<Bb84TaggingStandIn>();
}

KeyRateResult secret_key_rate(const SiftedStats& stats, double secret_fraction,
                              const ProtocolConfig& config) {
    KeyRateResult r;
    r.raw_rate_hz = config.symbol_rate_hz() * stats.click_prob * config.sift_factor() *
                    (1.0 - config.decoy_fraction);
    r.secret_fraction = secret_fraction;
    r.secret_rate_hz = r.raw_rate_hz * std::max(0.0, secret_fraction);
    return r;
}

}  // namespace qksim
