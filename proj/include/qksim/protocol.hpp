#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qksim/channel.hpp"
#include "qksim/circuits.hpp"

// Sifting, visibility monitoring, and asymptotic secret-key-rate estimation.
// The exact security bounds live in the cited proofs; the defaults here are
// documented stand-ins behind the SecurityBound interface so they can be
// swapped without touching the pipeline.

namespace qksim {

enum class Protocol { Cow, Bb84Pol, Bb84Tb };

std::string to_string(Protocol p);

struct ProtocolConfig {
    Protocol protocol = Protocol::Cow;
    double clock_hz = 1.72e9;
    double symbols_per_clock = 0.5;  // COW sends one state every two clocks
    double mu = 0.5;                 // mean photons per pulse at the transmitter output
    double decoy_fraction = 0.1;     // COW only
    double basis_probability_z = 0.5;
    double error_correction_efficiency = 1.0;  // asymptotic

    double symbol_rate_hz() const { return clock_hz * symbols_per_clock; }
    /// Passive 50:50 basis choice at the receiver keeps half of all clicks.
    double sift_factor() const { return protocol == Protocol::Cow ? 1.0 : 0.5; }
};

void validate(const ProtocolConfig& c);

struct SiftedStats {
    double sifted_rate_hz = 0.0;
    double qber = 0.0;
    double visibility = 1.0;  // COW only
    double click_prob = 0.0;  // per-symbol detection probability
};

struct KeyRateResult {
    double raw_rate_hz = 0.0;
    double secret_fraction = 0.0;
    double secret_rate_hz = 0.0;
};

/// h(p) = -p log2 p - (1-p) log2 (1-p); h(0) = h(1) = 0. Rejects p outside
/// [0, 1].
double binary_entropy(double p);

// ---------------------------------------------------------------------------
// Sifting
// ---------------------------------------------------------------------------

// COW event layout: port 0 = data detector (slot 0/1 inside the pulse pair),
// port 1 = monitor constructive, port 2 = monitor destructive (slot indexes
// the interfering boundary: 0 = with the previous symbol, 1 = internal).
inline constexpr int kCowDataPort = 0;
inline constexpr int kCowMonitorConstructive = 1;
inline constexpr int kCowMonitorDestructive = 2;

/// Key bits from unambiguous data-line arrival slots of bit symbols; decoy
/// and vacuum symbols are excluded from the key, monitor clicks feed the
/// visibility estimate. Symbols with clicks in both data slots are dropped
/// as ambiguous. Throws when the sift is empty.
SiftedStats sift_cow(std::span<const DetectionEvent> events, std::span<const CowSymbol> sent,
                     const ProtocolConfig& config);

// BB84 event layouts. Polarisation: slot 0, port = 2*basis + bit (passive
// basis choice, so the clicking detector fixes Bob's basis). Time-bin:
// slot 0/2 = time-of-arrival (Z), slot 1 = interference (X) with port = bit.
struct Bb84EventDecode {
    Basis basis = Basis::Z;
    int bit = 0;
};

Bb84EventDecode decode_bb84_event(Protocol protocol, const DetectionEvent& e);

/// Keeps matched-basis single-click symbols. When `receiver_bases` is empty
/// (the passive receivers built here) Bob's basis is taken from the event
/// itself; an explicit per-symbol basis list overrides it for actively
/// switched receivers. Throws when the sift is empty.
SiftedStats sift_bb84(std::span<const DetectionEvent> events, std::span<const Bb84State> sent,
                      const ProtocolConfig& config, std::span<const Basis> receiver_bases = {});

// ---------------------------------------------------------------------------
// Secret fractions
// ---------------------------------------------------------------------------

/// Stand-in for the collective-attack bound on COW:
/// r = max(0, 1 - f_EC h(qber) - h((1 + visibility)/2)).
double cow_secret_fraction(double qber, double visibility, const ProtocolConfig& config);

/// Stand-in GLLP-style tagging bound for weak-coherent BB84 without decoys:
/// omega = max(0, (click - p_multi)/click),
/// r = max(0, omega (1 - h(qber/omega)) - f_EC h(qber)); zero when every
/// click is attributable to multi-photon pulses.
double bb84_secret_fraction(double qber, double mu, double click_prob,
                            const ProtocolConfig& config);

/// Pluggable security bound; the defaults above are the shipped
/// implementations.
class SecurityBound {
  public:
    virtual ~SecurityBound() = default;
    virtual double secret_fraction(const SiftedStats& stats, const ProtocolConfig& config) const = 0;
};

std::unique_ptr<SecurityBound> default_security_bound(Protocol protocol);

/// raw = symbol_rate * click_prob * sift_factor * (1 - decoy_fraction);
/// secret = raw * max(0, secret_fraction).
KeyRateResult secret_key_rate(const SiftedStats& stats, double secret_fraction,
                              const ProtocolConfig& config);

}  // namespace qksim
