#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

// Lossy fibre/VOA channel, SNSPD click statistics for weak coherent pulses,
// and deterministic Monte Carlo event generation.

namespace qksim {

struct ChannelParams {
    double length_km = 0.0;
    double atten_db_per_km = 0.2;
    double extra_loss_db = 0.0;  // couplers, converter, receiver chip
    bool emulated_by_voa = false;

    double total_loss_db() const { return length_km * atten_db_per_km + extra_loss_db; }
};

void validate(const ChannelParams& p);

/// Power transmission 10^(-total_loss_db/10).
double fibre_transmittance(const ChannelParams& p);

struct DetectorParams {
    double efficiency = 0.40;
    double dark_rate_cps = 500.0;
    double slot_duration_s = 0.0;
};

void validate(const DetectorParams& p);

/// p_dark = 1 - exp(-dark_rate * slot_duration).
double dark_click_probability(const DetectorParams& p);

/// p = 1 - (1 - p_dark) * exp(-mu * transmission * efficiency).
double click_probability(double mu, double transmission, const DetectorParams& p);

/// Poisson tail: p(n >= 2) = 1 - exp(-mu) * (1 + mu).
double multi_photon_probability(double mu);

/// QBER with dark counts treated as random half-error:
/// (p_wrong + p_dark/2) / (p_correct + p_wrong + p_dark).
/// Rejects a zero denominator and probabilities outside [0, 1].
double expected_qber(double p_signal_correct, double p_signal_wrong, double p_dark);

struct DetectionEvent {
    std::uint64_t symbol_index = 0;
    int slot = 0;
    int port = 0;
    bool is_dark_origin = false;  // dark draw fired and the signal draw did not
};

/// Per-symbol click probabilities for one (slot, port) cell.
struct SlotProbability {
    int slot = 0;
    int port = 0;
    double signal_prob = 0.0;
    double dark_prob = 0.0;
};

// Counter-based uniform draws: every (seed, symbol, draw) triple maps to one
// double in [0, 1) through a SplitMix64-style finalizer. Sampling is thereby
// bit-reproducible for a given seed and independent of any chunking of the
// symbol range, so parallel workers need no coordination.
double uniform_draw(std::uint64_t seed, std::uint64_t symbol, std::uint64_t draw);

/// Samples iid symbols against the cell table. Deterministic for a fixed
/// seed; empirical frequencies converge to the analytic probabilities.
std::vector<DetectionEvent> sample_detection_events(std::span<const SlotProbability> cells,
                                                    std::uint64_t num_symbols, std::uint64_t seed);

/// CSV export, header: symbol_index,slot,port,is_dark_origin
void write_events_csv(std::ostream& os, std::span<const DetectionEvent> events);

}  // namespace qksim
