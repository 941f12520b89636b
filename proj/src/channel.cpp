#include "qksim/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace qksim {

void validate(const ChannelParams& p) {
    if (p.length_km < 0.0) {
        throw std::invalid_argument("channel.length_km must be >= 0");
    }
    if (p.atten_db_per_km < 0.0) {
        throw std::invalid_argument("channel.atten_db_per_km must be >= 0");
    }
    if (p.extra_loss_db < 0.0) {
        throw std::invalid_argument("channel.extra_loss_db must be >= 0");
    }
}

double fibre_transmittance(const ChannelParams& p) {
    validate(p);
    return std::pow(10.0, -p.total_loss_db() / 10.0);
}

void validate(const DetectorParams& p) {
    if (!(p.efficiency >= 0.0 && p.efficiency <= 1.0)) {
        throw std::invalid_argument("detector.efficiency must lie in [0, 1]");
    }
    if (p.dark_rate_cps < 0.0) {
        throw std::invalid_argument("detector.dark_rate_cps must be >= 0");
    }
    if (!(p.slot_duration_s > 0.0)) {
        throw std::invalid_argument("detector.slot_duration_s must be > 0");
    }
}

double dark_click_probability(const DetectorParams& p) {
    validate(p);
    return 1.0 - std::exp(-p.dark_rate_cps * p.slot_duration_s);
}

double click_probability(double mu, double transmission, const DetectorParams& p) {
    if (mu < 0.0) {
        throw std::invalid_argument("click_probability: mu must be >= 0");
    }
    const double p_dark = dark_click_probability(p);
    return 1.0 - (1.0 - p_dark) * std::exp(-mu * transmission * p.efficiency);
}

double multi_photon_probability(double mu) {
    if (mu < 0.0) {
        throw std::invalid_argument("multi_photon_probability: mu must be >= 0");
    }
    return 1.0 - std::exp(-mu) * (1.0 + mu);
}

double expected_qber(double p_signal_correct, double p_signal_wrong, double p_dark) {
    for (double p : {p_signal_correct, p_signal_wrong, p_dark}) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("expected_qber: probabilities must lie in [0, 1]");
        }
    }
    const double denom = p_signal_correct + p_signal_wrong + p_dark;
    if (denom <= 0.0) {
        throw std::invalid_argument("expected_qber: no clicks (zero denominator)");
    }
    return (p_signal_wrong + p_dark / 2.0) / denom;
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

double uniform_draw(std::uint64_t seed, std::uint64_t symbol, std::uint64_t draw) {
    const std::uint64_t h =
        mix64(mix64(seed ^ (symbol * 0x9E3779B97F4A7C15ULL)) ^ (draw * 0xD1B54A32D192ED03ULL));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::vector<DetectionEvent> sample_detection_events(std::span<const SlotProbability> cells,
                                                    std::uint64_t num_symbols, std::uint64_t seed) {
    for (const auto& c : cells) {
        if (!(c.signal_prob >= 0.0 && c.signal_prob <= 1.0) ||
            !(c.dark_prob >= 0.0 && c.dark_prob <= 1.0)) {
            throw std::invalid_argument("sample_detection_events: probabilities outside [0, 1]");
        }
    }
    std::vector<DetectionEvent> events;
    for (std::uint64_t s = 0; s < num_symbols; ++s) {
        std::uint64_t draw = 0;
        for (const auto& c : cells) {
            const bool signal = uniform_draw(seed, s, draw++) < c.signal_prob;
            const bool dark = uniform_draw(seed, s, draw++) < c.dark_prob;
            if (signal || dark) {
                events.push_back(DetectionEvent{s, c.slot, c.port, dark && !signal});
            }
        }
    }
    return events;
}

void write_events_csv(std::ostream& os, std::span<const DetectionEvent> events) {
    os << "symbol_index,slot,port,is_dark_origin\n";
    for (const auto& e : events) {
        os << e.symbol_index << ',' << e.slot << ',' << e.port << ',' << (e.is_dark_origin ? 1 : 0)
           << '\n';
    }
}

}  // namespace qksim
