#include "qksim/optics.hpp"

#include <cmath>
#include <stdexcept>

namespace qksim {

TransferMatrix2 compose(const TransferMatrix2& a, const TransferMatrix2& b) {
    return TransferMatrix2{
        a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
        a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11,
    };
}

TransferMatrix2 mmi_splitter() {
    const double s = 1.0 / std::sqrt(2.0);
    return TransferMatrix2{{s, 0.0}, {0.0, s}, {0.0, s}, {s, 0.0}};
}

Complex phase_arm(double phase_rad, double amplitude_transmission) {
    if (!(amplitude_transmission >= 0.0 && amplitude_transmission <= 1.0)) {
        throw std::invalid_argument("phase_arm: amplitude_transmission must lie in [0, 1]");
    }
    return std::polar(amplitude_transmission, phase_rad);
}

TransferMatrix2 mzi_transfer(Complex arm_top, Complex arm_bottom) {
    constexpr double kTol = 1e-9;
    if (std::abs(arm_top) > 1.0 + kTol || std::abs(arm_bottom) > 1.0 + kTol) {
        throw std::invalid_argument("mzi_transfer: arm magnitude exceeds 1 (passive element)");
    }
    const TransferMatrix2 arms{arm_top, {0.0, 0.0}, {0.0, 0.0}, arm_bottom};
    return mmi_splitter() * arms * mmi_splitter();
}

PathState apply(const TransferMatrix2& m, const PathState& s) {
    return PathState{
        m.m00 * s.amp0 + m.m01 * s.amp1,
        m.m10 * s.amp0 + m.m11 * s.amp1,
        s.mean_photon_number,
    };
}

double attenuation_from_db(double loss_db) {
    if (loss_db < 0.0) {
        throw std::invalid_argument("attenuation_from_db: loss must be >= 0 dB");
    }
    return std::pow(10.0, -loss_db / 20.0);
}

double max_singular_value(const TransferMatrix2& m) {
    // Largest eigenvalue of the Hermitian M^dag M, written in the
    // cancellation-free form (a+d)/2 + sqrt(((a-d)/2)^2 + |b|^2).
    const double a = std::norm(m.m00) + std::norm(m.m10);
    const double d = std::norm(m.m01) + std::norm(m.m11);
    const Complex b = std::conj(m.m00) * m.m01 + std::conj(m.m10) * m.m11;
    const double disc = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
    return std::sqrt(std::max(0.0, 0.5 * (a + d) + disc));
}

double unitarity_defect(const TransferMatrix2& m) {
    const double a = std::norm(m.m00) + std::norm(m.m10);
    const double d = std::norm(m.m01) + std::norm(m.m11);
    const Complex b = std::conj(m.m00) * m.m01 + std::conj(m.m10) * m.m11;
    double defect = std::abs(a - 1.0);
    defect = std::max(defect, std::abs(d - 1.0));
    defect = std::max(defect, std::abs(b));
    return defect;
}

}  // namespace qksim
