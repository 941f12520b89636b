#pragma once

#include <complex>
#include <cstddef>

// Two-mode linear optics at mean-field level: complex amplitudes on a pair
// of rails, 2x2 transfer matrices for passive elements. Loss is carried as
// sub-unit amplitude; mean photon number scales the whole state and is left
// untouched by matrix application.

namespace qksim {

using Complex = std::complex<double>;

/// Dual-rail (or polarisation / time-bin) qubit amplitudes plus the mean
/// photon number of the weak coherent pulse carrying them.
struct PathState {
    Complex amp0{0.0, 0.0};
    Complex amp1{0.0, 0.0};
    double mean_photon_number = 1.0;

    double norm2() const { return std::norm(amp0) + std::norm(amp1); }
};

/// 2x2 complex transfer matrix of a passive two-mode element.
struct TransferMatrix2 {
    Complex m00, m01, m10, m11;
};

TransferMatrix2 compose(const TransferMatrix2& a, const TransferMatrix2& b);

inline TransferMatrix2 operator*(const TransferMatrix2& a, const TransferMatrix2& b) {
    return compose(a, b);
}

/// Symmetric 50:50 coupler, (1/sqrt(2)) [[1, i], [i, 1]].
TransferMatrix2 mmi_splitter();

/// Arm factor t * exp(i*phase). Throws std::invalid_argument if the
/// amplitude transmission lies outside [0, 1].
Complex phase_arm(double phase_rad, double amplitude_transmission);

/// Balanced MZI: mmi * diag(arm_top, arm_bottom) * mmi. Arm magnitudes
/// above 1 are rejected (no gain).
TransferMatrix2 mzi_transfer(Complex arm_top, Complex arm_bottom);

/// Applies the matrix to the state amplitudes; mean photon number is kept.
PathState apply(const TransferMatrix2& m, const PathState& s);

/// Amplitude factor 10^(-loss_db/20); power transmission is its square.
/// Negative loss is rejected.
double attenuation_from_db(double loss_db);

/// Largest singular value, used to check passivity (<= 1 for loss-only
/// elements).
double max_singular_value(const TransferMatrix2& m);

/// Max |(M^dag M - I)_{jk}| over all entries.
double unitarity_defect(const TransferMatrix2& m);

}  // namespace qksim
