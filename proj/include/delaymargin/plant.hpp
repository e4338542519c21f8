#pragma once

#include <complex>
#include <span>
#include <vector>

#include "delaymargin/poly.hpp"

namespace delaymargin {

using Complex = std::complex<double>;

/// Open-loop plant in pole-zero-gain form,
///   G(s) = gain * prod(s - zeros[k]) / prod(s - poles[i]).
/// Valid plants are proper, conjugate-closed and have nonzero gain.
struct PoleZeroGain {
    double gain = 1.0;
    std::vector<Complex> zeros;
    std::vector<Complex> poles;
};

/// Vertical stability boundary Re(s) = sigma0.
struct BoundaryConfig {
    double sigma0 = 0.0;
    double clearance_tol = 1e-8;
};

/// Throws NotProper, NotConjugateClosed or ZeroGain.
void validate(const PoleZeroGain& plant);

/// G(s) in product form. Throws PoleEvaluation next to a pole.
Complex eval(const PoleZeroGain& plant, Complex s);

/// G'(s)/G(s) = sum 1/(s - z_k) - sum 1/(s - p_i).
Complex log_derivative(const PoleZeroGain& plant, Complex s);

/// d = G(inf): the gain for bi-proper plants, zero otherwise.
double feedthrough(const PoleZeroGain& plant);

inline bool is_biproper(const PoleZeroGain& plant) {
    return plant.zeros.size() == plant.poles.size();
}

/// Smallest |Re(r) - sigma0| over all poles and zeros (+inf for a constant plant).
double boundary_clearance(const PoleZeroGain& plant, const BoundaryConfig& cfg);

/// prod(s - p_i) + gain * prod(s - z_k), the closed-loop polynomial at h = 0.
/// Throws DegenerateClosedLoop when the leading coefficient vanishes.
RealPolynomial char_poly_at_zero_delay(const PoleZeroGain& plant);

/// Plant from ascending numerator/denominator coefficients. Rejects
/// pole-zero cancellations (PoleZeroCancellation).
PoleZeroGain from_rational(std::span<const double> num, std::span<const double> den);

} // namespace delaymargin
