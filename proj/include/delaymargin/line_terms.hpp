#pragma once

#include <vector>

#include "delaymargin/numeric.hpp"
#include "delaymargin/plant.hpp"
#include "delaymargin/poly.hpp"

namespace delaymargin {

/// One pole or zero r seen from the vertical line Re(s) = sigma0:
/// dsigma = sigma0 - Re(r), omega_r = Im(r).
struct LineTerm {
    double dsigma;
    double omega_r;
};

/// Magnitude and phase sums of a plant along Re(s) = sigma0, as functions of
/// the frequency w >= 0 on that line:
///   L(w) = ln|G(sigma0 + jw)|,
///   A(w) = sum_z atan(dw_z/ds_z) - sum_p atan(dw_p/ds_p).
/// Requires every pole/zero to be off the line (dsigma != 0). With
/// `allow_origin`, roots at s = 0 may sit on the line sigma0 = 0; the sums
/// are then valid for w > 0 only.
class LineTerms {
public:
    LineTerms(const PoleZeroGain& plant, double sigma0, bool allow_origin = false);

    double sigma0() const noexcept { return sigma0_; }
    const std::vector<LineTerm>& zeros() const noexcept { return zeros_; }
    const std::vector<LineTerm>& poles() const noexcept { return poles_; }
    std::size_t order() const noexcept { return zeros_.size() + poles_.size(); }

    double log_magnitude(double w) const;
    double log_magnitude_d1(double w) const;
    double log_magnitude_d2(double w) const;

    double angle_sum(double w) const;
    double angle_sum_d1(double w) const;
    double angle_sum_d2(double w) const;

    /// Numerator of L'(w) over Gamma_z * Gamma_p (degree <= 2(m+n)-1).
    RealPolynomial log_magnitude_d1_numerator() const;

    /// Numerator of sigma0 * phi''(w) over Gamma_z^2 * Gamma_p^2
    /// (degree <= 4(m+n)-1).
    RealPolynomial phi_dd_numerator() const;

    /// max over poles/zeros of |omega_r| + |dsigma|.
    double feature_scale() const;
    /// min over poles/zeros of |dsigma|.
    double min_clearance() const;

    /// Ascending sampling grid on [0, cap]: log-spaced with `per_decade`
    /// points per decade, densified around each |omega_r| on the scale of
    /// the matching |dsigma|.
    std::vector<double> scan_grid(double cap, int per_decade) const;

private:
    double sigma0_;
    double log_gain_;
    std::vector<LineTerm> zeros_;
    std::vector<LineTerm> poles_;
};

/// Zeros of f on [0, cap] by sign-change scanning on LineTerms::scan_grid,
/// doubling the grid density until the count stops changing and does not
/// exceed degree_bound.
template <class F>
std::vector<double> adaptive_scan_zeros(const LineTerms& terms, F&& f, double cap, std::size_t degree_bound,
                                        numeric::BisectTol tol) {
    std::vector<double> previous;
    bool have_previous = false;
    for (int density = 32; density <= 4096; density *= 2) {
        auto zeros = numeric::cluster(numeric::sign_change_zeros(f, terms.scan_grid(cap, density), tol), 1e-9);
        if (have_previous && zeros.size() == previous.size() && zeros.size() <= degree_bound) {
            return zeros;
        }
        previous = std::move(zeros);
        have_previous = true;
    }
    return previous;
}

} // namespace delaymargin
