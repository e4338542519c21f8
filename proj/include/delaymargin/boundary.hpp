#pragma once

#include <limits>
#include <span>
#include <vector>

#include "delaymargin/line_terms.hpp"
#include "delaymargin/numeric.hpp"
#include "delaymargin/plant.hpp"
#include "delaymargin/poly.hpp"

namespace delaymargin {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Magnitude/phase functions of a plant on the boundary Re(s) = sigma0 < 0.
///
///   H(w)   = ln|G(sigma0 + jw)| / sigma0      delay that puts a root at sigma0 + jw
///   phi(w) = A(w) - w H(w)                    phase of G(s) e^{-H(w) s} up to phi0
///
/// Construction validates the plant and enforces the boundary clearance.
class BoundaryFunctions {
public:
    BoundaryFunctions(PoleZeroGain plant, double sigma0, double clearance_tol = 1e-8,
                      numeric::BisectTol bisect_tol = {});

    const PoleZeroGain& plant() const noexcept { return plant_; }
    double sigma0() const noexcept { return terms_.sigma0(); }
    const LineTerms& terms() const noexcept { return terms_; }
    numeric::BisectTol bisect_tol() const noexcept { return bisect_tol_; }

    double H(double w) const { return terms_.log_magnitude(w) / sigma0(); }
    double H_prime(double w) const { return terms_.log_magnitude_d1(w) / sigma0(); }
    double H_double_prime(double w) const { return terms_.log_magnitude_d2(w) / sigma0(); }

    double phi(double w) const { return terms_.angle_sum(w) - w * H(w); }
    double phi_prime(double w) const { return terms_.angle_sum_d1(w) - H(w) - w * H_prime(w); }
    double phi_double_prime(double w) const {
        return terms_.angle_sum_d2(w) - 2.0 * H_prime(w) - w * H_double_prime(w);
    }

    /// Limit of H as w -> inf: ln|d|/sigma0 for bi-proper plants, +inf otherwise.
    double H_at_infinity() const;

    /// Rounding scale of phi_prime(w), used to decide when it vanishes.
    double phi_prime_scale(double w) const;
    /// Rounding scale of H_prime(w).
    double H_prime_scale(double w) const;

    RealPolynomial h_prime_numerator() const { return terms_.log_magnitude_d1_numerator(); }
    RealPolynomial phi_dd_numerator() const { return terms_.phi_dd_numerator(); }

private:
    PoleZeroGain plant_;
    LineTerms terms_;
    numeric::BisectTol bisect_tol_;
};

/// A feasible interval (H >= 0). `isolated` marks a single tangential point
/// where H touches zero from below.
struct FeasibleInterval {
    double omega_lo = 0.0;
    double omega_hi = 0.0;
    bool isolated = false;
};

/// An interval on which sign(phi') is constant.
struct DirectionInterval {
    double omega_lo = 0.0;
    double omega_hi = kInf;
    int phi_sign = 0;
};

/// Feasible interval with invariant crossing direction.
struct BoundaryInterval {
    double omega_lo = 0.0;
    double omega_hi = 0.0;  // may be +inf
    int h_sign = 0;         // sign of H' inside
    int phi_sign = 0;       // sign of phi' inside
    int crossing_direction = 0;
    double phi_lo = 0.0;
    double phi_hi = 0.0;    // +-inf on the unbounded interval
    double h_lo = 0.0;
    double h_hi = 0.0;      // limit value on the unbounded interval
    bool tangential = false;

    double phi_min() const { return phi_lo < phi_hi ? phi_lo : phi_hi; }
    double phi_max() const { return phi_lo < phi_hi ? phi_hi : phi_lo; }
    bool unbounded() const { return omega_hi == kInf; }
};

struct GuardHit {
    double omega0 = 0.0;
    double h0 = 0.0;
};

/// Finite scan horizon standing in for infinity: 10 (1 + feature scale),
/// doubled until H, H', phi', phi'' keep their signs past it and agree with
/// their asymptotic signs. `base` > 0 replaces the initial guess.
double default_omega_cap(const BoundaryFunctions& bf, double base = 0.0);

/// Positive zeros of H' in (0, omega_cap], ascending.
std::vector<double> critical_points_H(const BoundaryFunctions& bf, double omega_cap);

/// Positive zeros of phi'' in (0, omega_cap], ascending.
std::vector<double> critical_points_phi_prime(const BoundaryFunctions& bf, double omega_cap);

/// Positive zeros of phi' (bracketed between zeros of phi''), ascending.
std::vector<double> phi_prime_zeros(const BoundaryFunctions& bf, double omega_cap);

/// Intervals where H >= 0, one per monotone piece of H.
std::vector<FeasibleInterval> feasible_intervals(const BoundaryFunctions& bf, double omega_cap);

/// Partition of [0, inf) into intervals of constant sign(phi').
std::vector<DirectionInterval> direction_intervals(const BoundaryFunctions& bf, double omega_cap);

/// sign(sigma0 * phi'): +1 entering Re(s) >= sigma0, -1 leaving.
int crossing_direction(double sigma0, int phi_sign);

std::vector<BoundaryInterval> intersect(std::span<const FeasibleInterval> feasible,
                                        std::span<const DirectionInterval> direction,
                                        const BoundaryFunctions& bf);

/// Boundary points where a characteristic root is multiple (H' = phi' = 0,
/// H >= 0 and the characteristic equation holds).
std::vector<GuardHit> multiplicity_guard(const BoundaryFunctions& bf, double omega_cap);

struct BoundaryAnalysis {
    double omega_cap = 0.0;
    std::vector<FeasibleInterval> feasible;
    std::vector<DirectionInterval> direction;
    std::vector<BoundaryInterval> intervals;
};

BoundaryAnalysis analyze_boundary(const BoundaryFunctions& bf, double omega_cap_base = 0.0);

} // namespace delaymargin
