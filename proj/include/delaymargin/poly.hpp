#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

namespace delaymargin {

/// Dense real polynomial, coefficients in ascending degree order
/// (coeffs()[k] multiplies x^k). The zero polynomial has no coefficients;
/// any other polynomial has a nonzero leading coefficient.
class RealPolynomial {
public:
    RealPolynomial() = default;
    explicit RealPolynomial(std::vector<double> coeffs);
    RealPolynomial(std::initializer_list<double> coeffs);

    /// Monic polynomial with the given roots. Roots must be conjugate-closed;
    /// conjugate pairs are multiplied as real quadratics.
    static RealPolynomial from_roots(std::span<const std::complex<double>> roots);

    const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    bool is_zero() const noexcept { return coeffs_.empty(); }
    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    double leading() const { return coeffs_.empty() ? 0.0 : coeffs_.back(); }

    double operator()(double x) const;
    std::complex<double> operator()(std::complex<double> s) const;

    RealPolynomial& operator+=(const RealPolynomial& rhs);
    RealPolynomial& operator-=(const RealPolynomial& rhs);
    RealPolynomial& operator*=(double factor);

    friend RealPolynomial operator+(RealPolynomial lhs, const RealPolynomial& rhs) { return lhs += rhs; }
    friend RealPolynomial operator-(RealPolynomial lhs, const RealPolynomial& rhs) { return lhs -= rhs; }
    friend RealPolynomial operator*(RealPolynomial lhs, double f) { return lhs *= f; }
    friend RealPolynomial operator*(double f, RealPolynomial rhs) { return rhs *= f; }
    friend RealPolynomial operator*(const RealPolynomial& lhs, const RealPolynomial& rhs);

    friend bool operator==(const RealPolynomial&, const RealPolynomial&) = default;

private:
    void normalize();

    std::vector<double> coeffs_;
};

std::complex<double> eval_at_complex(const RealPolynomial& p, std::complex<double> s);

RealPolynomial derivative(const RealPolynomial& p);

inline constexpr double kDefaultClusterTol = 1e-7;

/// Distinct real roots in [0, inf), ascending. Roots within
/// cluster_tol * (1 + |root|) of each other are merged into their mean.
/// Throws ZeroPolynomial for the zero polynomial.
std::vector<double> nonnegative_real_roots(const RealPolynomial& p,
                                           double cluster_tol = kDefaultClusterTol);

/// All degree-many complex roots (with multiplicity), conjugate-paired.
/// Throws ZeroPolynomial, DidNotConverge.
std::vector<std::complex<double>> all_complex_roots(const RealPolynomial& p);

} // namespace delaymargin
