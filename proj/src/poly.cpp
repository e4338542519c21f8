#include "delaymargin/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "delaymargin/errors.hpp"

namespace delaymargin {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double horner(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

// Bound on the evaluation error of horner(c, x).
double horner_noise(const std::vector<double>& c, double x) {
    double acc = 0.0;
    const double ax = std::abs(x);
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * ax + std::abs(*it);
    }
    return 16.0 * static_cast<double>(c.size()) * kEps * acc;
}

std::vector<double> derivative_coeffs(const std::vector<double>& c) {
    if (c.size() <= 1) {
        return {};
    }
    std::vector<double> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) {
        d[k - 1] = static_cast<double>(k) * c[k];
    }
    return d;
}

double bisect_sign_change(const std::vector<double>& c, double a, double b, double fa) {
    for (int iter = 0; iter < 200; ++iter) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) {
            break;
        }
        const double fm = horner(c, m);
        if (fm == 0.0) {
            return m;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// Real roots of c in [lo, hi] by the derivative cascade: the critical points
// of c split [lo, hi] into monotone pieces, each holding at most one root.
// Multiple roots show up as critical points where c vanishes to rounding.
std::vector<double> real_roots_in(const std::vector<double>& c, double lo, double hi) {
    const int deg = static_cast<int>(c.size()) - 1;
    if (deg <= 0) {
        return {};
    }
    if (deg == 1) {
        const double r = -c[0] / c[1];
        if (r >= lo && r <= hi) {
            return {r};
        }
        return {};
    }

    std::vector<double> pts;
    pts.push_back(lo);
    for (double x : real_roots_in(derivative_coeffs(c), lo, hi)) {
        if (x > pts.back()) {
            pts.push_back(x);
        }
    }
    if (hi > pts.back()) {
        pts.push_back(hi);
    }

    std::vector<double> roots;
    auto push = [&roots](double x) {
        if (roots.empty() || x > roots.back()) {
            roots.push_back(x);
        }
    };
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double a = pts[i];
        const double fa = horner(c, a);
        if (std::abs(fa) <= horner_noise(c, a)) {
            push(a);
            continue;
        }
        if (i + 1 == pts.size()) {
            break;
        }
        const double b = pts[i + 1];
        const double fb = horner(c, b);
        if (std::abs(fb) <= horner_noise(c, b)) {
            continue;  // picked up as the next left endpoint
        }
        if ((fa < 0.0) != (fb < 0.0)) {
            push(bisect_sign_change(c, a, b, fa));
        }
    }
    return roots;
}

// Fujiwara bound on the moduli of the roots of a monic polynomial given by
// its non-leading normalized coefficients a[0..n-1].
double fujiwara_bound(const std::vector<double>& monic) {
    const int n = static_cast<int>(monic.size()) - 1;
    double bound = 0.0;
    for (int k = 0; k < n; ++k) {
        double v = std::abs(monic[k]);
        if (k == 0) {
            v *= 0.5;
        }
        if (v > 0.0) {
            bound = std::max(bound, std::pow(v, 1.0 / static_cast<double>(n - k)));
        }
    }
    return 2.0 * bound;
}

// Strips exact low-order zeros; returns the count of stripped zero roots.
std::size_t strip_zero_roots(std::vector<double>& c) {
    std::size_t k0 = 0;
    while (k0 < c.size() && c[k0] == 0.0) {
        ++k0;
    }
    c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(k0));
    return k0;
}

// Coefficients of p(B x) / (lead B^n), which has all roots in the unit disk.
std::vector<double> scaled_monic(const std::vector<double>& c, double bound) {
    const int n = static_cast<int>(c.size()) - 1;
    const double lead = c.back();
    const double log_b = std::log(bound);
    std::vector<double> out(c.size());
    for (int k = 0; k <= n; ++k) {
        out[k] = (c[k] / lead) * std::exp(static_cast<double>(k - n) * log_b);
    }
    out[n] = 1.0;
    return out;
}

std::complex<double> newton_polish(const std::vector<double>& c, std::complex<double> z) {
    auto eval = [&c](std::complex<double> s, std::complex<double>& ds) {
        std::complex<double> v = 0.0;
        ds = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) {
            ds = ds * s + v;
            v = v * s + *it;
        }
        return v;
    };
    std::complex<double> dz;
    std::complex<double> fz = eval(z, dz);
    for (int iter = 0; iter < 6 && std::abs(fz) > 0.0; ++iter) {
        if (std::abs(dz) == 0.0) {
            break;
        }
        const std::complex<double> cand = z - fz / dz;
        std::complex<double> dc;
        const std::complex<double> fc = eval(cand, dc);
        if (!(std::abs(fc) < std::abs(fz))) {
            break;
        }
        z = cand;
        fz = fc;
        dz = dc;
    }
    return z;
}

void pair_conjugates(std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> upper;
    std::vector<std::complex<double>> lower;
    std::vector<std::complex<double>> out;
    for (const auto& r : roots) {
        if (std::abs(r.imag()) <= 1e-10 * (1.0 + std::abs(r))) {
            out.emplace_back(r.real(), 0.0);
        } else if (r.imag() > 0.0) {
            upper.push_back(r);
        } else {
            lower.push_back(r);
        }
    }
    auto by_imag = [](const std::complex<double>& a, const std::complex<double>& b) {
        return std::abs(a.imag()) < std::abs(b.imag());
    };
    // Unbalanced halves: the closest-to-real leftovers become real roots.
    while (upper.size() > lower.size()) {
        auto it = std::min_element(upper.begin(), upper.end(), by_imag);
        out.emplace_back(it->real(), 0.0);
        upper.erase(it);
    }
    while (lower.size() > upper.size()) {
        auto it = std::min_element(lower.begin(), lower.end(), by_imag);
        out.emplace_back(it->real(), 0.0);
        lower.erase(it);
    }
    for (const auto& u : upper) {
        auto best = std::min_element(lower.begin(), lower.end(), [&u](const auto& a, const auto& b) {
            return std::abs(a - std::conj(u)) < std::abs(b - std::conj(u));
        });
        const double re = 0.5 * (u.real() + best->real());
        const double im = 0.5 * (u.imag() - best->imag());
        out.emplace_back(re, im);
        out.emplace_back(re, -im);
        lower.erase(best);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) {
            return a.real() < b.real();
        }
        return a.imag() < b.imag();
    });
    roots = std::move(out);
}

} // namespace

RealPolynomial::RealPolynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    normalize();
}

RealPolynomial::RealPolynomial(std::initializer_list<double> coeffs) : coeffs_(coeffs) {
    normalize();
}

void RealPolynomial::normalize() {
    for (double c : coeffs_) {
        if (!std::isfinite(c)) {
            throw Error(ErrorKind::InvalidArgument, "polynomial coefficient is not finite");
        }
    }
    while (!coeffs_.empty() && coeffs_.back() == 0.0) {
        coeffs_.pop_back();
    }
}

RealPolynomial RealPolynomial::from_roots(std::span<const std::complex<double>> roots) {
    RealPolynomial result{1.0};
    for (const auto& r : roots) {
        if (std::abs(r.imag()) <= 1e-12 * (1.0 + std::abs(r))) {
            result = result * RealPolynomial{-r.real(), 1.0};
        } else if (r.imag() > 0.0) {
            result = result * RealPolynomial{std::norm(r), -2.0 * r.real(), 1.0};
        }
    }
    return result;
}

double RealPolynomial::operator()(double x) const {
    return horner(coeffs_, x);
}

std::complex<double> RealPolynomial::operator()(std::complex<double> s) const {
    std::complex<double> acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = acc * s + *it;
    }
    return acc;
}

RealPolynomial& RealPolynomial::operator+=(const RealPolynomial& rhs) {
    if (rhs.coeffs_.size() > coeffs_.size()) {
        coeffs_.resize(rhs.coeffs_.size(), 0.0);
    }
    for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) {
        coeffs_[k] += rhs.coeffs_[k];
    }
    normalize();
    return *this;
}

RealPolynomial& RealPolynomial::operator-=(const RealPolynomial& rhs) {
    if (rhs.coeffs_.size() > coeffs_.size()) {
        coeffs_.resize(rhs.coeffs_.size(), 0.0);
    }
    for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) {
        coeffs_[k] -= rhs.coeffs_[k];
    }
    normalize();
    return *this;
}

RealPolynomial& RealPolynomial::operator*=(double factor) {
    for (double& c : coeffs_) {
        c *= factor;
    }
    normalize();
    return *this;
}

RealPolynomial operator*(const RealPolynomial& lhs, const RealPolynomial& rhs) {
    if (lhs.is_zero() || rhs.is_zero()) {
        return {};
    }
    std::vector<double> out(lhs.coeffs_.size() + rhs.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < lhs.coeffs_.size(); ++i) {
        for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j) {
            out[i + j] += lhs.coeffs_[i] * rhs.coeffs_[j];
        }
    }
    return RealPolynomial(std::move(out));
}

std::complex<double> eval_at_complex(const RealPolynomial& p, std::complex<double> s) {
    return p(s);
}

RealPolynomial derivative(const RealPolynomial& p) {
    return RealPolynomial(derivative_coeffs(p.coeffs()));
}

std::vector<double> nonnegative_real_roots(const RealPolynomial& p, double cluster_tol) {
    if (p.is_zero()) {
        throw Error(ErrorKind::ZeroPolynomial, "nonnegative_real_roots of the zero polynomial");
    }
    std::vector<double> c = p.coeffs();
    const std::size_t zero_roots = strip_zero_roots(c);

    std::vector<double> roots;
    if (zero_roots > 0) {
        roots.push_back(0.0);
    }
    if (c.size() >= 2) {
        std::vector<double> monic(c.size());
        for (std::size_t k = 0; k < c.size(); ++k) {
            monic[k] = c[k] / c.back();
        }
        const double bound = fujiwara_bound(monic);
        const auto scaled = scaled_monic(c, bound);
        for (double x : real_roots_in(scaled, 0.0, 1.0)) {
            roots.push_back(x * bound);
        }
    }
    std::sort(roots.begin(), roots.end());

    std::vector<double> merged;
    std::size_t i = 0;
    while (i < roots.size()) {
        std::size_t j = i + 1;
        double sum = roots[i];
        while (j < roots.size() && roots[j] - roots[j - 1] <= cluster_tol * (1.0 + std::abs(roots[j - 1]))) {
            sum += roots[j];
            ++j;
        }
        merged.push_back(sum / static_cast<double>(j - i));
        i = j;
    }
    return merged;
}

std::vector<std::complex<double>> all_complex_roots(const RealPolynomial& p) {
    if (p.is_zero()) {
        throw Error(ErrorKind::ZeroPolynomial, "all_complex_roots of the zero polynomial");
    }
    std::vector<double> c = p.coeffs();
    const std::size_t zero_roots = strip_zero_roots(c);
    std::vector<std::complex<double>> roots(zero_roots, {0.0, 0.0});

    const int n = static_cast<int>(c.size()) - 1;
    if (n == 1) {
        roots.emplace_back(-c[0] / c[1], 0.0);
    } else if (n >= 2) {
        std::vector<double> monic(c.size());
        for (std::size_t k = 0; k < c.size(); ++k) {
            monic[k] = c[k] / c.back();
        }
        const double bound = fujiwara_bound(monic);
        const auto scaled = scaled_monic(c, bound);

        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) {
            companion(i, i - 1) = 1.0;
        }
        for (int i = 0; i < n; ++i) {
            companion(i, n - 1) = -scaled[i];
        }
        Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
        if (solver.info() != Eigen::Success) {
            throw Error(ErrorKind::DidNotConverge,
                        "companion eigenvalue iteration failed for degree " + std::to_string(n));
        }
        const auto& ev = solver.eigenvalues();
        for (int i = 0; i < n; ++i) {
            roots.push_back(newton_polish(c, ev(i) * bound));
        }
    }
    pair_conjugates(roots);
    return roots;
}

} // namespace delaymargin
