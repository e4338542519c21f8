#include "delaymargin/line_terms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "delaymargin/errors.hpp"

namespace delaymargin {

namespace numeric {

std::vector<double> cluster(std::vector<double> values, double tol) {
    std::sort(values.begin(), values.end());
    std::vector<double> out;
    std::size_t i = 0;
    while (i < values.size()) {
        std::size_t j = i + 1;
        double sum = values[i];
        while (j < values.size() && values[j] - values[j - 1] <= tol * (1.0 + std::abs(values[j - 1]))) {
            sum += values[j];
            ++j;
        }
        out.push_back(sum / static_cast<double>(j - i));
        i = j;
    }
    return out;
}

} // namespace numeric

namespace {

std::vector<LineTerm> make_terms(const std::vector<Complex>& roots, double sigma0, bool allow_origin) {
    std::vector<LineTerm> out;
    out.reserve(roots.size());
    for (const auto& r : roots) {
        const double ds = sigma0 - r.real();
        if (ds == 0.0 && !(allow_origin && r == Complex{})) {
            throw Error(ErrorKind::BoundaryClearance, "pole or zero lies on the boundary line");
        }
        out.push_back({ds, r.imag()});
    }
    return out;
}

RealPolynomial gamma_poly(const LineTerm& t) {
    return RealPolynomial{t.omega_r * t.omega_r + t.dsigma * t.dsigma, -2.0 * t.omega_r, 1.0};
}

RealPolynomial domega_poly(const LineTerm& t) {
    return RealPolynomial{-t.omega_r, 1.0};
}

// products[k] = prod_{j != k} gamma_j; also returns the full product.
std::vector<RealPolynomial> leave_one_out(const std::vector<RealPolynomial>& factors, RealPolynomial& full) {
    const std::size_t n = factors.size();
    std::vector<RealPolynomial> prefix(n + 1, RealPolynomial{1.0});
    std::vector<RealPolynomial> suffix(n + 1, RealPolynomial{1.0});
    for (std::size_t i = 0; i < n; ++i) {
        prefix[i + 1] = prefix[i] * factors[i];
    }
    for (std::size_t i = n; i-- > 0;) {
        suffix[i] = suffix[i + 1] * factors[i];
    }
    full = prefix[n];
    std::vector<RealPolynomial> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(prefix[i] * suffix[i + 1]);
    }
    return out;
}

} // namespace

LineTerms::LineTerms(const PoleZeroGain& plant, double sigma0, bool allow_origin)
    : sigma0_(sigma0),
      log_gain_(std::log(std::abs(plant.gain))),
      zeros_(make_terms(plant.zeros, sigma0, allow_origin)),
      poles_(make_terms(plant.poles, sigma0, allow_origin)) {}

double LineTerms::log_magnitude(double w) const {
    double acc = 0.0;
    for (const auto& t : zeros_) {
        const double dw = w - t.omega_r;
        acc += std::log(t.dsigma * t.dsigma + dw * dw);
    }
    for (const auto& t : poles_) {
        const double dw = w - t.omega_r;
        acc -= std::log(t.dsigma * t.dsigma + dw * dw);
    }
    return log_gain_ + 0.5 * acc;
}

double LineTerms::log_magnitude_d1(double w) const {
    double acc = 0.0;
    for (const auto& t : zeros_) {
        const double dw = w - t.omega_r;
        acc += dw / (t.dsigma * t.dsigma + dw * dw);
    }
    for (const auto& t : poles_) {
        const double dw = w - t.omega_r;
        acc -= dw / (t.dsigma * t.dsigma + dw * dw);
    }
    return acc;
}

double LineTerms::log_magnitude_d2(double w) const {
    double acc = 0.0;
    for (const auto& t : zeros_) {
        const double dw = w - t.omega_r;
        const double g = t.dsigma * t.dsigma + dw * dw;
        acc += (t.dsigma * t.dsigma - dw * dw) / (g * g);
    }
    for (const auto& t : poles_) {
        const double dw = w - t.omega_r;
        const double g = t.dsigma * t.dsigma + dw * dw;
        acc -= (t.dsigma * t.dsigma - dw * dw) / (g * g);
    }
    return acc;
}

double LineTerms::angle_sum(double w) const {
    double acc = 0.0;
    for (const auto& t : zeros_) {
        acc += std::atan((w - t.omega_r) / t.dsigma);
    }
    for (const auto& t : poles_) {
        acc -= std::atan((w - t.omega_r) / t.dsigma);
    }
    return acc;
}

double LineTerms::angle_sum_d1(double w) const {
    double acc = 0.0;
    for (const auto& t : zeros_) {
        const double dw = w - t.omega_r;
        acc += t.dsigma / (t.dsigma * t.dsigma + dw * dw);
    }
    for (const auto& t : poles_) {
        const double dw = w - t.omega_r;
        acc -= t.dsigma / (t.dsigma * t.dsigma + dw * dw);
    }
    return acc;
}

double LineTerms::angle_sum_d2(double w) const {
    double acc = 0.0;
    for (const auto& t : zeros_) {
        const double dw = w - t.omega_r;
        const double g = t.dsigma * t.dsigma + dw * dw;
        acc -= 2.0 * t.dsigma * dw / (g * g);
    }
    for (const auto& t : poles_) {
        const double dw = w - t.omega_r;
        const double g = t.dsigma * t.dsigma + dw * dw;
        acc += 2.0 * t.dsigma * dw / (g * g);
    }
    return acc;
}

RealPolynomial LineTerms::log_magnitude_d1_numerator() const {
    std::vector<RealPolynomial> gz;
    std::vector<RealPolynomial> gp;
    for (const auto& t : zeros_) {
        gz.push_back(gamma_poly(t));
    }
    for (const auto& t : poles_) {
        gp.push_back(gamma_poly(t));
    }
    RealPolynomial gamma_z;
    RealPolynomial gamma_p;
    const auto gz_k = leave_one_out(gz, gamma_z);
    const auto gp_i = leave_one_out(gp, gamma_p);

    RealPolynomial sum_z;
    for (std::size_t k = 0; k < zeros_.size(); ++k) {
        sum_z += domega_poly(zeros_[k]) * gz_k[k];
    }
    RealPolynomial sum_p;
    for (std::size_t i = 0; i < poles_.size(); ++i) {
        sum_p += domega_poly(poles_[i]) * gp_i[i];
    }
    return gamma_p * sum_z - gamma_z * sum_p;
}

RealPolynomial LineTerms::phi_dd_numerator() const {
    auto phi_term = [this](const LineTerm& t) {
        const auto dw = domega_poly(t);
        const double ds2 = t.dsigma * t.dsigma;
        return RealPolynomial{2.0 * t.omega_r, -3.0} * ds2 + RealPolynomial{2.0 * t.omega_r, -1.0} * dw * dw -
               dw * (2.0 * sigma0_ * t.dsigma);
    };
    std::vector<RealPolynomial> gz;
    std::vector<RealPolynomial> gp;
    for (const auto& t : zeros_) {
        gz.push_back(gamma_poly(t));
    }
    for (const auto& t : poles_) {
        gp.push_back(gamma_poly(t));
    }
    RealPolynomial gamma_z;
    RealPolynomial gamma_p;
    const auto gz_k = leave_one_out(gz, gamma_z);
    const auto gp_i = leave_one_out(gp, gamma_p);

    RealPolynomial sum_z;
    for (std::size_t k = 0; k < zeros_.size(); ++k) {
        sum_z += phi_term(zeros_[k]) * gz_k[k] * gz_k[k];
    }
    RealPolynomial sum_p;
    for (std::size_t i = 0; i < poles_.size(); ++i) {
        sum_p += phi_term(poles_[i]) * gp_i[i] * gp_i[i];
    }
    return gamma_p * gamma_p * sum_z - gamma_z * gamma_z * sum_p;
}

double LineTerms::feature_scale() const {
    double s = 0.0;
    for (const auto* terms : {&zeros_, &poles_}) {
        for (const auto& t : *terms) {
            s = std::max(s, std::abs(t.omega_r) + std::abs(t.dsigma));
        }
    }
    return s;
}

double LineTerms::min_clearance() const {
    double s = std::numeric_limits<double>::infinity();
    for (const auto* terms : {&zeros_, &poles_}) {
        for (const auto& t : *terms) {
            s = std::min(s, std::abs(t.dsigma));
        }
    }
    return s;
}

std::vector<double> LineTerms::scan_grid(double cap, int per_decade) const {
    std::vector<double> grid{0.0, cap};
    const double clearance = min_clearance();
    double lo = std::isfinite(clearance) && clearance > 0.0 ? 1e-4 * clearance : 1e-4;
    lo = std::min(lo, 1e-3 * cap);
    const double decades = std::log10(cap / lo);
    const int count = static_cast<int>(std::ceil(decades * per_decade));
    for (int i = 0; i <= count; ++i) {
        grid.push_back(lo * std::pow(10.0, decades * i / count));
    }
    // Local refinement around each feature on its own length scale.
    const int local = std::max(8, per_decade / 2);
    for (const auto* terms : {&zeros_, &poles_}) {
        for (const auto& t : *terms) {
            const double c = std::abs(t.omega_r);
            const double width = std::abs(t.dsigma);
            if (c == 0.0) {
                continue;
            }
            grid.push_back(c);
            for (int i = 0; i <= 6 * local; ++i) {
                const double off = width * std::pow(10.0, -3.0 + static_cast<double>(i) / local);
                grid.push_back(c + off);
                grid.push_back(c - off);
            }
            // Uniform fill across the feature itself.
            for (int i = -4 * local; i <= 4 * local; ++i) {
                grid.push_back(c + width * static_cast<double>(i) / local);
            }
        }
    }
    std::vector<double> out;
    out.reserve(grid.size());
    for (double x : grid) {
        if (x >= 0.0 && x <= cap) {
            out.push_back(x);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace delaymargin
