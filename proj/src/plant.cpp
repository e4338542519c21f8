#include "delaymargin/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "delaymargin/errors.hpp"

namespace delaymargin {

namespace {

bool is_real(const Complex& r) {
    return std::abs(r.imag()) <= 1e-12 * (1.0 + std::abs(r));
}

bool conjugate_closed(const std::vector<Complex>& roots) {
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i] || is_real(roots[i])) {
            continue;
        }
        bool found = false;
        for (std::size_t j = 0; j < roots.size(); ++j) {
            if (j == i || used[j]) {
                continue;
            }
            if (std::abs(roots[j] - std::conj(roots[i])) <= 1e-12 * std::max(1.0, std::abs(roots[i]))) {
                used[i] = used[j] = true;
                found = true;
                break;
            }
        }
        if (!found) {
            return false;
        }
    }
    return true;
}

std::vector<double> trimmed(std::span<const double> c) {
    std::vector<double> out(c.begin(), c.end());
    while (!out.empty() && out.back() == 0.0) {
        out.pop_back();
    }
    return out;
}

} // namespace

void validate(const PoleZeroGain& plant) {
    if (plant.zeros.size() > plant.poles.size()) {
        std::ostringstream msg;
        msg << "plant has " << plant.zeros.size() << " zeros but only " << plant.poles.size() << " poles";
        throw Error(ErrorKind::NotProper, msg.str());
    }
    if (!conjugate_closed(plant.zeros)) {
        throw Error(ErrorKind::NotConjugateClosed, "a non-real zero lacks its conjugate");
    }
    if (!conjugate_closed(plant.poles)) {
        throw Error(ErrorKind::NotConjugateClosed, "a non-real pole lacks its conjugate");
    }
    if (plant.gain == 0.0 || !std::isfinite(plant.gain)) {
        throw Error(ErrorKind::ZeroGain, "plant gain must be finite and nonzero");
    }
}

Complex eval(const PoleZeroGain& plant, Complex s) {
    Complex value = plant.gain;
    for (const auto& p : plant.poles) {
        if (std::abs(s - p) < 1e-14 * (1.0 + std::abs(s))) {
            std::ostringstream msg;
            msg << "evaluation at s=" << s << " coincides with pole " << p;
            throw Error(ErrorKind::PoleEvaluation, msg.str());
        }
    }
    // Interleave numerator and denominator factors to keep magnitudes tame
    // for high-order plants.
    const std::size_t m = plant.zeros.size();
    const std::size_t n = plant.poles.size();
    for (std::size_t i = 0; i < std::max(m, n); ++i) {
        if (i < m) {
            value *= (s - plant.zeros[i]);
        }
        if (i < n) {
            value /= (s - plant.poles[i]);
        }
    }
    return value;
}

Complex log_derivative(const PoleZeroGain& plant, Complex s) {
    Complex acc = 0.0;
    for (const auto& z : plant.zeros) {
        acc += 1.0 / (s - z);
    }
    for (const auto& p : plant.poles) {
        acc -= 1.0 / (s - p);
    }
    return acc;
}

double feedthrough(const PoleZeroGain& plant) {
    return is_biproper(plant) ? plant.gain : 0.0;
}

double boundary_clearance(const PoleZeroGain& plant, const BoundaryConfig& cfg) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& z : plant.zeros) {
        best = std::min(best, std::abs(z.real() - cfg.sigma0));
    }
    for (const auto& p : plant.poles) {
        best = std::min(best, std::abs(p.real() - cfg.sigma0));
    }
    return best;
}

RealPolynomial char_poly_at_zero_delay(const PoleZeroGain& plant) {
    const auto den = RealPolynomial::from_roots(plant.poles);
    const auto num = RealPolynomial::from_roots(plant.zeros) * plant.gain;
    if (is_biproper(plant) && std::abs(1.0 + plant.gain) <= 1e-14) {
        throw Error(ErrorKind::DegenerateClosedLoop,
                    "bi-proper plant with gain -1: closed-loop leading coefficient vanishes");
    }
    return den + num;
}

PoleZeroGain from_rational(std::span<const double> num, std::span<const double> den) {
    const auto n = trimmed(num);
    const auto d = trimmed(den);
    if (d.empty()) {
        throw Error(ErrorKind::InvalidArgument, "denominator is the zero polynomial");
    }
    if (n.empty()) {
        throw Error(ErrorKind::ZeroGain, "numerator is the zero polynomial");
    }
    PoleZeroGain plant;
    plant.gain = n.back() / d.back();
    plant.zeros = all_complex_roots(RealPolynomial(n));
    plant.poles = all_complex_roots(RealPolynomial(d));
    for (const auto& z : plant.zeros) {
        for (const auto& p : plant.poles) {
            if (std::abs(z - p) < 1e-9 * (1.0 + std::abs(p))) {
                std::ostringstream msg;
                msg << "zero " << z << " cancels pole " << p;
                throw Error(ErrorKind::PoleZeroCancellation, msg.str());
            }
        }
    }
    validate(plant);
    return plant;
}

} // namespace delaymargin
