#include <doctest.h>

#include <cmath>
#include <vector>

#include "delaymargin/boundary.hpp"
#include "delaymargin/errors.hpp"
#include "support/plants.hpp"

namespace dm = delaymargin;

TEST_CASE("example plant intervals at sigma0 = -0.1") {
    dm::BoundaryFunctions bf(support::example_plant(), -0.1);
    const auto ba = dm::analyze_boundary(bf);

    REQUIRE(ba.feasible.size() == 3);
    CHECK(ba.feasible[0].omega_lo == 0.0);
    CHECK(ba.feasible[0].omega_hi == doctest::Approx(1.1442).epsilon(1e-4));
    CHECK(ba.feasible[1].omega_hi == doctest::Approx(1.3687).epsilon(1e-4));
    CHECK(ba.feasible[2].omega_lo == doctest::Approx(2.2487).epsilon(1e-4));
    CHECK(ba.feasible[2].omega_hi == dm::kInf);

    REQUIRE(ba.direction.size() == 3);
    CHECK(ba.direction[0].omega_hi == doctest::Approx(1.1558).epsilon(1e-4));
    CHECK(ba.direction[1].omega_hi == doctest::Approx(1.5595).epsilon(1e-4));
    CHECK(ba.direction[0].phi_sign == -1);
    CHECK(ba.direction[1].phi_sign == 1);
    CHECK(ba.direction[2].phi_sign == -1);

    REQUIRE(ba.intervals.size() == 4);
    const int expected[4][3] = {{1, -1, 1}, {-1, -1, 1}, {-1, 1, -1}, {1, -1, 1}};
    for (int i = 0; i < 4; ++i) {
        CAPTURE(i);
        CHECK(ba.intervals[i].h_sign == expected[i][0]);
        CHECK(ba.intervals[i].phi_sign == expected[i][1]);
        CHECK(ba.intervals[i].crossing_direction == expected[i][2]);
    }
    CHECK(ba.intervals[3].unbounded());
    CHECK(dm::multiplicity_guard(bf, ba.omega_cap).empty());
}

TEST_CASE("crossing direction sign rule") {
    CHECK(dm::crossing_direction(-0.1, -1) == 1);
    CHECK(dm::crossing_direction(-0.1, 1) == -1);
    CHECK(dm::crossing_direction(-0.1, 0) == 0);
}

TEST_CASE("derivatives agree with central differences") {
    const double sigmas[] = {-0.1, -0.5, -1.7};
    for (double sigma0 : sigmas) {
        dm::BoundaryFunctions bf(support::example_plant(), sigma0);
        for (double w = 0.05; w < 6.0; w += 0.37) {
            CAPTURE(sigma0);
            CAPTURE(w);
            const double step = 1e-5;
            const auto H = [&](double x) { return bf.H(x); };
            const auto phi = [&](double x) { return bf.phi(x); };
            const auto Hp = [&](double x) { return bf.H_prime(x); };
            const auto php = [&](double x) { return bf.phi_prime(x); };
            CHECK(support::central_difference(H, w, step) == doctest::Approx(bf.H_prime(w)).epsilon(1e-6));
            CHECK(support::central_difference(phi, w, step) == doctest::Approx(bf.phi_prime(w)).epsilon(1e-6));
            CHECK(support::central_difference(Hp, w, step) == doctest::Approx(bf.H_double_prime(w)).epsilon(1e-5));
            CHECK(support::central_difference(php, w, step) == doctest::Approx(bf.phi_double_prime(w)).epsilon(1e-5));
        }
    }
}

TEST_CASE("phase is continuous and starts at the origin") {
    dm::BoundaryFunctions bf(support::example_plant(), -0.1);
    CHECK(bf.phi(0.0) == doctest::Approx(0.0));
    double prev = bf.phi(0.0);
    for (double w = 0.001; w < 20.0; w += 0.001) {
        const double v = bf.phi(w);
        REQUIRE(std::abs(v - prev) < 0.5);
        prev = v;
    }
}

TEST_CASE("numerator polynomials carry the sign of the derivative sums") {
    for (double sigma0 : {-0.1, -0.8}) {
        dm::BoundaryFunctions bf(support::example_plant(), sigma0);
        const auto hp = bf.h_prime_numerator();
        const auto pdd = bf.phi_dd_numerator();
        for (double w = 0.013; w < 8.0; w += 0.11) {
            CAPTURE(w);
            const double l1 = bf.terms().log_magnitude_d1(w);
            if (std::abs(l1) > 1e-8) {
                CHECK((hp(w) > 0.0) == (l1 > 0.0));
            }
            const double p2 = sigma0 * bf.phi_double_prime(w);
            if (std::abs(p2) > 1e-8) {
                CHECK((pdd(w) > 0.0) == (p2 > 0.0));
            }
        }
    }
}

TEST_CASE("critical points are the sign changes of the derivatives") {
    dm::BoundaryFunctions bf(support::example_plant(), -0.1);
    const double cap = dm::default_omega_cap(bf);
    const auto crit = dm::critical_points_H(bf, cap);
    std::vector<double> scanned;
    double prev = bf.H_prime(1e-6);
    for (double w = 1e-3; w <= cap; w += 1e-3) {
        const double v = bf.H_prime(w);
        if ((v > 0.0) != (prev > 0.0)) {
            scanned.push_back(w);
        }
        prev = v;
    }
    REQUIRE(crit.size() == scanned.size());
    for (std::size_t i = 0; i < crit.size(); ++i) {
        CHECK(std::abs(crit[i] - scanned[i]) < 2e-3);
    }
}

namespace {

template <class F>
std::vector<double> log_scan_sign_changes(F&& f, double lo, double hi, int n) {
    std::vector<double> out;
    double prev_w = lo;
    double prev = f(lo);
    for (int i = 1; i <= n; ++i) {
        const double w = lo * std::pow(hi / lo, static_cast<double>(i) / n);
        const double v = f(w);
        if ((v > 0.0) != (prev > 0.0)) {
            out.push_back(0.5 * (w + prev_w));
        }
        prev = v;
        prev_w = w;
    }
    return out;
}

} // namespace

TEST_CASE("heat-diffusion plant critical points match a dense scan") {
    dm::BoundaryFunctions bf(support::heat_plant(100), -0.5);
    const double cap = dm::default_omega_cap(bf);
    const auto h_crit = dm::critical_points_H(bf, cap);
    const auto phi_crit = dm::critical_points_phi_prime(bf, cap);
    const auto h_scan = log_scan_sign_changes([&](double w) { return bf.H_prime(w); }, 1e-4, cap, 400000);
    const auto phi_scan = log_scan_sign_changes([&](double w) { return bf.phi_double_prime(w); }, 1e-4, cap, 400000);
    CHECK(h_crit.size() + phi_crit.size() > 0);
    REQUIRE(h_crit.size() == h_scan.size());
    REQUIRE(phi_crit.size() == phi_scan.size());
    for (std::size_t i = 0; i < h_crit.size(); ++i) {
        CHECK(std::abs(h_crit[i] - h_scan[i]) < 1e-3 * (1.0 + h_scan[i]));
    }
    for (std::size_t i = 0; i < phi_crit.size(); ++i) {
        CHECK(std::abs(phi_crit[i] - phi_scan[i]) < 1e-3 * (1.0 + phi_scan[i]));
    }
}

TEST_CASE("multiplicity guard finds a double root on the boundary") {
    // 1 + e^-2 e^{-hs}/(s+1) has a double root at s = -2 for h = 1.
    const dm::PoleZeroGain g{std::exp(-2.0), {}, {{-1.0, 0.0}}};
    dm::BoundaryFunctions bf(g, -2.0);
    const auto hits = dm::multiplicity_guard(bf, dm::default_omega_cap(bf));
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].omega0 == doctest::Approx(0.0));
    CHECK(hits[0].h0 == doctest::Approx(1.0));
}

TEST_CASE("construction rejects a pole on the boundary and sigma0 >= 0") {
    const dm::PoleZeroGain g{1.0, {}, {{-0.5, 0.0}, {-2.0, 0.0}}};
    try {
        dm::BoundaryFunctions bf(g, -0.5);
        FAIL("expected BoundaryClearance");
    } catch (const dm::Error& e) {
        CHECK(e.kind() == dm::ErrorKind::BoundaryClearance);
    }
    CHECK_THROWS_AS(dm::BoundaryFunctions(g, 0.0), dm::Error);
}

TEST_CASE("bi-proper limit of H") {
    const dm::PoleZeroGain g{0.5, {{-1.0, 0.0}}, {{-3.0, 0.0}}};
    dm::BoundaryFunctions bf(g, -0.2);
    CHECK(bf.H_at_infinity() == doctest::Approx(std::log(0.5) / -0.2));
    CHECK(bf.H(1e6) == doctest::Approx(bf.H_at_infinity()).epsilon(1e-6));
    dm::BoundaryFunctions strict(support::example_plant(), -0.2);
    CHECK(strict.H_at_infinity() == dm::kInf);
}
