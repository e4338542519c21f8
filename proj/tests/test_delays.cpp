#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "delaymargin/delays.hpp"
#include "delaymargin/errors.hpp"
#include "delaymargin/oracle.hpp"
#include "support/plants.hpp"

namespace dm = delaymargin;

namespace {

constexpr double kPi = std::numbers::pi;

dm::ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const dm::Error& e) {
        return e.kind();
    }
    FAIL("no error raised");
    return dm::ErrorKind::InvalidArgument;
}

} // namespace

TEST_CASE("example plant events and counts up to h = 7") {
    const auto a = dm::analyze_up_to(support::example_plant(), {-0.1, 1e-8}, 7.0);
    const double delays[] = {0.879, 2.984, 3.280, 4.488, 4.556, 5.800, 6.831};
    const double omegas[] = {2.377, 2.784, 1.325, 0.642, 3.192, 3.584, 3.958};
    const int directions[] = {1, 1, -1, 1, 1, 1, 1};
    const int counts[] = {0, 2, 4, 2, 4, 6, 8, 10};
    REQUIRE(a.events.size() == 7);
    REQUIRE(a.reports.size() == 8);
    CHECK(a.initial_count == 0);
    for (int i = 0; i < 7; ++i) {
        CAPTURE(i);
        CHECK(a.events[i].delay == doctest::Approx(delays[i]).epsilon(2e-4));
        CHECK(a.events[i].omega == doctest::Approx(omegas[i]).epsilon(5e-4));
        CHECK(a.events[i].direction == directions[i]);
    }
    for (int i = 0; i < 8; ++i) {
        CHECK(a.reports[i].count == counts[i]);
    }
    CHECK(a.reports.front().h_lo == 0.0);
    CHECK(a.reports.front().lo_closed);
    CHECK(a.reports.back().h_hi == 7.0);
    CHECK(a.reports.back().hi_closed);
    for (std::size_t i = 0; i + 1 < a.reports.size(); ++i) {
        CHECK(a.reports[i].h_hi == a.reports[i + 1].h_lo);
    }
}

TEST_CASE("cursor on the first interval") {
    const auto plant = support::example_plant();
    dm::BoundaryFunctions bf(plant, -0.1);
    const auto ba = dm::analyze_boundary(bf);
    const double phi0 = dm::phase_offset(plant, -0.1);
    CHECK(phi0 == 0.0);
    CHECK(dm::initial_line(ba.intervals[0], phi0) == doctest::Approx(-kPi));

    dm::IntervalCursor cursor(bf, ba.intervals[0], 0, phi0);
    CHECK(cursor.omega() == doctest::Approx(0.642).epsilon(1e-3));
    CHECK(cursor.delay() == doctest::Approx(4.488).epsilon(1e-3));
    cursor.advance();
    CHECK(cursor.line() == doctest::Approx(-3.0 * kPi));
    CHECK(cursor.omega() == doctest::Approx(1.0307).epsilon(1e-3));
    CHECK(support::closed_loop_residual(plant, cursor.delay(), {-0.1, cursor.omega()}) < 1e-10);
}

TEST_CASE("cursor on the unbounded interval advances monotonically") {
    const auto plant = support::example_plant();
    dm::BoundaryFunctions bf(plant, -0.1);
    const auto ba = dm::analyze_boundary(bf);
    dm::IntervalCursor cursor(bf, ba.intervals.back(), 3, 0.0);
    double prev_delay = cursor.delay();
    double prev_line = cursor.line();
    for (int k = 0; k < 100; ++k) {
        cursor.advance();
        REQUIRE_FALSE(cursor.exhausted());
        CHECK(cursor.delay() > prev_delay);
        CHECK(std::abs(std::abs(cursor.line() - prev_line) - 2.0 * kPi) < 1e-9);
        CHECK(support::closed_loop_residual(plant, cursor.delay(), {-0.1, cursor.omega()}) < 1e-8);
        prev_delay = cursor.delay();
        prev_line = cursor.line();
    }
}

TEST_CASE("leaving count equals the phase levels inside leaving intervals") {
    const auto plant = support::example_plant();
    dm::BoundaryFunctions bf(plant, -0.1);
    const auto ba = dm::analyze_boundary(bf);
    const double phi0 = dm::phase_offset(plant, -0.1);
    int brute = 0;
    for (const auto& iv : ba.intervals) {
        if (iv.crossing_direction >= 0) {
            continue;
        }
        for (int l = -100; l <= 100; ++l) {
            const double level = (2 * l + 1) * kPi - phi0;
            if (level > iv.phi_min() && level < iv.phi_max()) {
                ++brute;
            }
        }
    }
    CHECK(brute > 0);
    CHECK(dm::leaving_count_total(ba.intervals, phi0) == brute);
    CHECK(dm::leaving_root_budget(ba.intervals, phi0) == 2 * brute);
}

TEST_CASE("stability over all delays for the example plant") {
    const auto v = dm::analyze_all_delays(support::example_plant(), {-0.1, 1e-8});
    REQUIRE(v.stable_intervals.size() == 1);
    CHECK(v.stable_intervals[0].h_lo == 0.0);
    CHECK(v.stable_intervals[0].lo_closed);
    CHECK(v.stable_intervals[0].h_hi == doctest::Approx(0.879).epsilon(1e-3));
    CHECK(v.verdict_flag == dm::VerdictFlag::normal);
    CHECK(v.leaving_budget > 0);
    CHECK(v.termination_delay >= v.stable_intervals[0].h_hi);
}

TEST_CASE("zero-delay census") {
    const auto c = dm::closed_loop_census(support::example_plant(), -0.1);
    CHECK(c.inside == 0);
    CHECK(c.on_boundary == 0);

    const auto t = dm::closed_loop_census(support::cubic_plant(), 0.0);
    CHECK(t.inside == 0);
    CHECK(t.on_boundary == 2);
    CHECK(kind_of([] { dm::initial_root_count(support::cubic_plant(), 0.0); }) == dm::ErrorKind::RootOnBoundary);

    const auto l = dm::closed_loop_census(support::negative_gain_plant(), -0.5);
    CHECK(l.inside == 2);
}

TEST_CASE("census of a large plant agrees with the oracle") {
    std::mt19937_64 rng(11);
    support::RandomPlantSpec spec;
    spec.re_lo = -6.0;
    spec.re_hi = 0.5;
    const auto poles = support::random_roots(rng, 40, spec);
    const auto zeros = support::random_roots(rng, 35, spec);
    const dm::PoleZeroGain g{0.7, zeros, poles};
    for (double sigma0 : {-0.3, -1.1, -2.5}) {
        CAPTURE(sigma0);
        if (dm::boundary_clearance(g, {sigma0, 1e-8}) < 1e-3) {
            continue;
        }
        const int count = dm::initial_root_count(g, sigma0);
        const auto region = dm::CountRegion{sigma0, 100.0, 100.0};
        CHECK(count == dm::count_roots(g, 0.0, region));
    }
}

TEST_CASE("bi-proper plants") {
    SUBCASE("|d| >= 1 short-circuits") {
        const dm::PoleZeroGain g{2.0, {{-1.0, 0.0}}, {{-3.0, 0.0}}};
        const auto v = dm::analyze_all_delays(g, {-0.1, 1e-8});
        CHECK(v.verdict_flag == dm::VerdictFlag::biproper_unit_or_more);
        CHECK(v.stable_intervals.empty());
        CHECK(v.detail.events.empty());
        const auto a = dm::analyze_up_to(g, {-0.1, 1e-8}, 5.0);
        REQUIRE_FALSE(a.reports.empty());
        CHECK(a.reports.back().infinite_roots);
    }
    SUBCASE("|d| < 1 caps the delay range") {
        const dm::PoleZeroGain g{0.5, {{-1.0, 0.0}}, {{-3.0, 0.0}}};
        const double cap = std::log(0.5) / -0.2;
        const auto a = dm::analyze_up_to(g, {-0.2, 1e-8}, 10.0);
        CHECK(a.flag == dm::VerdictFlag::biproper_capped);
        CHECK(a.h_cap == doctest::Approx(cap));
        REQUIRE_FALSE(a.reports.empty());
        CHECK(a.reports.back().infinite_roots);
        CHECK(a.reports.back().h_lo == doctest::Approx(cap));
        for (const auto& e : a.events) {
            CHECK(e.delay < cap);
        }
        const auto v = dm::analyze_all_delays(g, {-0.2, 1e-8});
        for (const auto& s : v.stable_intervals) {
            CHECK(s.h_hi <= cap + 1e-9);
        }
    }
}

TEST_CASE("pole on the boundary is moved with a warning") {
    const dm::PoleZeroGain g{1.0, {}, {{-0.5, 0.0}, {-2.0, 0.0}}};
    const auto a = dm::analyze_up_to(g, {-0.5, 1e-8}, 3.0);
    CHECK(a.sigma0 < -0.5);
    CHECK(a.sigma0 > -0.5001);
    REQUIRE_FALSE(a.warnings.empty());
    CHECK(a.warnings[0].find("sigma0 moved") != std::string::npos);
}

TEST_CASE("argument checks") {
    CHECK(kind_of([] { dm::analyze_up_to(support::example_plant(), {-0.1, 1e-8}, -1.0); }) ==
          dm::ErrorKind::InvalidArgument);
    CHECK(kind_of([] { dm::analyze_up_to(support::example_plant(), {0.5, 1e-8}, 1.0); }) ==
          dm::ErrorKind::InvalidArgument);
    CHECK(kind_of([] { dm::analyze_all_delays(support::example_plant(), {0.0, 1e-8}); }) ==
          dm::ErrorKind::InvalidArgument);
}

TEST_CASE("stable intervals join across an included endpoint only") {
    std::vector<dm::DelayIntervalReport> reports(5);
    reports[0] = {0.0, 1.0, 0, true, false, false, {}};
    reports[1] = {1.0, 2.0, 2, false, false, false, {}};
    reports[2] = {2.0, 3.0, 0, false, true, false, {}};
    reports[3] = {3.0, 4.0, 0, false, false, false, {}};
    reports[4] = {4.0, 5.0, 0, false, true, false, {}};
    const auto s = dm::stable_intervals(reports);
    REQUIRE(s.size() == 3);
    CHECK(s[0].h_hi == 1.0);
    CHECK(s[1].h_lo == 2.0);
    CHECK(s[1].h_hi == 4.0);
    CHECK_FALSE(s[1].hi_closed);
    CHECK(s[2].h_lo == 4.0);
    CHECK(s[2].hi_closed);
}
