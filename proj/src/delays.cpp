#include "delaymargin/delays.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "delaymargin/errors.hpp"

namespace delaymargin {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Slack (in units of 2 pi) when rounding a phase onto the level grid.
constexpr double kLevelEps = 1e-10;
// A crossing below this frequency is a real root (multiplicity 1).
constexpr double kRealCrossing = 1e-10;
// Events this close in delay share one report boundary.
constexpr double kTieTol = 1e-10;
constexpr double kDuplicateTol = 1e-9;
constexpr std::size_t kPolynomialCountLimit = 30;
// Fraction of the bi-proper delay cap left out of the enumeration; crossings
// accumulate at the cap itself.
constexpr double kCapMargin = 1e-6;

using numeric::sign;

double level(double l, double phi0) {
    return (2.0 * l + 1.0) * kPi - phi0;
}

double level_index_ceil(double phi, double phi0) {
    return std::ceil((phi + phi0) / kTwoPi - 0.5 - kLevelEps);
}

double level_index_floor(double phi, double phi0) {
    return std::floor((phi + phi0) / kTwoPi - 0.5 + kLevelEps);
}

double level_slack(double phi) {
    return kTwoPi * kLevelEps * (1.0 + std::abs(phi));
}

int multiplicity(double omega) {
    return omega < kRealCrossing ? 1 : 2;
}

bool same_delay(double a, double b) {
    return std::abs(a - b) <= kTieTol * (1.0 + std::abs(a));
}

std::string describe(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

int nyquist_count(const PoleZeroGain& plant, double sigma0) {
    int right_poles = 0;
    double scale = 1.0 + std::abs(sigma0);
    for (const auto& p : plant.poles) {
        right_poles += p.real() > sigma0 ? 1 : 0;
        scale = std::max(scale, std::abs(p) + 1.0);
    }
    for (const auto& z : plant.zeros) {
        scale = std::max(scale, std::abs(z) + 1.0);
    }
    const Complex at_infinity = 1.0 + feedthrough(plant);
    const auto value = [&](double theta) {
        if (theta >= 0.5 * kPi) {
            return at_infinity;
        }
        return 1.0 + eval(plant, Complex{sigma0, scale * std::tan(theta)});
    };

    double min_mag = kInf;
    const auto check = [&min_mag](Complex v) {
        min_mag = std::min(min_mag, std::abs(v));
    };

    // Accumulated phase of 1 + G along w = scale tan(theta), theta in [0, pi/2].
    double total = 0.0;
    const int n = 2048;
    double t0 = 0.0;
    Complex v0 = value(t0);
    check(v0);
    for (int i = 1; i <= n; ++i) {
        const double t1 = 0.5 * kPi * i / n;
        const Complex v1 = value(t1);
        check(v1);
        struct Seg {
            double ta, tb;
            Complex va, vb;
            int depth;
        };
        std::vector<Seg> stack{{t0, t1, v0, v1, 0}};
        while (!stack.empty()) {
            const Seg s = stack.back();
            stack.pop_back();
            const double d = std::arg(s.vb / s.va);
            if (std::abs(d) > 0.25 * kPi && s.depth < 40) {
                const double tm = 0.5 * (s.ta + s.tb);
                const Complex vm = value(tm);
                check(vm);
                stack.push_back({tm, s.tb, vm, s.vb, s.depth + 1});
                stack.push_back({s.ta, tm, s.va, vm, s.depth + 1});
            } else {
                total += d;
            }
        }
        t0 = t1;
        v0 = v1;
    }
    if (min_mag < 1e-9) {
        throw Error(ErrorKind::RootOnBoundary, "closed-loop root on Re(s) = " + describe(sigma0) + " at h = 0");
    }
    const double half_turns = total / kPi;
    const double rounded = std::round(half_turns);
    if (std::abs(half_turns - rounded) > 0.1) {
        throw Error(ErrorKind::DidNotConverge, "argument principle count is not an integer");
    }
    return right_poles - static_cast<int>(rounded);
}

double perturb(double sigma0) {
    return sigma0 - 1e-6 * (1.0 + std::abs(sigma0));
}

struct Prepared {
    BoundaryFunctions bf;
    BoundaryAnalysis boundary;
    int initial_count;
    double phi0;
};

Prepared prepare(const PoleZeroGain& plant, const BoundaryConfig& cfg, const AnalysisOptions& opts,
                 std::vector<std::string>& warnings) {
    double sigma0 = cfg.sigma0;
    for (int attempt = 0; attempt <= opts.max_perturbations; ++attempt) {
        std::string reason;
        if (boundary_clearance(plant, {sigma0, cfg.clearance_tol}) < cfg.clearance_tol) {
            reason = "pole or zero on the boundary";
        } else {
            BoundaryFunctions bf(plant, sigma0, cfg.clearance_tol, opts.bisect_tol);
            auto boundary = analyze_boundary(bf, opts.omega_cap);
            const auto hits = multiplicity_guard(bf, boundary.omega_cap);
            if (!hits.empty()) {
                reason = "multiple root on the boundary at w = " + describe(hits.front().omega0) +
                         ", h = " + describe(hits.front().h0);
            } else {
                try {
                    const auto census = closed_loop_census(plant, sigma0);
                    if (census.on_boundary > 0) {
                        reason = "closed-loop root on the boundary at h = 0";
                    } else {
                        const double phi0 = phase_offset(plant, sigma0);
                        return {std::move(bf), std::move(boundary), census.inside, phi0};
                    }
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::RootOnBoundary) {
                        throw;
                    }
                    reason = "closed-loop root on the boundary at h = 0";
                }
            }
        }
        const double next = perturb(sigma0);
        warnings.push_back(reason + "; sigma0 moved from " + describe(sigma0) + " to " + describe(next));
        sigma0 = next;
    }
    throw Error(ErrorKind::DidNotConverge, "no admissible boundary near sigma0 = " + describe(cfg.sigma0));
}

DelayAnalysis unit_feedthrough(double sigma0, double h_max) {
    DelayAnalysis out;
    out.sigma0 = sigma0;
    out.flag = VerdictFlag::biproper_unit_or_more;
    out.h_cap = 0.0;
    DelayIntervalReport r;
    r.h_lo = 0.0;
    r.h_hi = h_max;
    r.hi_closed = std::isfinite(h_max);
    r.infinite_roots = true;
    out.reports.push_back(r);
    return out;
}

void check_horizon(double h_max) {
    if (!(h_max > 0.0) || !std::isfinite(h_max)) {
        throw Error(ErrorKind::InvalidArgument, "h_max must be positive and finite");
    }
}

} // namespace

std::string_view verdict_name(VerdictFlag flag) {
    switch (flag) {
    case VerdictFlag::normal:
        return "normal";
    case VerdictFlag::biproper_unit_or_more:
        return "biproper_unit_or_more";
    case VerdictFlag::biproper_capped:
        return "biproper_capped";
    }
    return "normal";
}

IntervalCursor::IntervalCursor(const BoundaryFunctions& bf, const BoundaryInterval& interval, int index, double phi0)
    : bf_(&bf), interval_(interval), index_(index), phi0_(phi0) {
    if (interval.tangential || interval.h_sign == 0 || interval.phi_sign == 0) {
        exhausted_ = true;
        return;
    }
    step_ = interval.phi_sign * interval.h_sign > 0 ? kTwoPi : -kTwoPi;
    try {
        line_ = initial_line(interval, phi0);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoIntersection) {
            throw;
        }
        exhausted_ = true;
        return;
    }
    solve();
}

bool IntervalCursor::in_range(double line) const {
    const double lo = interval_.phi_min();
    const double hi = interval_.phi_max();
    return line >= lo - (std::isfinite(lo) ? level_slack(lo) : 0.0) &&
           line <= hi + (std::isfinite(hi) ? level_slack(hi) : 0.0);
}

void IntervalCursor::solve() {
    const auto [w, h] = solve_crossing(*bf_, interval_, line_);
    omega_ = w;
    delay_ = h;
}

void IntervalCursor::advance() {
    if (exhausted_) {
        return;
    }
    line_ += step_;
    if (!in_range(line_)) {
        exhausted_ = true;
        return;
    }
    solve();
}

double phase_offset(const PoleZeroGain& plant, double sigma0) {
    return eval(plant, Complex{sigma0, 0.0}).real() > 0.0 ? 0.0 : kPi;
}

double initial_line(const BoundaryInterval& interval, double phi0) {
    if (interval.tangential || interval.h_sign == 0 || interval.phi_sign == 0) {
        throw Error(ErrorKind::NoIntersection, "interval has no monotone delay");
    }
    const double lo = interval.phi_min();
    const double hi = interval.phi_max();
    if (interval.phi_sign * interval.h_sign > 0) {
        if (!std::isfinite(lo)) {
            throw Error(ErrorKind::NoIntersection, "smallest delay on the interval lies at infinity");
        }
        const double line = level(level_index_ceil(lo, phi0), phi0);
        if (std::isfinite(hi) && line > hi + level_slack(hi)) {
            throw Error(ErrorKind::NoIntersection, "no phase level inside the interval");
        }
        return line;
    }
    if (!std::isfinite(hi)) {
        throw Error(ErrorKind::NoIntersection, "smallest delay on the interval lies at infinity");
    }
    const double line = level(level_index_floor(hi, phi0), phi0);
    if (std::isfinite(lo) && line < lo - level_slack(lo)) {
        throw Error(ErrorKind::NoIntersection, "no phase level inside the interval");
    }
    return line;
}

std::pair<double, double> solve_crossing(const BoundaryFunctions& bf, const BoundaryInterval& interval, double line) {
    const auto g = [&bf, line](double w) { return bf.phi(w) - line; };
    const double lo = interval.omega_lo;
    double hi = interval.omega_hi;
    const double g_lo = interval.phi_lo - line;
    if (g_lo == 0.0) {
        return {lo, bf.H(lo)};
    }
    double g_hi;
    if (interval.unbounded()) {
        hi = std::max({2.0 * lo, lo + 1.0, 1.0});
        g_hi = g(hi);
        for (int i = 0; i < 200 && sign(g_hi) == sign(g_lo); ++i) {
            hi *= 2.0;
            g_hi = g(hi);
        }
        if (sign(g_hi) == sign(g_lo)) {
            throw Error(ErrorKind::DidNotConverge, "phase level not bracketed on the unbounded interval");
        }
    } else {
        g_hi = interval.phi_hi - line;
        if (g_hi == 0.0) {
            return {hi, bf.H(hi)};
        }
        if (sign(g_hi) == sign(g_lo)) {
            // Level sits on an endpoint up to rounding.
            const double w = std::abs(g_lo) <= std::abs(g_hi) ? lo : hi;
            return {w, bf.H(w)};
        }
    }
    const double w = numeric::bisect(g, lo, hi, g_lo, bf.bisect_tol());
    return {w, bf.H(w)};
}

RootCensus closed_loop_census(const PoleZeroGain& plant, double sigma0, double boundary_tol) {
    validate(plant);
    RootCensus census;
    if (plant.poles.size() > kPolynomialCountLimit) {
        census.inside = nyquist_count(plant, sigma0);
        return census;
    }
    const auto poly = char_poly_at_zero_delay(plant);
    if (poly.degree() <= 0) {
        return census;
    }
    for (const auto& r : all_complex_roots(poly)) {
        const double d = r.real() - sigma0;
        if (std::abs(d) <= boundary_tol * (1.0 + std::abs(sigma0))) {
            ++census.on_boundary;
        } else if (d > 0.0) {
            ++census.inside;
        }
    }
    return census;
}

int initial_root_count(const PoleZeroGain& plant, double sigma0) {
    const auto census = closed_loop_census(plant, sigma0);
    if (census.on_boundary > 0) {
        throw Error(ErrorKind::RootOnBoundary, "closed-loop root on Re(s) = " + describe(sigma0) + " at h = 0");
    }
    return census.inside;
}

Enumeration enumerate(const BoundaryFunctions& bf, std::span<const BoundaryInterval> intervals, double phi0,
                      int initial_count, const StopRule& stop) {
    std::vector<IntervalCursor> cursors;
    cursors.reserve(intervals.size());
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        cursors.emplace_back(bf, intervals[i], static_cast<int>(i), phi0);
    }

    Enumeration out;
    int count = initial_count;
    std::optional<int> budget = stop.leaving_root_budget;
    double h_lo = 0.0;
    bool lo_closed = true;

    while (true) {
        IntervalCursor* best = nullptr;
        for (auto& c : cursors) {
            if (c.exhausted()) {
                continue;
            }
            if (best == nullptr || c.delay() < best->delay() - kTieTol * (1.0 + best->delay()) ||
                (same_delay(c.delay(), best->delay()) && c.omega() < best->omega())) {
                best = &c;
            }
        }
        const bool tied = best != nullptr && !out.events.empty() && same_delay(best->delay(), out.events.back().delay);
        if (!tied && budget && count > *budget) {
            out.budget_stop = true;
            break;
        }
        if (best == nullptr || best->delay() > stop.horizon) {
            break;
        }

        const double h = best->delay();
        const double w = best->omega();
        CrossingEvent ev{h, w, Complex{bf.sigma0(), w}, best->interval().crossing_direction, best->index(),
                         best->line()};
        best->advance();
        const bool duplicate = std::any_of(out.events.begin(), out.events.end(), [&](const CrossingEvent& e) {
            return std::abs(e.omega - w) <= kDuplicateTol * (1.0 + w) &&
                   std::abs(e.delay - h) <= kDuplicateTol * (1.0 + h);
        });
        if (duplicate) {
            continue;
        }
        if (out.events.size() >= stop.max_events) {
            throw Error(ErrorKind::DidNotConverge, "crossing enumeration exceeded its event limit");
        }

        if (tied) {
            out.reports.back().events_at_hi.push_back(ev);
        } else {
            DelayIntervalReport r;
            r.h_lo = h_lo;
            r.h_hi = h;
            r.count = count;
            r.lo_closed = lo_closed;
            r.events_at_hi.push_back(ev);
            out.reports.push_back(std::move(r));
            h_lo = h;
            lo_closed = false;
        }
        out.events.push_back(ev);
        const int m = multiplicity(w);
        count += m * ev.direction;
        if (count < 0) {
            throw Error(ErrorKind::NegativeCount, "root count dropped below zero at h = " + describe(h));
        }
        if (budget && ev.direction < 0) {
            *budget -= m;
        }
        out.termination_delay = h;
    }

    DelayIntervalReport last;
    last.h_lo = h_lo;
    last.h_hi = out.budget_stop ? kInf : stop.horizon;
    last.count = count;
    last.lo_closed = lo_closed;
    last.hi_closed = std::isfinite(last.h_hi);
    out.reports.push_back(std::move(last));
    out.final_count = count;
    return out;
}

int leaving_count_total(std::span<const BoundaryInterval> intervals, double phi0) {
    int total = 0;
    for (const auto& iv : intervals) {
        if (iv.tangential || iv.crossing_direction >= 0) {
            continue;
        }
        if (!std::isfinite(iv.phi_min()) || !std::isfinite(iv.phi_max())) {
            throw Error(ErrorKind::UnboundedLeavingInterval, "leaving interval with unbounded phase");
        }
        const double n = level_index_floor(iv.phi_max(), phi0) - level_index_ceil(iv.phi_min(), phi0) + 1.0;
        total += static_cast<int>(std::max(0.0, n));
    }
    return total;
}

int leaving_root_budget(std::span<const BoundaryInterval> intervals, double phi0) {
    int total = 0;
    for (const auto& iv : intervals) {
        const int n = leaving_count_total(std::span<const BoundaryInterval>(&iv, 1), phi0);
        if (n == 0) {
            continue;
        }
        bool real_crossing = false;
        if (iv.omega_lo < kRealCrossing) {
            const double l = std::round((iv.phi_lo + phi0) / kTwoPi - 0.5);
            real_crossing = std::abs(level(l, phi0) - iv.phi_lo) <= level_slack(iv.phi_lo);
        }
        total += 2 * n - (real_crossing ? 1 : 0);
    }
    return total;
}

DelayAnalysis analyze_up_to(const PoleZeroGain& plant, const BoundaryConfig& cfg, double h_max,
                            const AnalysisOptions& opts) {
    validate(plant);
    check_horizon(h_max);
    if (cfg.sigma0 > 0.0) {
        throw Error(ErrorKind::InvalidArgument, "sigma0 must be <= 0");
    }
    if (is_biproper(plant) && std::abs(plant.gain) >= 1.0) {
        return unit_feedthrough(cfg.sigma0, h_max);
    }

    std::vector<std::string> warnings;
    BoundaryConfig effective = cfg;
    if (cfg.sigma0 == 0.0) {
        try {
            return imaginary_axis_analysis(plant, h_max, opts);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::BoundaryClearance) {
                throw;
            }
            effective.sigma0 = -1e-6;
            warnings.push_back("pole or zero on the imaginary axis; sigma0 moved from 0 to -1e-06");
        }
    }

    auto prepared = prepare(plant, effective, opts, warnings);
    const auto& bf = prepared.bf;

    DelayAnalysis out;
    out.sigma0 = bf.sigma0();
    out.initial_count = prepared.initial_count;
    out.intervals = prepared.boundary.intervals;
    out.h_cap = bf.H_at_infinity();
    out.warnings = std::move(warnings);

    const bool capped = out.h_cap <= h_max;
    StopRule rule;
    rule.max_events = opts.max_events;
    rule.horizon = capped ? out.h_cap * (1.0 - kCapMargin) : h_max;

    auto en = enumerate(bf, out.intervals, prepared.phi0, prepared.initial_count, rule);
    out.events = std::move(en.events);
    out.reports = std::move(en.reports);
    if (capped) {
        out.flag = VerdictFlag::biproper_capped;
        out.reports.back().h_hi = out.h_cap;
        out.reports.back().hi_closed = false;
        DelayIntervalReport tail;
        tail.h_lo = out.h_cap;
        tail.h_hi = h_max;
        tail.count = out.reports.back().count;
        tail.lo_closed = true;
        tail.hi_closed = true;
        tail.infinite_roots = true;
        out.reports.push_back(std::move(tail));
    } else {
        out.reports.back().hi_closed = true;
    }
    return out;
}

AllDelaysVerdict analyze_all_delays(const PoleZeroGain& plant, const BoundaryConfig& cfg,
                                    const AnalysisOptions& opts) {
    validate(plant);
    if (!(cfg.sigma0 < 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "stability over all delays needs sigma0 < 0");
    }
    AllDelaysVerdict verdict;
    if (is_biproper(plant) && std::abs(plant.gain) >= 1.0) {
        verdict.detail = unit_feedthrough(cfg.sigma0, kInf);
        verdict.verdict_flag = VerdictFlag::biproper_unit_or_more;
        return verdict;
    }

    std::vector<std::string> warnings;
    auto prepared = prepare(plant, cfg, opts, warnings);
    const auto& bf = prepared.bf;
    auto& detail = verdict.detail;
    detail.sigma0 = bf.sigma0();
    detail.initial_count = prepared.initial_count;
    detail.intervals = prepared.boundary.intervals;
    detail.h_cap = bf.H_at_infinity();
    detail.warnings = std::move(warnings);

    verdict.leaving_budget = leaving_count_total(detail.intervals, prepared.phi0);
    StopRule rule;
    rule.max_events = opts.max_events;
    rule.leaving_root_budget = leaving_root_budget(detail.intervals, prepared.phi0);
    const bool capped = std::isfinite(detail.h_cap);
    rule.horizon = capped ? detail.h_cap * (1.0 - kCapMargin) : kInf;

    auto en = enumerate(bf, detail.intervals, prepared.phi0, prepared.initial_count, rule);
    detail.events = std::move(en.events);
    detail.reports = std::move(en.reports);
    verdict.termination_delay = en.termination_delay;
    if (capped) {
        verdict.verdict_flag = VerdictFlag::biproper_capped;
        detail.flag = VerdictFlag::biproper_capped;
        auto& last = detail.reports.back();
        if (!en.budget_stop) {
            last.h_hi = detail.h_cap;
            last.hi_closed = false;
            DelayIntervalReport tail;
            tail.h_lo = detail.h_cap;
            tail.h_hi = kInf;
            tail.count = last.count;
            tail.lo_closed = true;
            tail.infinite_roots = true;
            detail.reports.push_back(std::move(tail));
        }
    }
    verdict.stable_intervals = stable_intervals(detail.reports);
    return verdict;
}

std::vector<StableInterval> stable_intervals(std::span<const DelayIntervalReport> reports) {
    std::vector<StableInterval> out;
    for (const auto& r : reports) {
        if (r.count != 0 || r.infinite_roots || !(r.h_hi > r.h_lo)) {
            continue;
        }
        if (!out.empty() && out.back().h_hi == r.h_lo && (out.back().hi_closed || r.lo_closed)) {
            out.back().h_hi = r.h_hi;
            out.back().hi_closed = r.hi_closed;
        } else {
            out.push_back({r.h_lo, r.h_hi, r.lo_closed, r.hi_closed});
        }
    }
    return out;
}

} // namespace delaymargin
