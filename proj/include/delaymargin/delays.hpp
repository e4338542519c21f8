#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "delaymargin/boundary.hpp"
#include "delaymargin/plant.hpp"

namespace delaymargin {

/// A characteristic root sitting on the boundary at a critical delay.
struct CrossingEvent {
    double delay = 0.0;
    double omega = 0.0;
    Complex root;
    int direction = 0;  // +1 entering Re(s) >= sigma0, -1 leaving, 0 tangential touch
    int interval_index = -1;
    double line_level = 0.0;  // phase level (2l+1)pi - phi0 that was matched
};

/// Delay interval with a constant number of characteristic roots in
/// Re(s) >= sigma0.
struct DelayIntervalReport {
    double h_lo = 0.0;
    double h_hi = 0.0;
    int count = 0;
    bool lo_closed = false;
    bool hi_closed = false;
    bool infinite_roots = false;  // count is unbounded on this interval
    std::vector<CrossingEvent> events_at_hi;
};

enum class VerdictFlag { normal, biproper_unit_or_more, biproper_capped };

std::string_view verdict_name(VerdictFlag flag);

struct StableInterval {
    double h_lo = 0.0;
    double h_hi = 0.0;
    bool lo_closed = false;
    bool hi_closed = false;
};

/// Stable critical frequency on the imaginary axis (sigma0 = 0 path).
struct CriticalFrequency {
    double omega = 0.0;
    int direction = 0;
    double base_delay = 0.0;
    bool tangential = false;
};

struct DelayAnalysis {
    double sigma0 = 0.0;  // boundary actually analysed, after any perturbation
    int initial_count = 0;
    std::vector<CrossingEvent> events;
    std::vector<DelayIntervalReport> reports;
    VerdictFlag flag = VerdictFlag::normal;
    double h_cap = kInf;
    std::vector<std::string> warnings;
    std::vector<BoundaryInterval> intervals;                // sigma0 < 0 path
    std::vector<CriticalFrequency> critical_frequencies;   // sigma0 = 0 path
};

struct AllDelaysVerdict {
    std::vector<StableInterval> stable_intervals;
    int leaving_budget = 0;
    double termination_delay = 0.0;
    VerdictFlag verdict_flag = VerdictFlag::normal;
    DelayAnalysis detail;
};

struct AnalysisOptions {
    double omega_cap = 0.0;  // 0: automatic
    numeric::BisectTol bisect_tol{};
    int max_perturbations = 8;
    std::size_t max_events = 200000;
};

/// Walks the intersections of phi with the phase levels (2l+1)pi - phi0 on
/// one interval, in increasing delay.
class IntervalCursor {
public:
    IntervalCursor(const BoundaryFunctions& bf, const BoundaryInterval& interval, int index, double phi0);

    bool exhausted() const noexcept { return exhausted_; }
    double line() const noexcept { return line_; }
    double omega() const noexcept { return omega_; }
    double delay() const noexcept { return delay_; }
    int index() const noexcept { return index_; }
    const BoundaryInterval& interval() const noexcept { return interval_; }

    /// Moves to the next level; marks the cursor exhausted once the level
    /// leaves [phi_min, phi_max].
    void advance();

private:
    bool in_range(double line) const;
    void solve();

    const BoundaryFunctions* bf_;
    BoundaryInterval interval_;
    int index_;
    double phi0_;
    double step_ = 0.0;
    double line_ = 0.0;
    double omega_ = 0.0;
    double delay_ = 0.0;
    bool exhausted_ = false;
};

/// 0 if G(sigma0) > 0, pi otherwise.
double phase_offset(const PoleZeroGain& plant, double sigma0);

/// Phase level with the smallest delay on the interval. Throws NoIntersection.
double initial_line(const BoundaryInterval& interval, double phi0);

/// Frequency on the interval where phi equals `line`, and its delay H.
std::pair<double, double> solve_crossing(const BoundaryFunctions& bf, const BoundaryInterval& interval, double line);

struct RootCensus {
    int inside = 0;       // Re(root) > sigma0
    int on_boundary = 0;  // |Re(root) - sigma0| <= tolerance
};

/// Closed-loop roots at h = 0 relative to Re(s) = sigma0.
RootCensus closed_loop_census(const PoleZeroGain& plant, double sigma0, double boundary_tol = 1e-9);

/// Roots of the h = 0 closed loop with Re >= sigma0. Throws RootOnBoundary.
int initial_root_count(const PoleZeroGain& plant, double sigma0);

struct StopRule {
    double horizon = kInf;
    std::optional<int> leaving_root_budget;
    std::size_t max_events = 200000;
};

struct Enumeration {
    std::vector<CrossingEvent> events;
    std::vector<DelayIntervalReport> reports;
    int final_count = 0;
    bool budget_stop = false;
    double termination_delay = 0.0;
};

Enumeration enumerate(const BoundaryFunctions& bf, std::span<const BoundaryInterval> intervals, double phi0,
                      int initial_count, const StopRule& stop);

/// Number of crossings (one per phase-level intersection) that leave
/// Re(s) >= sigma0 over all delays. Throws UnboundedLeavingInterval.
int leaving_count_total(std::span<const BoundaryInterval> intervals, double phi0);

/// Same crossings counted as roots: 2 per complex pair, 1 per real root.
int leaving_root_budget(std::span<const BoundaryInterval> intervals, double phi0);

DelayAnalysis analyze_up_to(const PoleZeroGain& plant, const BoundaryConfig& cfg, double h_max,
                            const AnalysisOptions& opts = {});

AllDelaysVerdict analyze_all_delays(const PoleZeroGain& plant, const BoundaryConfig& cfg,
                                    const AnalysisOptions& opts = {});

/// sigma0 = 0 path: critical frequencies |G(jw)| = 1 with periodic delays.
DelayAnalysis imaginary_axis_analysis(const PoleZeroGain& plant, double h_max, const AnalysisOptions& opts = {});

std::vector<StableInterval> stable_intervals(std::span<const DelayIntervalReport> reports);

} // namespace delaymargin
