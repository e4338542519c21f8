#include "delaymargin/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "delaymargin/boundary.hpp"
#include "delaymargin/delays.hpp"
#include "delaymargin/errors.hpp"
#include "delaymargin/oracle.hpp"

namespace delaymargin::cli {

namespace {

using nlohmann::json;

enum class LogLevel { quiet, info, debug };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StrictViolation {};

struct Options {
    std::string input;
    double sigma = 0.0;
    double hmax = 0.0;
    std::string format = "table";
    std::string curves;
    bool strict = false;
    double omega_cap = 0.0;
    double bisect_tol = 0.0;
};

LogLevel log_level_from_env() {
    const char* v = std::getenv("DELAYMARGIN_LOG");
    if (v == nullptr) {
        return LogLevel::info;
    }
    const std::string s{v};
    if (s == "quiet") {
        return LogLevel::quiet;
    }
    if (s == "debug") {
        return LogLevel::debug;
    }
    return LogLevel::info;
}

std::string fixed3(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (std::abs(v) < 5e-4) {
        v = 0.0;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string full(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string signed_int(int v) {
    return v > 0 ? "+" + std::to_string(v) : std::to_string(v);
}

char sign_char(int s) {
    return s > 0 ? '+' : (s < 0 ? '-' : '0');
}

json number(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    return nullptr;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) {
        s.append(width - s.size(), ' ');
    }
    return s;
}

std::string interval_text(double lo, double hi, bool lo_closed, bool hi_closed) {
    return std::string(lo_closed ? "[" : "(") + fixed3(lo) + ", " + fixed3(hi) +
           (hi_closed && std::isfinite(hi) ? "]" : ")");
}

std::string stable_line(std::span<const StableInterval> intervals) {
    if (intervals.empty()) {
        return "stable: (none)";
    }
    std::string s = "stable: ";
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (i > 0) {
            s += " U ";
        }
        const auto& iv = intervals[i];
        s += interval_text(iv.h_lo, iv.h_hi, iv.lo_closed, iv.hi_closed);
    }
    return s;
}

double as_double(const json& j, const char* what) {
    if (!j.is_number()) {
        throw Error(ErrorKind::InvalidInput, std::string(what) + " must be a number");
    }
    return j.get<double>();
}

std::vector<Complex> complex_list(const json& j, const char* what) {
    if (!j.is_array()) {
        throw Error(ErrorKind::InvalidInput, std::string(what) + " must be a list of [re, im] pairs");
    }
    std::vector<Complex> out;
    for (const auto& item : j) {
        if (item.is_number()) {
            out.emplace_back(item.get<double>(), 0.0);
        } else if (item.is_array() && item.size() == 2) {
            out.emplace_back(as_double(item[0], what), as_double(item[1], what));
        } else {
            throw Error(ErrorKind::InvalidInput, std::string(what) + " entries must be [re, im] pairs");
        }
    }
    return out;
}

std::vector<double> real_list(const json& j, const char* what) {
    if (!j.is_array()) {
        throw Error(ErrorKind::InvalidInput, std::string(what) + " must be a list of numbers");
    }
    std::vector<double> out;
    for (const auto& item : j) {
        out.push_back(as_double(item, what));
    }
    return out;
}

json plant_json(const NamedPlant& np) {
    auto pairs = [](const std::vector<Complex>& v) {
        json a = json::array();
        for (const auto& c : v) {
            a.push_back({c.real(), c.imag()});
        }
        return a;
    };
    json j;
    if (!np.name.empty()) {
        j["name"] = np.name;
    }
    j["gain"] = np.plant.gain;
    j["zeros"] = pairs(np.plant.zeros);
    j["poles"] = pairs(np.plant.poles);
    return j;
}

NamedPlant load_plant(const std::string& path) {
    std::string text;
    if (path == "-") {
        text.assign(std::istreambuf_iterator<char>(std::cin), {});
    } else {
        std::ifstream in(path);
        if (!in) {
            throw UsageError("cannot read " + path);
        }
        text.assign(std::istreambuf_iterator<char>(in), {});
    }
    return parse_plant(text);
}

struct Context {
    Options opts;
    LogLevel log = LogLevel::info;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
    NamedPlant plant;
    AnalysisOptions analysis;

    void debug(const std::string& msg) const {
        if (log == LogLevel::debug) {
            *err << "debug: " << msg << '\n';
        }
    }

    // Prints warnings; under --strict any warning aborts the command.
    void warnings(const std::vector<std::string>& list) const {
        if (log != LogLevel::quiet || opts.strict) {
            for (const auto& w : list) {
                *err << "warning: " << w << '\n';
            }
        }
        if (opts.strict && !list.empty()) {
            throw StrictViolation{};
        }
    }
};

void emit_curves(const Context& ctx, double sigma0) {
    if (ctx.opts.curves.empty()) {
        return;
    }
    std::ofstream f(ctx.opts.curves);
    if (!f) {
        throw UsageError("cannot write " + ctx.opts.curves);
    }
    f.precision(17);
    const int samples = 2000;
    if (sigma0 < 0.0) {
        BoundaryFunctions bf(ctx.plant.plant, sigma0, 1e-8, ctx.analysis.bisect_tol);
        const double cap = default_omega_cap(bf, ctx.analysis.omega_cap);
        f << "omega,H,phi\n";
        for (int i = 0; i <= samples; ++i) {
            const double w = cap * i / samples;
            f << w << ',' << bf.H(w) << ',' << bf.phi(w) << '\n';
        }
    } else {
        LineTerms terms(ctx.plant.plant, 0.0);
        const double cap = 10.0 * (1.0 + terms.feature_scale());
        f << "omega,log_magnitude,phase\n";
        for (int i = 0; i <= samples; ++i) {
            const double w = cap * i / samples;
            f << w << ',' << terms.log_magnitude(w) << ',' << terms.angle_sum(w) << '\n';
        }
    }
    ctx.debug("curves written to " + ctx.opts.curves);
}

json interval_json(const BoundaryInterval& iv) {
    return {{"omega_lo", iv.omega_lo},
            {"omega_hi", number(iv.omega_hi)},
            {"h_sign", iv.h_sign},
            {"phi_sign", iv.phi_sign},
            {"crossing_direction", iv.crossing_direction},
            {"h_lo", number(iv.h_lo)},
            {"h_hi", number(iv.h_hi)},
            {"phi_lo", number(iv.phi_lo)},
            {"phi_hi", number(iv.phi_hi)},
            {"tangential", iv.tangential}};
}

int cmd_intervals(const Context& ctx) {
    double sigma0 = ctx.opts.sigma;
    if (!(sigma0 < 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "intervals needs --sigma < 0");
    }
    std::vector<std::string> warnings;
    for (int i = 0; i < ctx.analysis.max_perturbations &&
                    boundary_clearance(ctx.plant.plant, {sigma0, 1e-8}) < 1e-8;
         ++i) {
        const double next = sigma0 - 1e-6 * (1.0 + std::abs(sigma0));
        std::ostringstream msg;
        msg.precision(10);
        msg << "pole or zero on the boundary; sigma0 moved from " << sigma0 << " to " << next;
        warnings.push_back(msg.str());
        sigma0 = next;
    }
    BoundaryFunctions bf(ctx.plant.plant, sigma0, 1e-8, ctx.analysis.bisect_tol);
    const auto ba = analyze_boundary(bf, ctx.analysis.omega_cap);
    for (const auto& hit : multiplicity_guard(bf, ba.omega_cap)) {
        std::ostringstream msg;
        msg.precision(10);
        msg << "multiple root on the boundary at w = " << hit.omega0 << ", h = " << hit.h0;
        warnings.push_back(msg.str());
    }
    ctx.warnings(warnings);
    ctx.debug("omega cap " + full(ba.omega_cap));
    emit_curves(ctx, sigma0);

    auto& out = *ctx.out;
    if (ctx.opts.format == "json") {
        json j;
        j["plant"] = plant_json(ctx.plant);
        j["sigma0"] = sigma0;
        j["omega_cap"] = ba.omega_cap;
        j["feasible"] = json::array();
        for (const auto& f : ba.feasible) {
            j["feasible"].push_back({{"omega_lo", f.omega_lo}, {"omega_hi", number(f.omega_hi)}, {"isolated", f.isolated}});
        }
        j["direction"] = json::array();
        for (const auto& d : ba.direction) {
            j["direction"].push_back({{"omega_lo", d.omega_lo}, {"omega_hi", number(d.omega_hi)}, {"phi_sign", d.phi_sign}});
        }
        j["intervals"] = json::array();
        for (const auto& iv : ba.intervals) {
            j["intervals"].push_back(interval_json(iv));
        }
        j["warnings"] = warnings;
        out << j.dump(2) << '\n';
    } else if (ctx.opts.format == "csv") {
        out << "omega_lo, omega_hi, h_sign, phi_sign, crossing_direction, tangential\n";
        for (const auto& iv : ba.intervals) {
            out << full(iv.omega_lo) << ", " << full(iv.omega_hi) << ", " << signed_int(iv.h_sign) << ", "
                << signed_int(iv.phi_sign) << ", " << signed_int(iv.crossing_direction) << ", "
                << (iv.tangential ? 1 : 0) << '\n';
        }
    } else {
        out << "sigma0 = " << fixed3(sigma0) << '\n';
        out << "feasible (H >= 0):";
        for (const auto& f : ba.feasible) {
            out << "  " << interval_text(f.omega_lo, f.omega_hi, true, true);
        }
        out << "\ndirection breakpoints:";
        for (std::size_t i = 1; i < ba.direction.size(); ++i) {
            out << "  " << fixed3(ba.direction[i].omega_lo);
        }
        if (ba.direction.size() <= 1) {
            out << "  (none)";
        }
        out << "\n\n" << pad("interval", 20) << pad("H", 4) << pad("Phi", 5) << "CD\n";
        for (const auto& iv : ba.intervals) {
            std::string cd = iv.tangential ? "0 (tangential)"
                                           : signed_int(iv.crossing_direction) +
                                                 (iv.crossing_direction > 0 ? " (entering)" : " (leaving)");
            out << pad(interval_text(iv.omega_lo, iv.omega_hi, true, true), 20) << pad(std::string(1, sign_char(iv.h_sign)), 4)
                << pad(std::string(1, sign_char(iv.phi_sign)), 5) << cd << '\n';
        }
    }
    return 0;
}

json event_json(const CrossingEvent& e) {
    return {{"delay", e.delay},
            {"omega", e.omega},
            {"root", {e.root.real(), e.root.imag()}},
            {"direction", e.direction},
            {"interval", e.interval_index}};
}

json stable_json(std::span<const StableInterval> list) {
    json a = json::array();
    for (const auto& s : list) {
        a.push_back({{"h_lo", s.h_lo}, {"h_hi", number(s.h_hi)}, {"lo_closed", s.lo_closed}, {"hi_closed", s.hi_closed}});
    }
    return a;
}

json analysis_json(const Context& ctx, const DelayAnalysis& a, double h_max) {
    json j;
    j["plant"] = plant_json(ctx.plant);
    j["sigma0"] = a.sigma0;
    if (h_max > 0.0) {
        j["h_max"] = h_max;
    }
    j["verdict"] = std::string(verdict_name(a.flag));
    j["h_cap"] = number(a.h_cap);
    j["initial_count"] = a.initial_count;
    j["reports"] = json::array();
    for (const auto& r : a.reports) {
        json events = json::array();
        for (const auto& e : r.events_at_hi) {
            events.push_back(event_json(e));
        }
        j["reports"].push_back({{"h_lo", r.h_lo},
                                {"h_hi", number(r.h_hi)},
                                {"count", r.infinite_roots ? json(nullptr) : json(r.count)},
                                {"lo_closed", r.lo_closed},
                                {"hi_closed", r.hi_closed},
                                {"infinite_roots", r.infinite_roots},
                                {"events_at_hi", events}});
    }
    j["events"] = json::array();
    for (const auto& e : a.events) {
        j["events"].push_back(event_json(e));
    }
    if (!a.critical_frequencies.empty()) {
        j["critical_frequencies"] = json::array();
        for (const auto& f : a.critical_frequencies) {
            j["critical_frequencies"].push_back({{"omega", f.omega},
                                                 {"direction", f.direction},
                                                 {"base_delay", f.base_delay},
                                                 {"tangential", f.tangential}});
        }
    }
    j["stable_intervals"] = stable_json(stable_intervals(a.reports));
    j["warnings"] = a.warnings;
    return j;
}

void print_reports_csv(std::ostream& out, const DelayAnalysis& a) {
    out << "h_lo, h_hi, count, crossing_omega, crossing_direction\n";
    const std::vector<CrossingEvent>* entry = nullptr;
    for (const auto& r : a.reports) {
        out << full(r.h_lo) << ", " << full(r.h_hi) << ", " << (r.infinite_roots ? "inf" : std::to_string(r.count))
            << ", ";
        if (entry != nullptr && !entry->empty()) {
            std::string omegas;
            std::string dirs;
            for (std::size_t i = 0; i < entry->size(); ++i) {
                omegas += (i ? ";" : "") + full((*entry)[i].omega);
                dirs += (i ? ";" : "") + signed_int((*entry)[i].direction);
            }
            out << omegas << ", " << dirs;
        } else {
            out << ", ";
        }
        out << '\n';
        entry = &r.events_at_hi;
    }
}

void print_reports_table(std::ostream& out, const DelayAnalysis& a) {
    out << pad("delay interval", 22) << pad("count", 8) << pad("crossing omega", 16) << "CD\n";
    const std::vector<CrossingEvent>* entry = nullptr;
    for (const auto& r : a.reports) {
        std::string row = pad(interval_text(r.h_lo, r.h_hi, r.lo_closed, r.hi_closed), 22) +
                          pad(r.infinite_roots ? "inf" : std::to_string(r.count), 8);
        if (entry != nullptr && !entry->empty()) {
            std::string omegas;
            std::string dirs;
            for (std::size_t i = 0; i < entry->size(); ++i) {
                omegas += (i ? " " : "") + fixed3((*entry)[i].omega);
                dirs += (i ? " " : "") + signed_int((*entry)[i].direction);
            }
            row += pad(omegas, 16) + dirs;
        }
        row.erase(row.find_last_not_of(' ') + 1);
        out << row << '\n';
        entry = &r.events_at_hi;
    }
}

void print_verdict_notes(std::ostream& out, const DelayAnalysis& a) {
    if (a.flag == VerdictFlag::biproper_unit_or_more) {
        out << "verdict: |G(inf)| >= 1, unstable with infinitely many roots inside Re(s) >= sigma0 for every h > 0\n";
    } else if (a.flag == VerdictFlag::biproper_capped) {
        out << "verdict: for h >= " << fixed3(a.h_cap)
            << ", unstable with infinitely many roots inside Re(s) >= sigma0\n";
    }
}

int cmd_analyze(const Context& ctx, bool imaginary) {
    const double sigma0 = imaginary ? 0.0 : ctx.opts.sigma;
    const auto t0 = std::chrono::steady_clock::now();
    const auto a = analyze_up_to(ctx.plant.plant, {sigma0, 1e-8}, ctx.opts.hmax, ctx.analysis);
    ctx.debug("analysis took " +
              std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s, " +
              std::to_string(a.events.size()) + " events");
    ctx.warnings(a.warnings);
    if (a.flag != VerdictFlag::biproper_unit_or_more) {
        emit_curves(ctx, a.sigma0);
    }

    auto& out = *ctx.out;
    if (ctx.opts.format == "json") {
        out << analysis_json(ctx, a, ctx.opts.hmax).dump(2) << '\n';
        return 0;
    }
    if (ctx.opts.format == "csv") {
        print_reports_csv(out, a);
        return 0;
    }
    out << "sigma0 = " << fixed3(a.sigma0) << "   h_max = " << fixed3(ctx.opts.hmax) << '\n';
    if (!a.critical_frequencies.empty()) {
        out << "critical frequencies:";
        for (const auto& f : a.critical_frequencies) {
            out << "  " << fixed3(f.omega) << " (" << (f.tangential ? "tangential" : signed_int(f.direction))
                << ", first delay " << fixed3(f.base_delay) << ")";
        }
        out << '\n';
    }
    out << '\n';
    print_reports_table(out, a);
    out << '\n';
    print_verdict_notes(out, a);
    const auto stable = stable_intervals(a.reports);
    out << stable_line(stable) << '\n';
    return 0;
}

int cmd_stability(const Context& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto v = analyze_all_delays(ctx.plant.plant, {ctx.opts.sigma, 1e-8}, ctx.analysis);
    ctx.debug("analysis took " +
              std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");
    ctx.warnings(v.detail.warnings);
    if (v.verdict_flag != VerdictFlag::biproper_unit_or_more) {
        emit_curves(ctx, v.detail.sigma0);
    }

    auto& out = *ctx.out;
    if (ctx.opts.format == "json") {
        json j = analysis_json(ctx, v.detail, 0.0);
        j["stable_intervals"] = stable_json(v.stable_intervals);
        j["leaving_budget"] = v.leaving_budget;
        j["termination_delay"] = v.termination_delay;
        out << j.dump(2) << '\n';
        return 0;
    }
    if (ctx.opts.format == "csv") {
        out << "h_lo, h_hi, lo_closed, hi_closed\n";
        for (const auto& s : v.stable_intervals) {
            out << full(s.h_lo) << ", " << full(s.h_hi) << ", " << (s.lo_closed ? 1 : 0) << ", " << (s.hi_closed ? 1 : 0)
                << '\n';
        }
        return 0;
    }
    out << "sigma0 = " << fixed3(v.detail.sigma0) << '\n';
    if (v.verdict_flag != VerdictFlag::biproper_unit_or_more) {
        out << "roots in Re(s) >= sigma0 at h = 0: " << v.detail.initial_count << '\n';
        out << "leaving crossings available: " << v.leaving_budget << '\n';
        out << "last critical delay examined: " << fixed3(v.termination_delay) << '\n';
    }
    print_verdict_notes(out, v.detail);
    out << stable_line(v.stable_intervals) << '\n';
    return 0;
}

int cmd_verify(const Context& ctx) {
    const auto& plant = ctx.plant.plant;
    const auto a = analyze_up_to(plant, {ctx.opts.sigma, 1e-8}, ctx.opts.hmax, ctx.analysis);
    ctx.warnings(a.warnings);

    json checks = json::array();
    int failures = 0;
    std::ostringstream table;
    for (const auto& r : a.reports) {
        if (r.infinite_roots || !(r.h_hi > r.h_lo) || !std::isfinite(r.h_hi)) {
            continue;
        }
        const double mid = 0.5 * (r.h_lo + r.h_hi);
        const int oracle = count_roots_right_of(plant, mid, a.sigma0);
        const bool ok = oracle == r.count;
        failures += ok ? 0 : 1;
        checks.push_back({{"kind", "count"}, {"delay", mid}, {"expected", r.count}, {"oracle", oracle}, {"ok", ok}});
        table << pad("count at h = " + fixed3(mid), 28) << pad(std::to_string(r.count), 6) << pad(std::to_string(oracle), 6)
              << (ok ? "ok" : "MISMATCH") << '\n';
    }
    for (const auto& e : a.events) {
        if (e.direction == 0 || e.delay < 1e-3) {
            continue;
        }
        const int numeric = numeric_crossing_direction(plant, e.delay, e.root);
        const bool ok = numeric == e.direction;
        failures += ok ? 0 : 1;
        checks.push_back({{"kind", "direction"}, {"delay", e.delay}, {"omega", e.omega}, {"expected", e.direction},
                          {"oracle", numeric}, {"ok", ok}});
        table << pad("direction at h = " + fixed3(e.delay), 28) << pad(signed_int(e.direction), 6)
              << pad(signed_int(numeric), 6) << (ok ? "ok" : "MISMATCH") << '\n';
    }

    auto& out = *ctx.out;
    if (ctx.opts.format == "json") {
        json j = analysis_json(ctx, a, ctx.opts.hmax);
        j["checks"] = checks;
        j["mismatches"] = failures;
        out << j.dump(2) << '\n';
    } else if (ctx.opts.format == "csv") {
        out << "kind, delay, expected, oracle, ok\n";
        for (const auto& c : checks) {
            out << c["kind"].get<std::string>() << ", " << full(c["delay"].get<double>()) << ", "
                << c["expected"].get<int>() << ", " << c["oracle"].get<int>() << ", " << (c["ok"].get<bool>() ? 1 : 0)
                << '\n';
        }
    } else {
        out << "sigma0 = " << fixed3(a.sigma0) << "   h_max = " << fixed3(ctx.opts.hmax) << "\n\n";
        out << pad("check", 28) << pad("ours", 6) << pad("oracle", 6) << '\n' << table.str();
        out << '\n' << checks.size() - failures << " of " << checks.size() << " checks agree\n";
    }
    if (failures > 0) {
        *ctx.err << "VerificationMismatch: " << failures << " of " << checks.size()
                 << " checks disagree with the argument-principle oracle\n";
        return 2;
    }
    return 0;
}

} // namespace

NamedPlant parse_plant(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::InvalidInput, std::string("malformed JSON: ") + e.what());
    }
    if (j.is_object() && j.contains("plant")) {
        j = j["plant"];
    }
    if (!j.is_object()) {
        throw Error(ErrorKind::InvalidInput, "plant specification must be a JSON object");
    }
    NamedPlant np;
    if (j.contains("name")) {
        if (!j["name"].is_string()) {
            throw Error(ErrorKind::InvalidInput, "name must be a string");
        }
        np.name = j["name"].get<std::string>();
    }
    const bool pzk = j.contains("zeros") || j.contains("poles") || j.contains("gain");
    const bool rational = j.contains("num") || j.contains("den");
    if (pzk == rational) {
        throw Error(ErrorKind::InvalidInput, "give either gain/zeros/poles or num/den");
    }
    if (pzk) {
        if (!j.contains("gain") || !j.contains("zeros") || !j.contains("poles")) {
            throw Error(ErrorKind::InvalidInput, "gain, zeros and poles are all required");
        }
        np.plant.gain = as_double(j["gain"], "gain");
        np.plant.zeros = complex_list(j["zeros"], "zeros");
        np.plant.poles = complex_list(j["poles"], "poles");
        validate(np.plant);
    } else {
        if (!j.contains("num") || !j.contains("den")) {
            throw Error(ErrorKind::InvalidInput, "num and den are both required");
        }
        const auto num = real_list(j["num"], "num");
        const auto den = real_list(j["den"], "den");
        np.plant = from_rational(num, den);
    }
    return np;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Delay intervals and stability of dead-time feedback loops on a shifted boundary", "delaymargin"};
    app.require_subcommand(1);
    Options o;

    const auto common = [&o](CLI::App* sub, bool sigma, bool hmax) {
        sub->add_option("input", o.input, "plant specification (JSON file, - for stdin)")->required();
        if (sigma) {
            sub->add_option("--sigma", o.sigma, "boundary abscissa sigma0 (<= 0)")->required();
        }
        if (hmax) {
            sub->add_option("--hmax", o.hmax, "largest delay of interest")->required();
        }
        sub->add_option("--format", o.format, "table, json or csv")
            ->check(CLI::IsMember({"table", "json", "csv"}));
        sub->add_option("--emit-curves", o.curves, "write omega, H, phi samples as CSV");
        sub->add_flag("--strict", o.strict, "treat perturbation and guard warnings as errors (exit 3)");
        sub->add_option("--omega-cap", o.omega_cap, "initial frequency horizon")->check(CLI::PositiveNumber);
        sub->add_option("--bisect-tol", o.bisect_tol, "bisection tolerance (absolute and relative)")
            ->check(CLI::PositiveNumber);
    };
    auto* intervals = app.add_subcommand("intervals", "boundary intervals with invariant crossing direction");
    auto* analyze = app.add_subcommand("analyze", "critical delays and root counts up to --hmax");
    auto* stability = app.add_subcommand("stability", "stable delay intervals over all delays");
    auto* imaginary = app.add_subcommand("imaginary", "imaginary-axis boundary (sigma0 = 0) up to --hmax");
    auto* verify = app.add_subcommand("verify", "analyze, then cross-check against the argument-principle oracle");
    common(intervals, true, false);
    common(analyze, true, true);
    common(stability, true, false);
    common(imaginary, false, true);
    common(verify, true, true);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    Context ctx;
    ctx.opts = o;
    ctx.log = log_level_from_env();
    ctx.out = &out;
    ctx.err = &err;
    ctx.analysis.omega_cap = o.omega_cap;
    if (o.bisect_tol > 0.0) {
        ctx.analysis.bisect_tol = {o.bisect_tol, o.bisect_tol};
    }

    try {
        ctx.plant = load_plant(o.input);
        ctx.debug("plant " + (ctx.plant.name.empty() ? std::string("(unnamed)") : ctx.plant.name) + " with " +
                  std::to_string(ctx.plant.plant.zeros.size()) + " zeros, " +
                  std::to_string(ctx.plant.plant.poles.size()) + " poles");
        if (intervals->parsed()) {
            return cmd_intervals(ctx);
        }
        if (analyze->parsed()) {
            return cmd_analyze(ctx, false);
        }
        if (imaginary->parsed()) {
            return cmd_analyze(ctx, true);
        }
        if (stability->parsed()) {
            return cmd_stability(ctx);
        }
        if (verify->parsed()) {
            return cmd_verify(ctx);
        }
    } catch (const UsageError& e) {
        err << "usage: " << e.what() << '\n';
        return 1;
    } catch (const StrictViolation&) {
        err << "strict: aborting on the warning above\n";
        return 3;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "InternalError: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

} // namespace delaymargin::cli
