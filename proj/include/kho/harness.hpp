#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "kho/config.hpp"
#include "kho/dissipative.hpp"
#include "kho/grid_io.hpp"
#include "kho/kick.hpp"
#include "kho/model.hpp"
#include "kho/observables.hpp"

namespace kho {

struct InitialSpec {
    enum Kind { coherent, stationary, file } kind = coherent;
    double x0 = 0.0, p0 = 0.0;  // coherent center
    std::string path;           // resume source for kind == file

    std::string describe() const {
        switch (kind) {
            case coherent:
                return "coherent x0=" + detail::fmt_g17(x0) + " p0=" + detail::fmt_g17(p0);
            case stationary: return "stationary";
            case file: return "file:" + path;
        }
        return "?";
    }
};

// A complete run description. One cycle is dissipative evolution over
// sigma = 2 pi / q followed by the kick; kick_first swaps the two halves.
struct Scenario {
    std::string name = "custom";
    ModelParams params{0.1, 5.0, -0.8, std::sqrt(pi), 4.0};
    int nk = 513;
    double k_max = 12.0;  // request; snapped so sqrt(2) eta is a node shift
    long n_kicks = 60;
    InitialSpec initial;
    std::vector<SnapshotSel> snapshots;
    bool wigner_snapshots = false;
    double trace_tol = 1e-3;
    double trace_warn = 1e-4;
    std::uint64_t leak_budget = 0;
    GuardPolicy moment_guard = GuardPolicy::abort;
    InterpScheme interp = InterpScheme::spectral;
    bool kick_first = false;
    double tol_tail = 1e-14;
    int window = 0;  // cycle-stats window; 0 means round(q)
};

// Energies straddling kick n plus the post-kick moments, one row per cycle.
struct RunRecord {
    long n = 0;
    double tau = 0.0;
    double E_minus = 0.0, E_plus = 0.0;
    MomentSet post;
};

struct RunResult {
    GridSpec grid;
    std::vector<RunRecord> series;
    ChordState state;
    CycleStats stats;
    bool has_stats = false;
    double max_boundary = 0.0;
    double final_trace_defect = 0.0;
    double factorization_residual = 0.0;
    int kick_order = 0;
    long commensurate_shift = 0;
    std::vector<std::string> warnings;
};

enum class SweepMode { cycle, kicks_to_energy };

struct SweepSpec {
    Scenario base;
    SweepMode mode = SweepMode::cycle;
    std::vector<double> eta2_values;
    double target_energy = 50.0;
    long n_cap = 400;
};

struct SweepRow {
    double eta2 = 0.0;
    bool ok = false;
    std::string error;
    double E_qst = 0.0, heat_rate = 0.0, drift = 0.0;
    bool converged = false;
    long n_kicks = 0;  // kicks-to-energy mode
    bool reached = false;
};

struct KicksToEnergy {
    bool reached = false;
    long n = 0;
    double energy = 0.0;
};

// ---------------------------------------------------------------------------
// Presets: the named parameter sets exercised by the bundled studies.

struct Preset {
    Scenario scenario;
    bool is_sweep = false;
    SweepMode mode = SweepMode::cycle;
    std::vector<double> eta2_values;
    double target_energy = 50.0;
    long n_cap = 400;
};

inline std::vector<std::string> preset_names() {
    return {"fig1-resonant", "fig1-nonresonant", "fig1-chaotic", "fig2",  "fig3",
            "fig4-resonant", "fig4-nonresonant", "fig4-chaotic", "fig5",  "fig6"};
}

inline Preset preset(const std::string& name) {
    Preset pr;
    Scenario& sc = pr.scenario;
    sc.name = name;
    const auto set = [&sc](double beta, double D, double kappa, double eta2, double q) {
        sc.params = ModelParams{beta, D, kappa, std::sqrt(eta2), q};
    };
    if (name == "fig1-resonant" || name == "fig1-nonresonant" || name == "fig1-chaotic") {
        sc.n_kicks = 36;
        sc.snapshots = parse_snapshots("35+,36-,36+");
        sc.wigner_snapshots = true;
        if (name == "fig1-resonant") {
            set(0.1, 5.0, -0.8, pi, 4.0);
        } else if (name == "fig1-nonresonant") {
            set(0.1, 5.0, -0.8, 0.7 * pi, 4.0);
        } else {
            set(0.1, 5.0, -4.5, 1.0, 4.0);
            sc.k_max = 13.92;
        }
    } else if (name == "fig2") {
        set(0.1, 5.0, -0.8, pi, 4.0);
        sc.n_kicks = 60;
    } else if (name == "fig3") {
        set(0.1, 5.0, -0.8, pi, 4.0);
        sc.n_kicks = 60;
        pr.is_sweep = true;
        pr.mode = SweepMode::cycle;
        for (int i = 2; i <= 10; ++i) pr.eta2_values.push_back(0.1 * i * pi);
    } else if (name == "fig4-resonant" || name == "fig4-nonresonant" ||
               name == "fig4-chaotic") {
        sc.n_kicks = 50;
        if (name == "fig4-resonant") {
            set(0.001, 5.0, -0.8, pi, 6.0);
        } else if (name == "fig4-nonresonant") {
            set(0.001, 5.0, -0.8, (1.0 + std::sqrt(5.0)) * pi / 2.0, 6.0);
        } else {
            set(0.001, 5.0, -4.5, 1.0, 6.0);
            sc.nk = 1025;
            sc.k_max = 30.17;
            sc.moment_guard = GuardPolicy::warn;
        }
    } else if (name == "fig5") {
        set(1e-5, 5.0, -0.8, pi, 4.0);
        sc.n_kicks = 40;
        // resonant growth narrows the chord column to a few nodes late in the
        // run; energies stay usable for the growth-exponent fit
        sc.moment_guard = GuardPolicy::warn;
    } else if (name == "fig6") {
        set(1e-6, 5.0, -0.8, 0.5 * pi, 4.0);
        pr.is_sweep = true;
        pr.mode = SweepMode::kicks_to_energy;
        pr.target_energy = 50.0;
        pr.n_cap = 400;
        for (int i = 0; i <= 10; ++i) pr.eta2_values.push_back((0.40 + 0.02 * i) * pi);
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return pr;
}

// ---------------------------------------------------------------------------
// Config binding.

namespace detail {

inline GuardPolicy parse_guard(const std::string& s) {
    if (s == "abort") return GuardPolicy::abort;
    if (s == "warn") return GuardPolicy::warn;
    if (s == "off") return GuardPolicy::off;
    throw ConfigError("moment_guard: expected abort/warn/off, got '" + s + "'");
}

inline InterpScheme parse_interp(const std::string& s) {
    if (s == "spectral") return InterpScheme::spectral;
    if (s == "bilinear") return InterpScheme::bilinear;
    throw ConfigError("interp: expected spectral/bilinear, got '" + s + "'");
}

inline Scenario scenario_from_config_impl(const Config& cfg) {
    Scenario sc;
    if (cfg.has("preset")) sc = preset(cfg.get_string("preset")).scenario;
    if (cfg.has("name")) sc.name = cfg.get_string("name");

    ModelParams& p = sc.params;
    if (cfg.has("beta")) p.beta = cfg.get_number("beta");
    if (cfg.has("D")) p.D = cfg.get_number("D");
    if (cfg.has("kappa")) p.kappa = cfg.get_number("kappa");
    if (cfg.has("eta2")) p.eta = std::sqrt(cfg.get_number("eta2"));
    if (cfg.has("q")) p.q = cfg.get_number("q");

    if (cfg.has("nk")) sc.nk = int(cfg.get_int("nk"));
    if (cfg.has("k_max")) sc.k_max = cfg.get_number("k_max");
    if (cfg.has("n_kicks")) sc.n_kicks = cfg.get_int("n_kicks");

    if (cfg.has("initial")) {
        const std::string s = cfg.get_string("initial");
        if (s == "coherent")
            sc.initial.kind = InitialSpec::coherent;
        else if (s == "stationary")
            sc.initial.kind = InitialSpec::stationary;
        else if (s.rfind("file:", 0) == 0) {
            sc.initial.kind = InitialSpec::file;
            sc.initial.path = s.substr(5);
        } else
            throw ConfigError("initial: expected coherent/stationary/file:PATH, got '" + s +
                              "'");
    }
    if (cfg.has("x0")) sc.initial.x0 = cfg.get_number("x0");
    if (cfg.has("p0")) sc.initial.p0 = cfg.get_number("p0");

    if (cfg.has("snapshots")) sc.snapshots = parse_snapshots(cfg.get_string("snapshots"));
    sc.wigner_snapshots = cfg.get_bool("wigner_snapshots", sc.wigner_snapshots);
    if (cfg.has("trace_tol")) sc.trace_tol = cfg.get_number("trace_tol");
    if (cfg.has("trace_warn")) sc.trace_warn = cfg.get_number("trace_warn");
    if (cfg.has("leak_budget")) sc.leak_budget = std::uint64_t(cfg.get_int("leak_budget"));
    if (cfg.has("moment_guard")) sc.moment_guard = parse_guard(cfg.get_string("moment_guard"));
    if (cfg.has("interp")) sc.interp = parse_interp(cfg.get_string("interp"));
    sc.kick_first = cfg.get_bool("kick_first", sc.kick_first);
    if (cfg.has("tol_tail")) sc.tol_tail = cfg.get_number("tol_tail");
    if (cfg.has("window")) sc.window = int(cfg.get_int("window"));

    const ValidationReport rep = validate(sc.params);
    if (!rep.ok) {
        std::string msg = "invalid parameters:";
        for (const auto& v : rep.violations) msg += " " + v + ";";
        throw ValidationError(msg);
    }
    return sc;
}

inline void reject_unknown(const Config& cfg) {
    const auto unknown = cfg.unknown_keys();
    if (!unknown.empty()) {
        std::string msg = cfg.origin() + ": unknown keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }
}

}  // namespace detail

inline Scenario scenario_from_config(const Config& cfg) {
    Scenario sc = detail::scenario_from_config_impl(cfg);
    detail::reject_unknown(cfg);
    if (cfg.has("preset") && preset(cfg.get_string("preset")).is_sweep)
        throw ConfigError("preset '" + cfg.get_string("preset") +
                          "' is a sweep; use the sweep command");
    return sc;
}

inline SweepSpec sweep_from_config(const Config& cfg) {
    SweepSpec sw;
    if (cfg.has("preset")) {
        const Preset pr = preset(cfg.get_string("preset"));
        if (!pr.is_sweep)
            throw ConfigError("preset '" + cfg.get_string("preset") + "' is not a sweep");
        sw.mode = pr.mode;
        sw.eta2_values = pr.eta2_values;
        sw.target_energy = pr.target_energy;
        sw.n_cap = pr.n_cap;
    }
    sw.base = detail::scenario_from_config_impl(cfg);
    if (cfg.has("sweep_eta2")) sw.eta2_values = cfg.get_list("sweep_eta2");
    if (cfg.has("sweep_mode")) {
        const std::string m = cfg.get_string("sweep_mode");
        if (m == "cycle")
            sw.mode = SweepMode::cycle;
        else if (m == "kicks-to-energy")
            sw.mode = SweepMode::kicks_to_energy;
        else
            throw ConfigError("sweep_mode: expected cycle/kicks-to-energy, got '" + m + "'");
    }
    if (cfg.has("target_energy")) sw.target_energy = cfg.get_number("target_energy");
    if (cfg.has("n_cap")) sw.n_cap = cfg.get_int("n_cap");
    detail::reject_unknown(cfg);
    if (sw.eta2_values.empty()) throw ConfigError("sweep: no eta2 values given");
    return sw;
}

// ---------------------------------------------------------------------------
// Run loop.

namespace detail {

inline ChordState initial_state(const Scenario& sc, const GridSpec& g) {
    switch (sc.initial.kind) {
        case InitialSpec::coherent: return coherent_state(g, sc.initial.x0, sc.initial.p0);
        case InitialSpec::stationary: return stationary_chord(g, sc.params.D);
        case InitialSpec::file: return read_grid(sc.initial.path);
    }
    throw Error("unreachable");
}

inline void warn_once(std::vector<std::string>& warnings, const std::string& msg) {
    for (const auto& w : warnings)
        if (w == msg) return;
    warnings.push_back(msg);
}

}  // namespace detail

// Evolves the chord function kick by kick, recording the energy on both
// sides of every kick, writing requested snapshots, and enforcing the trace,
// leak, and resolution guards. out_dir == "" runs silently in memory.
inline RunResult run_scenario(const Scenario& sc, const std::string& out_dir = "",
                              std::ostream* log = nullptr) {
    namespace fs = std::filesystem;
    const double sigma = sc.params.sigma_k();

    GridSpec g = commensurate_square(sc.nk, sc.k_max, sc.params.eta);
    ChordState state = [&] {
        if (sc.initial.kind != InitialSpec::file) return detail::initial_state(sc, g);
        ChordState st = read_grid(sc.initial.path);
        g = st.grid;  // a resumed run continues on the stored grid
        return st;
    }();

    DissipativePlan diss(g, sc.params, sigma, sc.interp);
    const KickPlan kick = make_kick_plan(g, sc.params, sc.tol_tail);

    RunResult out;
    out.grid = g;
    out.factorization_residual = diss.factorization_residual();
    out.kick_order = kick.L;
    out.commensurate_shift = kick.commensurate ? kick.node_shift : 0;

    if (!out_dir.empty()) fs::create_directories(out_dir);
    std::ofstream csv;
    if (!out_dir.empty()) {
        csv.open(out_dir + "/series.csv", std::ios::binary);  // LF-only, bit-stable
        if (!csv) throw Error("cannot open " + out_dir + "/series.csv");
        csv << "n,tau,E_minus,E_plus,mean_x,mean_p,xx,pp,xp_sym\n";
    }

    const GuardPolicy measure_guard =
        sc.moment_guard == GuardPolicy::off ? GuardPolicy::off : GuardPolicy::warn;
    const auto guarded_energy = [&](long n) {
        const MomentSet m = moments(state, measure_guard);
        if (m.under_resolved) {
            if (sc.moment_guard == GuardPolicy::abort)
                throw UnderResolvedError("moment stencil under-resolved (1/e width " +
                                         std::to_string(m.min_width) + " nodes) at kick " +
                                         std::to_string(n));
            detail::warn_once(out.warnings, "moment stencil under-resolved (first at kick " +
                                                std::to_string(n) + ")");
        }
        return m;
    };
    const auto check_state = [&](long n) {
        const double defect = std::abs(state.trace() - 1.0);
        if (defect >= sc.trace_tol)
            throw TraceDriftError("trace defect " + detail::fmt_g17(defect) + " at kick " +
                                  std::to_string(n) + " (tol " +
                                  detail::fmt_g17(sc.trace_tol) + ")");
        if (defect >= sc.trace_warn)
            detail::warn_once(out.warnings, "trace defect above warn threshold (first at kick " +
                                                std::to_string(n) + ")");
        if (state.boundary_leak > sc.leak_budget)
            throw LeakBudgetError("boundary leak count " +
                                  std::to_string(state.boundary_leak) + " exceeds budget " +
                                  std::to_string(sc.leak_budget) + " at kick " +
                                  std::to_string(n));
    };
    const auto snapshot = [&](const SnapshotSel& sel) {
        if (out_dir.empty()) return;
        for (const auto& want : sc.snapshots)
            if (want == sel) {
                write_grid(state, out_dir + "/snap_" + sel.label() + ".chord");
                if (sc.wigner_snapshots)
                    write_wigner(out_dir + "/snap_" + sel.label() + ".wigner", wigner(state));
            }
    };

    for (long cycle = 1; cycle <= sc.n_kicks; ++cycle) {
        const long n = state.n_kicks + 1;  // global index of the kick this cycle applies
        if (!sc.kick_first) state = diss.apply(state);
        snapshot({n, false});
        const double E_minus = guarded_energy(n).energy();
        apply_kick(state, kick);
        check_state(n);
        const MomentSet post = guarded_energy(n);
        snapshot({n, true});
        if (sc.kick_first) state = diss.apply(state);

        RunRecord rec;
        rec.n = n;
        rec.tau = state.tau;
        rec.E_minus = E_minus;
        rec.E_plus = post.energy();
        rec.post = post;
        out.series.push_back(rec);
        out.max_boundary = std::max(out.max_boundary, boundary_magnitude(state));

        if (csv.is_open()) {
            csv << rec.n << ',' << detail::fmt_g17(rec.tau) << ','
                << detail::fmt_g17(rec.E_minus) << ',' << detail::fmt_g17(rec.E_plus) << ','
                << detail::fmt_g17(post.mean_x) << ',' << detail::fmt_g17(post.mean_p) << ','
                << detail::fmt_g17(post.xx) << ',' << detail::fmt_g17(post.pp) << ','
                << detail::fmt_g17(post.xp_sym) << '\n';
        }
        if (log && (cycle % 10 == 0 || cycle == sc.n_kicks))
            *log << sc.name << ": kick " << cycle << "/" << sc.n_kicks
                 << " E+ = " << rec.E_plus << "\n";
    }

    out.final_trace_defect = std::abs(state.trace() - 1.0);
    const int w = sc.window > 0 ? sc.window : int(std::max<long>(2, std::lround(sc.params.q)));
    if (long(out.series.size()) >= w + 1) {
        std::vector<CycleSample> samples;
        samples.reserve(out.series.size());
        for (const auto& r : out.series) samples.push_back({r.E_minus, r.E_plus});
        out.stats = cycle_stats(samples, sc.params.q, w);
        out.has_stats = true;
    }

    if (!out_dir.empty()) {
        std::ofstream mf(out_dir + "/manifest.txt", std::ios::binary);
        mf << "run: " << sc.name << "\n"
           << "formats: CHORD1 WIGNR1 csv:n,tau,E_minus,E_plus,mean_x,mean_p,xx,pp,xp_sym\n"
           << "beta: " << detail::fmt_g17(sc.params.beta) << "\n"
           << "D: " << detail::fmt_g17(sc.params.D) << "\n"
           << "kappa: " << detail::fmt_g17(sc.params.kappa) << "\n"
           << "eta2: " << detail::fmt_g17(sc.params.eta2()) << "\n"
           << "q: " << detail::fmt_g17(sc.params.q) << "\n"
           << "sigma: " << detail::fmt_g17(sigma) << "\n"
           << "grid: " << g.nk << " x " << g.ns << "\n"
           << "k_max: " << detail::fmt_g17(g.k_max) << "\n"
           << "dk: " << detail::fmt_g17(g.dk()) << "\n"
           << "commensurate_shift: " << out.commensurate_shift << "\n"
           << "kick_order: " << out.kick_order << "\n"
           << "interp: " << (sc.interp == InterpScheme::spectral ? "spectral" : "bilinear")
           << "\n"
           << "kick_first: " << (sc.kick_first ? "true" : "false") << "\n"
           << "initial: " << sc.initial.describe() << "\n"
           << "n_kicks: " << sc.n_kicks << "\n"
           << "factorization_residual: " << detail::fmt_g17(out.factorization_residual)
           << "\n"
           << "final_trace_defect: " << detail::fmt_g17(out.final_trace_defect) << "\n"
           << "boundary_leak: " << state.boundary_leak << "\n"
           << "max_boundary_magnitude: " << detail::fmt_g17(out.max_boundary) << "\n"
           << "hermitian_defect: " << detail::fmt_g17(hermitian_defect(state)) << "\n";
        if (out.has_stats)
            mf << "E_qst: " << detail::fmt_g17(out.stats.E_qst) << "\n"
               << "heat_rate: " << detail::fmt_g17(out.stats.heat_rate) << "\n"
               << "window: " << out.stats.window << "\n"
               << "converged: " << (out.stats.converged ? "true" : "false") << "\n"
               << "drift: " << detail::fmt_g17(out.stats.drift) << "\n";
        for (const auto& wmsg : out.warnings) mf << "warning: " << wmsg << "\n";
        write_grid(state, out_dir + "/final.chord");
    }

    out.state = std::move(state);
    return out;
}

// Counts kicks until the post-kick energy first reaches E_target.
inline KicksToEnergy kicks_to_energy(const Scenario& sc, double E_target, long n_max) {
    const double sigma = sc.params.sigma_k();
    const GridSpec g = commensurate_square(sc.nk, sc.k_max, sc.params.eta);
    ChordState state = detail::initial_state(sc, g);
    DissipativePlan diss(g, sc.params, sigma, sc.interp);
    const KickPlan kick = make_kick_plan(g, sc.params, sc.tol_tail);

    KicksToEnergy out;
    for (long n = 1; n <= n_max; ++n) {
        if (!sc.kick_first) {
            state = diss.apply(state);
            apply_kick(state, kick);
        } else {
            apply_kick(state, kick);
            state = diss.apply(state);
        }
        const double defect = std::abs(state.trace() - 1.0);
        if (defect >= sc.trace_tol)
            throw TraceDriftError("trace defect " + detail::fmt_g17(defect) + " at kick " +
                                  std::to_string(n));
        const MomentSet m = moments(state, sc.moment_guard);
        out.n = n;
        out.energy = m.energy();
        if (m.energy() >= E_target) {
            out.reached = true;
            return out;
        }
    }
    out.n = n_max;
    return out;
}

namespace detail {

inline std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

// One row per eta^2 value; a failure at one point is recorded in its row and
// the sweep continues.
inline std::vector<SweepRow> run_sweep(const SweepSpec& sw, const std::string& out_dir = "",
                                       std::ostream* log = nullptr) {
    std::vector<SweepRow> rows;
    for (const double e2 : sw.eta2_values) {
        SweepRow row;
        row.eta2 = e2;
        Scenario sc = sw.base;
        sc.params.eta = std::sqrt(e2);
        try {
            if (sw.mode == SweepMode::cycle) {
                const RunResult r = run_scenario(sc);
                if (!r.has_stats)
                    throw ValidationError("run too short for cycle statistics");
                row.E_qst = r.stats.E_qst;
                row.heat_rate = r.stats.heat_rate;
                row.converged = r.stats.converged;
                row.drift = r.stats.drift;
            } else {
                const KicksToEnergy k = kicks_to_energy(sc, sw.target_energy, sw.n_cap);
                row.n_kicks = k.n;
                row.reached = k.reached;
            }
            row.ok = true;
        } catch (const Error& e) {
            row.error = e.what();
        }
        if (log) {
            *log << "eta2 = " << e2 << ": ";
            if (!row.ok)
                *log << "failed: " << row.error << "\n";
            else if (sw.mode == SweepMode::cycle)
                *log << "E_qst = " << row.E_qst << " dQ/dtau = " << row.heat_rate << "\n";
            else
                *log << (row.reached ? "reached in " : "not reached, stopped at ")
                     << row.n_kicks << " kicks\n";
        }
        rows.push_back(row);
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream csv(out_dir + "/sweep.csv", std::ios::binary);
        if (!csv) throw Error("cannot open " + out_dir + "/sweep.csv");
        if (sw.mode == SweepMode::cycle) {
            csv << "eta2,E_qst,heat_rate,converged,drift,status\n";
            for (const auto& r : rows)
                csv << detail::fmt_g17(r.eta2) << ',' << detail::fmt_g17(r.E_qst) << ','
                    << detail::fmt_g17(r.heat_rate) << ',' << (r.converged ? 1 : 0) << ','
                    << detail::fmt_g17(r.drift) << ','
                    << detail::csv_quote(r.ok ? "ok" : r.error) << '\n';
        } else {
            csv << "eta2,n_kicks,reached,status\n";
            for (const auto& r : rows)
                csv << detail::fmt_g17(r.eta2) << ',' << r.n_kicks << ','
                    << (r.reached ? 1 : 0) << ',' << detail::csv_quote(r.ok ? "ok" : r.error)
                    << '\n';
        }
    }
    return rows;
}

}  // namespace kho
