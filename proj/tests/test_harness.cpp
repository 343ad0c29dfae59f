#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kho/harness.hpp"

using namespace kho;
namespace fs = std::filesystem;

namespace {

std::string read_bytes(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& leaf) {
    const fs::path d = fs::temp_directory_path() / "kho_harness_test" / leaf;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

Scenario mini_scenario() {
    Scenario sc;
    sc.name = "mini";
    sc.params = ModelParams{0.1, 1.0, -0.8, std::sqrt(pi), 4.0};
    sc.nk = 129;
    sc.k_max = 10.0;
    sc.n_kicks = 6;
    return sc;
}

}  // namespace

TEST_CASE("every preset loads and validates", "[harness]") {
    for (const auto& name : preset_names()) {
        const Preset pr = preset(name);
        CHECK(pr.scenario.name == name);
        CHECK(validate(pr.scenario.params).ok);
    }
    CHECK_THROWS_AS(preset("fig99"), ConfigError);

    const Preset f1 = preset("fig1-resonant");
    CHECK(f1.scenario.params.beta == 0.1);
    CHECK(f1.scenario.params.D == 5.0);
    CHECK(f1.scenario.params.kappa == -0.8);
    CHECK(f1.scenario.params.eta2() == Catch::Approx(pi).epsilon(1e-15));
    CHECK(f1.scenario.params.q == 4.0);
    CHECK(f1.scenario.n_kicks == 36);
    CHECK(f1.scenario.wigner_snapshots);
    REQUIRE(f1.scenario.snapshots.size() == 3);
    CHECK(f1.scenario.snapshots[0] == SnapshotSel{35, true});
    CHECK_FALSE(f1.is_sweep);

    const Preset f6 = preset("fig6");
    CHECK(f6.is_sweep);
    CHECK(f6.mode == SweepMode::kicks_to_energy);
    CHECK(f6.target_energy == 50.0);
    CHECK(f6.n_cap == 400);
    REQUIRE(f6.eta2_values.size() == 11);
    CHECK(f6.eta2_values.front() == Catch::Approx(0.40 * pi).epsilon(1e-15));
    CHECK(f6.eta2_values.back() == Catch::Approx(0.60 * pi).epsilon(1e-15));
    CHECK(f6.scenario.params.beta == 1e-6);
}

TEST_CASE("scenario from config: overrides, unknown keys, sweep guard", "[harness]") {
    const Scenario sc = scenario_from_config(Config::parse_string(
        "name = demo\nbeta = 0.2\nD = 3\nkappa = -1\neta2 = pi\nq = 4\n"
        "nk = 65\nk_max = 8\nn_kicks = 9\ninitial = coherent\nx0 = 1\np0 = -0.5\n"
        "snapshots = 2-,2+\nmoment_guard = warn\ninterp = bilinear\nwindow = 3\n"));
    CHECK(sc.name == "demo");
    CHECK(sc.params.beta == 0.2);
    CHECK(sc.params.eta == Catch::Approx(std::sqrt(pi)).epsilon(1e-15));
    CHECK(sc.nk == 65);
    CHECK(sc.n_kicks == 9);
    CHECK(sc.initial.kind == InitialSpec::coherent);
    CHECK(sc.initial.x0 == 1.0);
    CHECK(sc.snapshots.size() == 2);
    CHECK(sc.moment_guard == GuardPolicy::warn);
    CHECK(sc.interp == InterpScheme::bilinear);
    CHECK(sc.window == 3);

    // preset plus a single override
    const Scenario f2 = scenario_from_config(
        Config::parse_string("preset = fig2\nn_kicks = 10\n"));
    CHECK(f2.name == "fig2");
    CHECK(f2.params.D == 5.0);
    CHECK(f2.n_kicks == 10);

    CHECK_THROWS_AS(scenario_from_config(Config::parse_string("nkicks = 5\n")),
                    ConfigError);  // typo is refused, not ignored
    CHECK_THROWS_AS(scenario_from_config(Config::parse_string("preset = fig3\n")),
                    ConfigError);  // sweeps do not run as single scenarios
    CHECK_THROWS_AS(scenario_from_config(Config::parse_string("beta = 2.5\n")),
                    ValidationError);
    CHECK_THROWS_AS(scenario_from_config(Config::parse_string("initial = bogus\n")),
                    ConfigError);
}

TEST_CASE("sweep from config", "[harness]") {
    const SweepSpec f3 = sweep_from_config(Config::parse_string("preset = fig3\n"));
    CHECK(f3.mode == SweepMode::cycle);
    REQUIRE(f3.eta2_values.size() == 9);
    CHECK(f3.eta2_values.front() == Catch::Approx(0.2 * pi).epsilon(1e-15));
    CHECK(f3.eta2_values.back() == Catch::Approx(pi).epsilon(1e-14));
    CHECK(f3.base.params.D == 5.0);
    CHECK(f3.base.n_kicks == 60);

    const SweepSpec sw = sweep_from_config(Config::parse_string(
        "beta = 0.1\nD = 1\nkappa = -0.8\neta2 = pi\nq = 4\nnk = 65\nk_max = 8\n"
        "n_kicks = 6\nsweep_eta2 = 0.9pi, pi\nsweep_mode = kicks-to-energy\n"
        "target_energy = 2\nn_cap = 7\n"));
    CHECK(sw.mode == SweepMode::kicks_to_energy);
    CHECK(sw.eta2_values.size() == 2);
    CHECK(sw.target_energy == 2.0);
    CHECK(sw.n_cap == 7);

    CHECK_THROWS_AS(sweep_from_config(Config::parse_string("beta = 0.1\n")),
                    ConfigError);  // no eta2 values
    CHECK_THROWS_AS(sweep_from_config(Config::parse_string("preset = fig2\n")),
                    ConfigError);  // not a sweep preset
}

TEST_CASE("run loop: series, snapshots, manifest", "[harness]") {
    Scenario sc = mini_scenario();
    sc.snapshots = parse_snapshots("3-,3+");
    const fs::path dir = fresh_dir("run");
    const RunResult r = run_scenario(sc, dir.string());

    REQUIRE(r.series.size() == 6);
    const double sigma = sc.params.sigma_k();
    for (std::size_t i = 0; i < r.series.size(); ++i) {
        CHECK(r.series[i].n == long(i) + 1);
        CHECK(r.series[i].tau ==
              Catch::Approx(double(i + 1) * sigma).epsilon(1e-13));
        CHECK(r.series[i].E_plus > 0.0);
    }
    CHECK(r.state.n_kicks == 6);
    CHECK(r.kick_order > 0);
    CHECK(r.commensurate_shift > 0);
    CHECK(r.factorization_residual < 1e-12);
    CHECK(r.final_trace_defect < 1e-12);
    CHECK(r.max_boundary < 1e-3);  // kick sidebands reach the edge at ~J_4 weight
    CHECK(r.warnings.empty());
    REQUIRE(r.has_stats);  // 6 cycles, window 4
    CHECK(r.stats.window == 4);

    // csv schema is part of the interface
    std::ifstream csv(dir / "series.csv");
    std::string header;
    REQUIRE(std::getline(csv, header));
    CHECK(header == "n,tau,E_minus,E_plus,mean_x,mean_p,xx,pp,xp_sym");
    int rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    CHECK(rows == 6);

    const ChordState before = read_grid((dir / "snap_3-.chord").string());
    CHECK(before.n_kicks == 2);
    CHECK(before.tau == Catch::Approx(3.0 * sigma).epsilon(1e-13));
    const ChordState after = read_grid((dir / "snap_3+.chord").string());
    CHECK(after.n_kicks == 3);
    CHECK(after.tau == Catch::Approx(3.0 * sigma).epsilon(1e-13));
    CHECK(std::abs(before.trace() - cd(1.0, 0.0)) < 1e-12);

    const ChordState fin = read_grid((dir / "final.chord").string());
    CHECK(fin.n_kicks == 6);

    const std::string manifest = read_bytes(dir / "manifest.txt");
    CHECK(manifest.find("run: mini") != std::string::npos);
    CHECK(manifest.find("commensurate_shift:") != std::string::npos);
    CHECK(manifest.find("E_qst:") != std::string::npos);
}

TEST_CASE("identical runs produce identical bytes", "[harness]") {
    const Scenario sc = mini_scenario();
    const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
    run_scenario(sc, a.string());
    run_scenario(sc, b.string());
    CHECK(read_bytes(a / "series.csv") == read_bytes(b / "series.csv"));
    CHECK(read_bytes(a / "final.chord") == read_bytes(b / "final.chord"));
}

TEST_CASE("a resumed run continues the original series", "[harness]") {
    Scenario full = mini_scenario();
    full.n_kicks = 8;
    full.snapshots = parse_snapshots("4+");
    const fs::path dir = fresh_dir("resume");
    const RunResult whole = run_scenario(full, dir.string());

    Scenario tail = mini_scenario();
    tail.n_kicks = 4;
    tail.initial.kind = InitialSpec::file;
    tail.initial.path = (dir / "snap_4+.chord").string();
    const RunResult rest = run_scenario(tail);

    REQUIRE(rest.series.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(rest.series[i].n == 5 + i);
        CHECK(rest.series[i].E_plus ==
              Catch::Approx(whole.series[4 + i].E_plus).margin(1e-12));
    }
}

TEST_CASE("kick count until an energy target", "[harness]") {
    const Scenario sc = mini_scenario();
    const KicksToEnergy hit = kicks_to_energy(sc, 0.5, 50);
    CHECK(hit.reached);
    CHECK(hit.n == 1);
    CHECK(hit.energy >= 0.5);

    const KicksToEnergy miss = kicks_to_energy(sc, 1e6, 5);
    CHECK_FALSE(miss.reached);
    CHECK(miss.n == 5);
    CHECK(miss.energy < 1e6);
}

TEST_CASE("sweeps record per-point failures and keep going", "[harness]") {
    SweepSpec sw;
    sw.base = mini_scenario();
    sw.mode = SweepMode::cycle;
    sw.eta2_values = {pi, 0.0};  // second point cannot build a grid
    const fs::path dir = fresh_dir("sweep_cycle");
    const auto rows = run_sweep(sw, dir.string());
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].ok);
    CHECK(rows[0].E_qst > 0.0);
    CHECK_FALSE(rows[1].ok);
    CHECK_FALSE(rows[1].error.empty());
    {
        std::ifstream csv(dir / "sweep.csv");
        std::string header;
        REQUIRE(std::getline(csv, header));
        CHECK(header == "eta2,E_qst,heat_rate,converged,drift,status");
    }

    sw.mode = SweepMode::kicks_to_energy;
    sw.eta2_values = {pi};
    sw.target_energy = 0.5;
    sw.n_cap = 10;
    const fs::path dir2 = fresh_dir("sweep_kicks");
    const auto rows2 = run_sweep(sw, dir2.string());
    REQUIRE(rows2.size() == 1);
    CHECK(rows2[0].ok);
    CHECK(rows2[0].reached);
    CHECK(rows2[0].n_kicks == 1);
    {
        std::ifstream csv(dir2 / "sweep.csv");
        std::string header;
        REQUIRE(std::getline(csv, header));
        CHECK(header == "eta2,n_kicks,reached,status");
    }
}
