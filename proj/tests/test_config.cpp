#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>

#include "kho/config.hpp"

using namespace kho;

TEST_CASE("number literals accept pi multiples", "[config]") {
    const auto num = [](const std::string& s) { return detail::parse_number(s, "t"); };
    CHECK(num("pi") == Catch::Approx(pi).epsilon(1e-16));
    CHECK(num("-pi") == Catch::Approx(-pi).epsilon(1e-16));
    CHECK(num("0.7pi") == Catch::Approx(0.7 * pi).epsilon(1e-16));
    CHECK(num("2pi") == Catch::Approx(2.0 * pi).epsilon(1e-16));
    CHECK(num(" 1e-3 ") == Catch::Approx(1e-3).epsilon(1e-16));
    CHECK(num("-4.5") == -4.5);
    CHECK_THROWS_AS(num("12abc"), ConfigError);
    CHECK_THROWS_AS(num("pi2"), ConfigError);
    CHECK_THROWS_AS(num(""), ConfigError);
    CHECK_THROWS_AS(num("two"), ConfigError);
}

TEST_CASE("config parsing: comments, duplicates, syntax errors", "[config]") {
    const Config c = Config::parse_string(
        "# run setup\n"
        "beta = 0.1   # trailing comment\n"
        "\n"
        "eta2 = 0.7pi\n"
        "nk=513\n"
        "wigner_snapshots = true\n"
        "sweep_eta2 = 0.2pi, 0.3pi, 0.4pi\n");
    CHECK(c.get_number("beta") == 0.1);
    CHECK(c.get_number("eta2") == Catch::Approx(0.7 * pi).epsilon(1e-16));
    CHECK(c.get_int("nk") == 513);
    CHECK(c.get_bool("wigner_snapshots", false));
    const auto vals = c.get_list("sweep_eta2");
    REQUIRE(vals.size() == 3);
    CHECK(vals[1] == Catch::Approx(0.3 * pi).epsilon(1e-16));
    CHECK(c.unknown_keys().empty());

    CHECK_THROWS_AS(Config::parse_string("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_WITH(Config::parse_string("x = 1\njust words\n"),
                      Catch::Matchers::ContainsSubstring(":2:"));
    CHECK_THROWS_AS(Config::parse_string(" = 3\n"), ConfigError);
}

TEST_CASE("accessors: defaults, integer strictness, unused keys", "[config]") {
    const Config c =
        Config::parse_string("n_kicks = 60\nq = 2.5\nflag = no\nbad = off\n");
    CHECK(c.get_int("n_kicks") == 60);
    CHECK(c.get_int("missing", 7) == 7);
    CHECK(c.get_number("missing2", 1.25) == 1.25);
    CHECK(c.get_string("missing3", "dflt") == "dflt");
    CHECK_FALSE(c.get_bool("flag", true));
    CHECK_THROWS_AS(c.get_bool("bad", true), ConfigError);
    CHECK_THROWS_AS(c.get_int("q"), ConfigError);
    CHECK_THROWS_AS(c.get_string("absent"), ConfigError);
    CHECK_THROWS_AS(c.get_bool("n_kicks", false), ConfigError);

    const Config d = Config::parse_string("a = 1\nb = 2\n");
    CHECK(d.get_number("a") == 1.0);
    const auto unk = d.unknown_keys();
    REQUIRE(unk.size() == 1);
    CHECK(unk[0] == "b");
}

TEST_CASE("snapshot selectors", "[config]") {
    const auto sel = parse_snapshots("35+, 36-,36+");
    REQUIRE(sel.size() == 3);
    CHECK(sel[0] == SnapshotSel{35, true});
    CHECK(sel[1] == SnapshotSel{36, false});
    CHECK(sel[2] == SnapshotSel{36, true});
    CHECK(sel[1].label() == "36-");
    CHECK(sel[0] < sel[1]);
    CHECK(parse_snapshots("").empty());
    CHECK_THROWS_AS(parse_snapshots("abc+"), ConfigError);
    CHECK_THROWS_AS(parse_snapshots("0-"), ConfigError);
    CHECK_THROWS_AS(parse_snapshots("7"), ConfigError);
}

TEST_CASE("config files come from disk with their path as origin", "[config]") {
    namespace fs = std::filesystem;
    const fs::path d = fs::temp_directory_path() / "kho_config_test";
    fs::create_directories(d);
    const std::string path = (d / "run.cfg").string();
    {
        std::ofstream os(path);
        os << "beta = 1e-5\nkappa = -0.8\n";
    }
    const Config c = Config::parse_file(path);
    CHECK(c.origin() == path);
    CHECK(c.get_number("beta") == 1e-5);
    CHECK(c.get_number("kappa") == -0.8);
    CHECK_THROWS_AS(Config::parse_file((d / "nope.cfg").string()), ConfigError);
}
