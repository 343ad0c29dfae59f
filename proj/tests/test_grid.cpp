#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "kho/grid.hpp"

using namespace kho;

TEST_CASE("grid construction rules", "[grid]") {
    CHECK_THROWS_AS(GridSpec::make(128, 129, 10.0, 10.0), ValidationError);
    CHECK_THROWS_AS(GridSpec::make(129, 128, 10.0, 10.0), ValidationError);
    CHECK_THROWS_AS(GridSpec::make(15, 15, 10.0, 10.0), ValidationError);
    CHECK_THROWS_AS(GridSpec::make(129, 129, 0.0, 10.0), ValidationError);

    const GridSpec g = GridSpec::make(129, 65, 10.0, 5.0);
    CHECK(g.k_at(g.ck()) == 0.0);
    CHECK(g.s_at(g.cs()) == 0.0);
    CHECK(g.k_at(0) == -10.0);
    CHECK(g.k_at(g.nk - 1) == 10.0);
    CHECK(g.dk() == Catch::Approx(20.0 / 128).epsilon(1e-15));
    CHECK(g.size() == 129u * 65u);
    CHECK_FALSE(g.square());
    CHECK(GridSpec::square_grid(65, 8.0).square());
}

TEST_CASE("commensurate grid puts the kick shift on nodes", "[grid]") {
    for (const double eta : {1.0, std::sqrt(M_PI), std::sqrt(0.7 * M_PI)}) {
        const GridSpec g = commensurate_square(513, 12.0, eta);
        const double ratio = std::sqrt(2.0) * eta / g.dk();
        CHECK(std::abs(ratio - std::round(ratio)) < 1e-10);
        CHECK(g.commensurate_mode);
        CHECK(g.square());
        // the nudge keeps the extent close to the request
        CHECK(g.k_max == Catch::Approx(12.0).margin(0.5));
    }
}

TEST_CASE("coherent state grid values", "[grid]") {
    const GridSpec g = GridSpec::square_grid(65, 8.0);
    const ChordState st = coherent_state(g, 0.3, -1.1);
    CHECK(st.trace() == cd(1.0, 0.0));
    CHECK(st.tau == 0.0);
    CHECK(st.n_kicks == 0);

    const double k = g.k_at(40), s = g.s_at(22);
    const cd expect = std::polar(std::exp(-(k * k + s * s) / 4.0), 0.3 * k - 1.1 * s);
    CHECK(std::abs(st.at(22, 40) - expect) < 1e-15);
    CHECK(hermitian_defect(st) < 1e-15);
}

TEST_CASE("stationary thermal chord", "[grid]") {
    const GridSpec g = GridSpec::square_grid(65, 8.0);
    const ChordState st = stationary_chord(g, 5.0);
    CHECK(st.trace() == cd(1.0, 0.0));
    const double k = g.k_at(10), s = g.s_at(50);
    CHECK(std::abs(st.at(50, 10) - cd(std::exp(-5.0 * (k * k + s * s) / 2.0), 0.0)) <
          1e-15);
    CHECK_THROWS_AS(stationary_chord(g, 0.0), ValidationError);
}

TEST_CASE("bilinear sampling with leak accounting", "[grid]") {
    const GridSpec g = GridSpec::square_grid(65, 8.0);
    ChordState st = coherent_state(g, 0.0, 0.0);

    // exact at nodes
    CHECK(std::abs(sample(st, g.k_at(12), g.s_at(40)) - st.at(40, 12)) < 1e-15);
    CHECK(st.boundary_leak == 0);

    // interior point: within bilinear error of the smooth field
    const double k = 0.5 * (g.k_at(12) + g.k_at(13)), s = g.s_at(40);
    const cd mid = 0.5 * (st.at(40, 12) + st.at(40, 13));
    CHECK(std::abs(sample(st, k, s) - mid) < 1e-12);
    CHECK(st.boundary_leak == 0);

    // off the domain: zero, counted
    CHECK(sample(st, 9.0, 0.0) == cd(0.0, 0.0));
    CHECK(st.boundary_leak == 1);
    CHECK(sample(st, 0.0, -8.001) == cd(0.0, 0.0));
    CHECK(st.boundary_leak == 2);

    // the far edge is inside the domain
    CHECK(std::abs(sample(st, 8.0, 8.0) - st.at(64, 64)) < 1e-15);
    CHECK(st.boundary_leak == 2);
}

TEST_CASE("boundary magnitude scans the frame", "[grid]") {
    const GridSpec g = GridSpec::square_grid(33, 4.0);
    ChordState st = coherent_state(g, 0.0, 0.0);
    const double expected = std::exp(-16.0 / 4.0);  // |w| at the edge midpoints
    CHECK(boundary_magnitude(st) == Catch::Approx(expected).epsilon(1e-12));
    st.at(0, 16) = cd(0.5, 0.0);
    CHECK(boundary_magnitude(st) == Catch::Approx(0.5).epsilon(1e-12));
}
