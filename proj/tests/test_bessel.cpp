#include <catch2/catch_amalgamated.hpp>

#include "kho/bessel.hpp"
#include "support/oracles.hpp"

using namespace kho;

TEST_CASE("downward recurrence against the power series", "[bessel]") {
    for (const double x : {0.05, 0.5, 1.0, 2.0, 3.7, 5.0, 6.36, 10.0, -3.7, -9.1}) {
        const auto jn = bessel_jn(20, x);
        for (int l = 0; l <= 20; ++l) {
            CAPTURE(x, l);
            CHECK(jn[std::size_t(l)] ==
                  Catch::Approx(oracles::bessel_series(l, x)).margin(1e-13));
        }
    }
}

TEST_CASE("reference values", "[bessel]") {
    CHECK(bessel_j(0, 1.0) == Catch::Approx(0.7651976865579666).margin(1e-15));
    CHECK(bessel_j(1, 1.0) == Catch::Approx(0.4400505857449335).margin(1e-15));
}

TEST_CASE("zero argument is the Kronecker delta, exactly", "[bessel]") {
    const auto jn = bessel_jn(8, 0.0);
    CHECK(jn[0] == 1.0);
    for (int l = 1; l <= 8; ++l) CHECK(jn[std::size_t(l)] == 0.0);
}

TEST_CASE("order and argument reflections", "[bessel]") {
    for (const double x : {0.8, 2.5, 7.0}) {
        for (int l = 0; l <= 6; ++l) {
            const double sign = (l % 2 == 0) ? 1.0 : -1.0;
            CAPTURE(x, l);
            CHECK(bessel_j(-l, x) == Catch::Approx(sign * bessel_j(l, x)).margin(1e-15));
            CHECK(bessel_j(l, -x) == Catch::Approx(sign * bessel_j(l, x)).margin(1e-15));
        }
    }
}

TEST_CASE("sum rule over all orders", "[bessel]") {
    for (const double x : {0.7, 3.0, 6.36, 12.0}) {
        const auto jn = bessel_jn(60, x);
        double sum = jn[0] * jn[0];
        for (int l = 1; l <= 60; ++l) sum += 2.0 * jn[std::size_t(l)] * jn[std::size_t(l)];
        CAPTURE(x);
        CHECK(sum == Catch::Approx(1.0).margin(1e-13));
    }
}
