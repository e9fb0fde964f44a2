#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rwcalc/coin_source.hpp"
#include "rwcalc/discrete_calculus.hpp"
#include "rwcalc/errors.hpp"
#include "rwcalc/numeric.hpp"

using namespace rwcalc;
using Catch::Approx;

namespace {

std::vector<int> coin_signs(std::uint64_t seed, std::uint32_t row, std::size_t n) {
    CoinMatrix coins(Seed{seed});
    std::vector<int> signs(n);
    for (std::size_t r = 0; r < n; ++r) signs[r] = coins.coin(row, r + 1);
    return signs;
}

}  // namespace

TEST_CASE("trapezoidal sums by hand") {
    GridFunction sq = gridfn::square();
    CHECK(trapezoidal_sum(sq, 0.0, 2.0, 1.0) == 3.0);   // 0/2 + 1 + 4/2
    CHECK(trapezoidal_sum(sq, 2.0, 0.0, 1.0) == -3.0);  // reversed sign
    CHECK(trapezoidal_sum(sq, 1.0, 1.0, 0.5) == 0.0);
    CHECK(trapezoidal_sum(gridfn::identity(), -1.0, 1.0, 0.5) == 0.0);
    CHECK(trapezoidal_sum(gridfn::identity(), 0.0, 1.0, 0.25) == 0.5);
    CHECK_THROWS_AS(trapezoidal_sum(sq, 0.0, 1.1, 0.25), OffLattice);
    CHECK_THROWS_AS(trapezoidal_sum(sq, 0.0, 1.0, 0.0), InvalidConfig);
}

TEST_CASE("function catalog lookups") {
    CHECK(gridfn::identity()(3.5) == 3.5);
    CHECK(gridfn::square()(-2.0) == 4.0);
    CHECK(gridfn::abs_shift(1.5)(1.0) == 0.5);
    CHECK(gridfn::sign_shift(0.25)(0.5) == 1.0);
    CHECK(gridfn::sign_shift(0.25)(0.25) == 0.0);
    CHECK(gridfn::sign_shift(0.25)(0.0) == -1.0);
    CHECK(gridfn::indicator(0.5)(0.5) == 1.0);
    CHECK(gridfn::indicator(0.5)(0.49) == 0.0);
    CHECK(gridfn::sine()(0.0) == 0.0);
    CHECK(gridfn::exponential()(0.0) == 1.0);

    CHECK(gridfn::by_name("identity")(2.0) == 2.0);
    CHECK(gridfn::by_name("square")(3.0) == 9.0);
    CHECK(gridfn::by_name("abs:1.5")(1.0) == 0.5);
    CHECK(gridfn::by_name("sign:0")(-2.0) == -1.0);
    CHECK(gridfn::by_name("indicator:0.25")(0.3) == 1.0);
    CHECK(gridfn::by_name("sine")(1.0) == Approx(std::sin(1.0)));
    CHECK(gridfn::by_name("exp")(1.0) == Approx(std::exp(1.0)));
    CHECK_THROWS_AS(gridfn::by_name("nope"), InvalidConfig);
    CHECK_THROWS_AS(gridfn::by_name(""), InvalidConfig);
}

TEST_CASE("piecewise linear catalog entry") {
    GridFunction f = gridfn::piecewise_linear({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0});
    CHECK(f(0.5) == 1.0);
    CHECK(f(1.0) == 2.0);
    CHECK(f(1.75) == 0.5);
}

TEST_CASE("the four identities vanish exactly on a tiny hand walk") {
    // a = 0, dx = 1, signs +1 +1 -1: grid path 0 -> 1 -> 2 -> 1
    std::vector<int> signs{1, 1, -1};
    for (const char* id : {"identity", "square", "abs:0", "sign:0", "indicator:1"}) {
        GridFunction f = gridfn::by_name(id);
        INFO(id);
        CHECK(stratonovich_residual(f, 0.0, 1.0, signs) == 0.0);
        CHECK(ito_residual(f, 0.0, 1.0, signs) == 0.0);
        CHECK(ito_tanaka_residual(f, 0.0, 1.0, signs) == 0.0);
        CHECK(occupation_residual(f, 0.0, 1.0, signs) == 0.0);
    }
}

TEST_CASE("lattice functions keep the identities exact on dyadic grids") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        for (std::size_t n : {1, 2, 7, 64, 501}) {
            std::vector<int> signs = coin_signs(seed, 0, n);
            for (double dx : {1.0, 0.25, 0.00390625}) {
                double a = -3 * dx;  // start off-origin but on the lattice
                for (const char* id : {"identity", "square", "abs:0", "sign:0",
                                       "indicator:0", "abs:-0.75"}) {
                    GridFunction f = gridfn::by_name(id);
                    INFO("seed " << seed << " n " << n << " dx " << dx << " f " << id);
                    REQUIRE(stratonovich_residual(f, a, dx, signs) == 0.0);
                    REQUIRE(ito_residual(f, a, dx, signs) == 0.0);
                    REQUIRE(ito_tanaka_residual(f, a, dx, signs) == 0.0);
                    REQUIRE(occupation_residual(f, a, dx, signs) == 0.0);
                }
            }
        }
    }
}

TEST_CASE("smooth transcendental functions leave only rounding noise") {
    std::vector<int> signs = coin_signs(99, 1, 4096);
    for (const char* id : {"sine", "exp"}) {
        GridFunction f = gridfn::by_name(id);
        // rounding scales with the largest function value the walk visits
        // (exp reaches ~1e7 after a 4096-step drift), so bound relatively
        double pos = 0.5, fmax = std::abs(f(pos));
        for (int s : signs) {
            pos += 0.25 * s;
            fmax = std::max(fmax, std::abs(f(pos)));
        }
        double tol = 1e-9 * (1 + fmax);
        INFO(id << " tol " << tol);
        CHECK(std::abs(stratonovich_residual(f, 0.5, 0.25, signs)) < tol);
        CHECK(std::abs(ito_residual(f, 0.5, 0.25, signs)) < tol);
        CHECK(std::abs(ito_tanaka_residual(f, 0.5, 0.25, signs)) < tol);
        CHECK(std::abs(occupation_residual(f, 0.5, 0.25, signs)) < tol);
    }
}

TEST_CASE("empty and single-step walks are degenerate but exact") {
    GridFunction f = gridfn::square();
    std::vector<int> empty;
    std::vector<int> one{-1};
    CHECK(stratonovich_residual(f, 1.0, 0.5, empty) == 0.0);
    CHECK(ito_residual(f, 1.0, 0.5, empty) == 0.0);
    CHECK(stratonovich_residual(f, 1.0, 0.5, one) == 0.0);
    CHECK(ito_residual(f, 1.0, 0.5, one) == 0.0);
    CHECK(ito_tanaka_residual(f, 1.0, 0.5, one) == 0.0);
    CHECK(occupation_residual(f, 1.0, 0.5, one) == 0.0);
}

TEST_CASE("median and least-squares slope helpers") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
    CHECK(median({7.0}) == 7.0);
    CHECK(ls_slope({0, 1, 2, 3}, {1, 3, 5, 7}) == Approx(2.0));
    CHECK(ls_slope({0, 1, 2}, {5, 4, 3}) == Approx(-1.0));
}

TEST_CASE("compensated accumulation survives cancellation") {
    KahanSum acc;
    acc.add(1.0);
    for (int i = 0; i < 10; ++i) acc.add(1e-16);
    for (int i = 0; i < 10; ++i) acc.add(-1e-16);
    CHECK(acc.value() == 1.0);
}
