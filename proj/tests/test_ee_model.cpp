// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "dsopt/channel.hpp"
#include "dsopt/ee_model.hpp"
#include "test_support.hpp"

using namespace dsopt;
using Catch::Approx;

namespace {
const EeConstants ref{}; // sigma2=1, p0=0.5, pmax=1, c=0.1, r0_raw=1e6
}

TEST_CASE("benefit limits and identities", "[ee_model]") {
    CHECK(benefit(UtilityCase::capacity, 0.0, 3.0, ref) == 0.0);
    CHECK(benefit(UtilityCase::packet_rate, 0.0, 5.0, ref) == 0.0);
    CHECK(benefit(UtilityCase::packet_rate, 0.3, 0.0, ref) == 0.0);
    // unit exponent: p = 1, g = c sigma^2
    CHECK(benefit(UtilityCase::packet_rate, 1.0, ref.c * ref.sigma2, ref) ==
          Approx(ref.r0_raw / std::exp(1.0)).epsilon(1e-15));
}

TEST_CASE("utility ratio", "[ee_model]") {
    CHECK(utility(UtilityCase::capacity, 0.0, 9.9, ref) == 0.0);

    // frozen from an independent evaluation of the ratio with
    // c=0.1, sigma2=1, P0=0.5, R0=1e6, p=0.5, g=1
    CHECK(utility(UtilityCase::packet_rate, 0.5, 1.0, ref) ==
          Approx(818730.75307798186).epsilon(1e-12));

    EeConstants k2 = ref;
    k2.p0 *= 2.0;
    for (UtilityCase uc : {UtilityCase::capacity, UtilityCase::packet_rate})
        CHECK(utility(uc, 0.4, 2.0, k2) < utility(uc, 0.4, 2.0, ref));
}

TEST_CASE("optimal power, capacity case", "[ee_model]") {
    SECTION("frozen reference root") {
        EeConstants k = ref;
        k.pmax = 1e12; // effectively unclamped
        CHECK(optimal_power_case1(5.0, k) == Approx(0.59346295397123913).epsilon(1e-9));
    }
    SECTION("residual at the root") {
        RngStream rng(5);
        for (int i = 0; i < 100; ++i) {
            const double lambda = 0.1 + 19.9 * rng.next_uniform();
            const double p = case1_unconstrained_root(lambda, ref);
            CHECK(std::abs(case1_power_equation(p, lambda, ref)) < 1e-9);
        }
    }
    SECTION("clamping") {
        EeConstants k = ref;
        k.pmax = 0.1;
        CHECK(optimal_power_case1(5.0, k) == 0.1);
    }
    CHECK_THROWS_AS(optimal_power_case1(0.0, ref), std::domain_error);
}

TEST_CASE("optimal power, packet-rate case", "[ee_model]") {
    SECTION("P0 = 0 collapses the square root") {
        EeConstants k = ref;
        k.p0 = 1e-300; // validate() wants > 0; the formula limit is c sigma^2 / lambda
        k.pmax = 10.0;
        CHECK(optimal_power_case2(2.0, k) == Approx(ref.c * ref.sigma2 / 2.0).epsilon(1e-9));
    }
    SECTION("frozen reference value") {
        CHECK(optimal_power_case2(2.0, ref) == Approx(0.18507810593582122).epsilon(1e-14));
    }
    SECTION("decreases toward zero in lambda") {
        double prev = optimal_power_case2(0.5, ref);
        for (double lambda = 1.0; lambda < 1e5; lambda *= 4.0) {
            const double p = optimal_power_case2(lambda, ref);
            CHECK(p < prev);
            prev = p;
        }
        CHECK(prev < 1e-4);
    }
    CHECK_THROWS_AS(optimal_power_case2(-1.0, ref), std::domain_error);
}

TEST_CASE("packet-rate optimum agrees with a fine grid argmax", "[ee_model]") {
    RngStream rng(6);
    for (int i = 0; i < 10; ++i) {
        const double lambda = 0.1 + 19.9 * rng.next_uniform();
        const double p_formula = optimal_power_case2(lambda, ref);
        double best_u = -1.0, best_p = 0.0;
        const int steps = 1000000;
        for (int s = 0; s <= steps; ++s) {
            const double p = ref.pmax * static_cast<double>(s) / steps;
            const double u = utility(UtilityCase::packet_rate, p, lambda, ref);
            if (u > best_u) {
                best_u = u;
                best_p = p;
            }
        }
        CHECK(std::abs(p_formula - best_p) < 1e-5);
    }
}

TEST_CASE("continuous optimum", "[ee_model]") {
    SECTION("hand channel") {
        ChannelMatrix h(1, 4);
        h(0, 0) = cxd{1, 0};
        h(0, 1) = cxd{0, 1};
        const ContinuousOptimum opt = continuous_optimum(UtilityCase::packet_rate, h, ref);
        CHECK_FALSE(opt.degenerate);
        CHECK(opt.p_star == Approx(0.18507810593582122).epsilon(1e-9));
        CHECK(opt.u_star == Approx(1114121.5112519409).epsilon(1e-9));
    }
    SECTION("utility depends on the channel only through lambda_max") {
        ChannelMatrix h1(1, 4), h2(1, 4);
        h1(0, 0) = cxd{1, 0};
        h1(0, 1) = cxd{0, 1};
        h2(0, 2) = cxd{std::sqrt(2.0), 0};
        for (UtilityCase uc : {UtilityCase::capacity, UtilityCase::packet_rate})
            CHECK(continuous_optimum(uc, h1, ref).u_star ==
                  Approx(continuous_optimum(uc, h2, ref).u_star).epsilon(1e-9));
    }
    SECTION("degenerate channel") {
        const ContinuousOptimum opt =
            continuous_optimum(UtilityCase::capacity, ChannelMatrix(1, 4), ref);
        CHECK(opt.degenerate);
        CHECK(opt.u_star == 0.0);
    }
}

TEST_CASE("continuous optimum dominates random probes", "[ee_model]") {
    RngStream rng(7);
    for (int t = 0; t < 10; ++t) {
        RngStream r = rng.substream(t);
        const ChannelMatrix h = sample_channel(1, 4, r);
        for (UtilityCase uc : {UtilityCase::capacity, UtilityCase::packet_rate}) {
            const ContinuousOptimum opt = continuous_optimum(uc, h, ref);
            for (int p = 0; p < 1000; ++p) {
                const double pw = ref.pmax * r.next_uniform();
                const double g = effective_gain(h, testsup::random_beam(4, r));
                CHECK(utility(uc, pw, g, ref) <= opt.u_star * (1 + 1e-12) + 1e-300);
            }
        }
    }
}

namespace {

// at most one + -> - transition in the forward differences
bool unimodal_on_grid(UtilityCase uc, double g, const EeConstants& k, int points) {
    int changes = 0;
    int sign = 0;
    double prev = utility(uc, 0.0, g, k);
    for (int i = 1; i <= points; ++i) {
        const double p = k.pmax * static_cast<double>(i) / points;
        const double u = utility(uc, p, g, k);
        const double d = u - prev;
        prev = u;
        if (d > 0)
            sign = 1;
        else if (d < 0) {
            if (sign == 1) ++changes;
            sign = -1;
        }
    }
    return changes <= 1;
}

} // namespace

TEST_CASE("utility is unimodal in p and monotone in g", "[ee_model]") {
    RngStream rng(8);
    for (int t = 0; t < 10; ++t) {
        const double g = 0.05 + 10.0 * rng.next_uniform();
        CHECK(unimodal_on_grid(UtilityCase::capacity, g, ref, 10000));
        CHECK(unimodal_on_grid(UtilityCase::packet_rate, g, ref, 10000));
    }
    for (int t = 0; t < 200; ++t) {
        const double p = 0.01 + 0.99 * rng.next_uniform();
        const double g1 = 0.01 + 10.0 * rng.next_uniform();
        const double g2 = g1 + 0.01 + rng.next_uniform();
        for (UtilityCase uc : {UtilityCase::capacity, UtilityCase::packet_rate})
            CHECK(utility(uc, p, g1, ref) < utility(uc, p, g2, ref));
    }
}

TEST_CASE("stationarity sign structure around the capacity root", "[ee_model]") {
    RngStream rng(9);
    for (int t = 0; t < 20; ++t) {
        const double lambda = 0.1 + 19.9 * rng.next_uniform();
        const double root = case1_unconstrained_root(lambda, ref);
        for (int i = 1; i <= 100; ++i) {
            const double frac = static_cast<double>(i) / 101.0;
            CHECK(case1_power_equation(root * frac, lambda, ref) > 0.0);
            CHECK(case1_power_equation(root + 9.0 * root * frac, lambda, ref) < 0.0);
        }
    }
}

TEST_CASE("clamped capacity power beats every grid point", "[ee_model]") {
    // lambda large enough that the unconstrained root exceeds pmax
    const double lambda = 500.0;
    const double root = case1_unconstrained_root(lambda, ref);
    REQUIRE(root > ref.pmax);
    const double p_star = optimal_power_case1(lambda, ref);
    CHECK(p_star == ref.pmax);
    const double u_star = utility(UtilityCase::capacity, p_star, lambda, ref);
    for (int i = 0; i <= 2000; ++i) {
        const double p = ref.pmax * static_cast<double>(i) / 2000;
        CHECK(utility(UtilityCase::capacity, p, lambda, ref) <= u_star * (1 + 1e-12));
    }
}
