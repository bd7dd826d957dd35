// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "dsopt/evaluator.hpp"
#include "test_support.hpp"

using namespace dsopt;
using Catch::Approx;

namespace {
const EeConstants ref{};
}

TEST_CASE("fitness of a single-channel batch", "[evaluator]") {
    const ChannelBatch batch = make_batch(1, 4, 1, RngStream(31, 1));
    const ChannelMatrix& h = batch.channels[0];
    RngStream rng(32);
    const BeamSet bs = testsup::random_beamset(4, 4, rng);
    const PowerSet grid = uniform_power_grid(3, ref.pmax);

    const Decision d = select_power(UtilityCase::packet_rate, h, bs, grid, ref);
    const double g = select_beam(h, bs).gain;
    const double direct = utility(UtilityCase::packet_rate, grid.levels[d.power_index], g, ref);
    CHECK(fitness(UtilityCase::packet_rate, batch, grid, bs, ref) == direct);
}

TEST_CASE("fitness with the dominant vector tracks the continuous optimum", "[evaluator]") {
    const ChannelBatch batch = make_batch(1, 4, 1, RngStream(33, 1));
    const ContinuousOptimum opt =
        continuous_optimum(UtilityCase::packet_rate, batch.channels[0], ref);
    const BeamSet bs = BeamSet::from_vectors({opt.v_star});
    const PowerSet dense = uniform_power_grid(12, ref.pmax);
    const double f = fitness(UtilityCase::packet_rate, batch, dense, bs, ref);
    CHECK(f <= opt.u_star * (1 + 1e-12));
    // a 2^12-level grid loses almost nothing
    CHECK(f > 0.9999 * opt.u_star);
}

TEST_CASE("fitness is invariant under batch permutation", "[evaluator]") {
    ChannelBatch batch = make_batch(1, 3, 257, RngStream(34, 1));
    RngStream rng(35);
    const BeamSet bs = testsup::random_beamset(3, 4, rng);
    const PowerSet grid = uniform_power_grid(2, ref.pmax);
    const double f1 = fitness(UtilityCase::packet_rate, batch, grid, bs, ref);
    std::reverse(batch.channels.begin(), batch.channels.end());
    const double f2 = fitness(UtilityCase::packet_rate, batch, grid, bs, ref);
    CHECK(f1 == Approx(f2).epsilon(1e-12));
}

TEST_CASE("evaluation is bit-reproducible across thread counts", "[evaluator]") {
    const ChannelBatch batch = make_batch(1, 4, 501, RngStream(36, 1));
    RngStream rng(37);
    const BeamSet bs = testsup::random_beamset(4, 8, rng);
    const PowerSet grid = uniform_power_grid(4, ref.pmax);
    const DecisionSetStats s1 = evaluate_decision_set(UtilityCase::packet_rate, batch, grid, bs, ref, 1);
    const DecisionSetStats s2 = evaluate_decision_set(UtilityCase::packet_rate, batch, grid, bs, ref, 2);
    const DecisionSetStats s4 = evaluate_decision_set(UtilityCase::packet_rate, batch, grid, bs, ref, 4);
    CHECK(s1.avg_utility == s2.avg_utility);
    CHECK(s1.avg_utility == s4.avg_utility);
    CHECK(s1.avg_packet_benefit == s2.avg_packet_benefit);
    CHECK(csit_utility(UtilityCase::packet_rate, batch, ref, 1) ==
          csit_utility(UtilityCase::packet_rate, batch, ref, 3));
}

TEST_CASE("qos feasibility thresholds", "[evaluator]") {
    const ChannelBatch batch = make_batch(1, 4, 200, RngStream(38, 1));
    RngStream rng(39);
    const BeamSet bs = testsup::random_beamset(4, 8, rng);
    const PowerSet grid = uniform_power_grid(4, ref.pmax);

    const auto [ok0, avg0] = qos_feasible(UtilityCase::packet_rate, batch, grid, bs, ref, 0.0);
    CHECK(ok0);
    CHECK(avg0 > 0.0);

    const auto [ok_hi, avg_hi] =
        qos_feasible(UtilityCase::packet_rate, batch, grid, bs, ref, ref.r0_raw + 1.0);
    CHECK_FALSE(ok_hi);
    CHECK(avg_hi < ref.r0_raw);
    CHECK(avg0 == avg_hi);
}

TEST_CASE("generous RVQ codebook satisfies the reference QoS", "[evaluator][slow]") {
    // B2 = 6 RVQ, B1 = 4 grid at the reference constants and r0 = 3e5 bits/s
    const ChannelBatch batch = make_batch(1, 4, 10000, RngStream(40, 1));
    RngStream rng(41);
    BeamSet bs(4, 64);
    for (cxd& z : bs.entries()) z = rng.next_cn();
    for (std::size_t j = 0; j < bs.size(); ++j) {
        auto col = bs.column(j);
        double n2 = 0;
        for (cxd z : col) n2 += std::norm(z);
        for (cxd& z : col) z /= std::sqrt(n2);
    }
    const PowerSet grid = uniform_power_grid(4, ref.pmax);
    const auto [ok, avg] = qos_feasible(UtilityCase::packet_rate, batch, grid, bs, ref, 3e5);
    CHECK(ok);
    CHECK(avg >= 3e5);
}

TEST_CASE("csit utility", "[evaluator]") {
    SECTION("single channel") {
        const ChannelBatch batch = make_batch(1, 4, 1, RngStream(42, 1));
        const double u = csit_utility(UtilityCase::packet_rate, batch, ref);
        CHECK(u == continuous_optimum(UtilityCase::packet_rate, batch.channels[0], ref).u_star);
    }
    SECTION("dominates every decision set") {
        const ChannelBatch batch = make_batch(1, 4, 100, RngStream(43, 1));
        const double csit = csit_utility(UtilityCase::packet_rate, batch, ref);
        RngStream rng(44);
        for (int t = 0; t < 10; ++t) {
            const BeamSet bs = testsup::random_beamset(4, 1 + t, rng);
            const PowerSet grid = uniform_power_grid(3, ref.pmax);
            CHECK(fitness(UtilityCase::packet_rate, batch, grid, bs, ref) <= csit * (1 + 1e-12));
        }
    }
}

TEST_CASE("csit reference is stable across seeds", "[evaluator][slow]") {
    // run-to-run dispersion of the Monte-Carlo CSIT estimate at N = 1e5
    std::vector<double> values;
    for (std::uint64_t seed : {101ULL, 202ULL, 303ULL}) {
        const ChannelBatch batch = make_batch(1, 4, 100000, RngStream(seed, 2));
        values.push_back(csit_utility(UtilityCase::packet_rate, batch, ref));
    }
    const double lo = *std::min_element(values.begin(), values.end());
    const double hi = *std::max_element(values.begin(), values.end());
    CHECK((hi - lo) / hi < 0.005);
}

TEST_CASE("optimality loss arithmetic", "[evaluator]") {
    CHECK(optimality_loss(2.0, 2.0) == 0.0);
    CHECK(optimality_loss(2.0, 0.0) == 100.0);
    CHECK(optimality_loss(2.0, 1.9) == Approx(5.0).epsilon(1e-12));
    CHECK_THROWS_AS(optimality_loss(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(optimality_loss(-1.0, 0.5), std::domain_error);
}

TEST_CASE("loss of any decision set lies in [0, 100]", "[evaluator]") {
    const ChannelBatch batch = make_batch(1, 4, 200, RngStream(45, 1));
    const double csit = csit_utility(UtilityCase::packet_rate, batch, ref);
    RngStream rng(46);
    for (int t = 0; t < 20; ++t) {
        const BeamSet bs = testsup::random_beamset(4, 2, rng);
        const PowerSet grid = uniform_power_grid(1, ref.pmax);
        const double f = fitness(UtilityCase::packet_rate, batch, grid, bs, ref);
        const double loss = optimality_loss(csit, f);
        CHECK(loss >= 0.0);
        CHECK(loss <= 100.0);
    }
}

TEST_CASE("fitness is monotone under codebook refinement", "[evaluator]") {
    const ChannelBatch batch = make_batch(1, 4, 150, RngStream(47, 1));
    RngStream rng(48);
    for (int t = 0; t < 20; ++t) {
        std::vector<BeamVector> vs;
        for (int j = 0; j < 4; ++j) vs.push_back(testsup::random_beam(4, rng));
        const BeamSet small = BeamSet::from_vectors(vs);
        vs.push_back(testsup::random_beam(4, rng));
        const BeamSet large = BeamSet::from_vectors(vs);
        const PowerSet grid = uniform_power_grid(2, ref.pmax);
        for (UtilityCase uc : {UtilityCase::capacity, UtilityCase::packet_rate})
            CHECK(fitness(uc, batch, grid, large, ref) >=
                  fitness(uc, batch, grid, small, ref) * (1 - 1e-12));
    }
}

TEST_CASE("report assembles the evaluator quantities", "[evaluator]") {
    const ChannelBatch batch = make_batch(1, 4, 300, RngStream(49, 1));
    RngStream rng(50);
    const BeamSet bs = testsup::random_beamset(4, 16, rng);
    const PowerSet grid = uniform_power_grid(4, ref.pmax);
    const EvalReport rep = make_report(UtilityCase::packet_rate, batch, grid, bs, ref, 3e5);
    CHECK(rep.avg_utility == fitness(UtilityCase::packet_rate, batch, grid, bs, ref));
    CHECK(rep.csit_utility == csit_utility(UtilityCase::packet_rate, batch, ref));
    CHECK(rep.loss_pct == Approx(optimality_loss(rep.csit_utility, rep.avg_utility)));
    CHECK(rep.feasible == (rep.avg_packet_benefit >= 3e5));
}
