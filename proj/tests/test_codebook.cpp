// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "dsopt/codebook.hpp"
#include "test_support.hpp"

using namespace dsopt;
using Catch::Approx;

namespace {
const EeConstants ref{};
}

TEST_CASE("uniform power grid construction", "[codebook]") {
    CHECK(uniform_power_grid(1, 1.0).levels == std::vector<double>{0.0, 1.0});

    const PowerSet g2 = uniform_power_grid(2, 1.0);
    REQUIRE(g2.size() == 4);
    CHECK(g2.levels[0] == 0.0);
    CHECK(g2.levels[1] == Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(g2.levels[2] == Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(g2.levels[3] == 1.0);

    const PowerSet g5 = uniform_power_grid(5, 1.0);
    double min_gap = 1e300, max_gap = 0.0;
    for (std::size_t i = 1; i < g5.size(); ++i) {
        const double gap = g5.levels[i] - g5.levels[i - 1];
        min_gap = std::min(min_gap, gap);
        max_gap = std::max(max_gap, gap);
    }
    CHECK(max_gap - min_gap < 1e-12);

    CHECK(uniform_power_grid(0, 2.5).levels == std::vector<double>{2.5});
    CHECK_THROWS_AS(uniform_power_grid(-1, 1.0), std::invalid_argument);
}

TEST_CASE("select_beam picks the dominant gain", "[codebook]") {
    RngStream rng(21);

    SECTION("the true dominant vector wins") {
        for (int t = 0; t < 20; ++t) {
            RngStream r = rng.substream(t);
            const ChannelMatrix h = sample_channel(1, 4, r);
            const DominantPair dom = dominant_right_pair(h);
            std::vector<BeamVector> vs;
            const std::size_t winner = r.next_below(8);
            for (std::size_t j = 0; j < 8; ++j)
                vs.push_back(j == winner ? dom.v : testsup::random_beam(4, r));
            const BeamChoice choice = select_beam(h, BeamSet::from_vectors(vs));
            CHECK(choice.index == winner);
            CHECK(choice.gain == Approx(dom.lambda_max).epsilon(1e-12));
        }
    }
    SECTION("singleton codebook") {
        RngStream r = rng.substream(999);
        const ChannelMatrix h = sample_channel(2, 3, r);
        const BeamSet bs = testsup::random_beamset(3, 1, r);
        CHECK(select_beam(h, bs).index == 0);
    }
    SECTION("achieved gain is invariant to column order") {
        RngStream r = rng.substream(1234);
        const ChannelMatrix h = sample_channel(2, 4, r);
        BeamSet bs = testsup::random_beamset(4, 8, r);
        const double g1 = select_beam(h, bs).gain;
        std::vector<BeamVector> reversed;
        for (std::size_t j = bs.size(); j-- > 0;) reversed.push_back(bs.vector(j));
        const double g2 = select_beam(h, BeamSet::from_vectors(reversed)).gain;
        CHECK(g1 == g2);
    }
}

TEST_CASE("decision rules match an independent exhaustive oracle", "[codebook]") {
    RngStream rng(22);
    for (int t = 0; t < 1000; ++t) {
        RngStream r = rng.substream(t);
        const std::size_t nt = 2 + r.next_below(3);
        const std::size_t nr = 1 + r.next_below(2);
        const ChannelMatrix h = sample_channel(nr, nt, r);
        const BeamSet beams = testsup::random_beamset(nt, std::size_t{1} << r.next_below(4), r);
        const PowerSet powers = uniform_power_grid(static_cast<int>(r.next_below(4)), ref.pmax);
        const UtilityCase uc =
            r.next_below(2) == 0 ? UtilityCase::capacity : UtilityCase::packet_rate;

        const auto [oracle_beam, oracle_gain] = testsup::naive_select_beam(h, beams);
        const BeamChoice choice = select_beam(h, beams);
        CHECK(choice.index == oracle_beam);
        CHECK(choice.gain == Approx(oracle_gain).epsilon(1e-12));

        const Decision expect = testsup::naive_select_power(uc, h, beams, powers, ref);
        CHECK(select_power(uc, h, beams, powers, ref) == expect);
    }
}

TEST_CASE("select_power basics", "[codebook]") {
    RngStream rng(23);
    SECTION("zero versus the continuous optimum") {
        const ChannelMatrix h = [&] {
            RngStream r = rng.substream(0);
            return sample_channel(1, 4, r);
        }();
        const DominantPair dom = dominant_right_pair(h);
        const BeamSet bs = BeamSet::from_vectors({dom.v});
        const double p_star = optimal_power_case2(dom.lambda_max, ref);
        PowerSet two;
        two.levels = {0.0, p_star};
        const Decision d = select_power(UtilityCase::packet_rate, h, bs, two, ref);
        CHECK(d.power_index == 1);
    }
    SECTION("zero gain ties break to the lowest power") {
        ChannelMatrix h(1, 2); // all-zero channel: every power yields utility 0
        const BeamSet bs = [&] {
            RngStream r = rng.substream(1);
            return testsup::random_beamset(2, 2, r);
        }();
        const PowerSet grid = uniform_power_grid(2, ref.pmax);
        const Decision d = select_power(UtilityCase::packet_rate, h, bs, grid, ref);
        CHECK(d.power_index == 0);
        CHECK(d.beam_index == 0);
    }
    SECTION("dense grid approaches the continuous optimum") {
        for (int t = 0; t < 100; ++t) {
            RngStream r = rng.substream(100 + t);
            const ChannelMatrix h = sample_channel(1, 4, r);
            const DominantPair dom = dominant_right_pair(h);
            const BeamSet bs = BeamSet::from_vectors({dom.v});
            const PowerSet grid = uniform_power_grid(12, ref.pmax);
            const double step = ref.pmax / static_cast<double>(grid.size() - 1);
            const Decision d = select_power(UtilityCase::packet_rate, h, bs, grid, ref);
            const double p_star = optimal_power_case2(dom.lambda_max, ref);
            CHECK(std::abs(grid.levels[d.power_index] - p_star) <= step * (1 + 1e-9));
        }
    }
}

TEST_CASE("refining the power grid never lowers achieved utility", "[codebook]") {
    RngStream rng(24);
    for (int t = 0; t < 50; ++t) {
        RngStream r = rng.substream(t);
        const ChannelMatrix h = sample_channel(1, 4, r);
        const BeamSet bs = testsup::random_beamset(4, 4, r);
        const PowerSet coarse = uniform_power_grid(2, ref.pmax);
        PowerSet fine = coarse;
        fine.levels.insert(fine.levels.begin() + 1, 0.5 * (coarse.levels[0] + coarse.levels[1]));
        // 5 levels is not a power of two, which is fine for this check
        const UtilityCase uc =
            t % 2 == 0 ? UtilityCase::capacity : UtilityCase::packet_rate;
        const Decision dc = select_power(uc, h, bs, coarse, ref);
        const Decision df = select_power(uc, h, bs, fine, ref);
        const double g = select_beam(h, bs).gain;
        CHECK(utility(uc, fine.levels[df.power_index], g, ref) >=
              utility(uc, coarse.levels[dc.power_index], g, ref));
    }
}

TEST_CASE("achieved utility never exceeds the continuous optimum", "[codebook]") {
    RngStream rng(25);
    for (int t = 0; t < 100; ++t) {
        RngStream r = rng.substream(t);
        const ChannelMatrix h = sample_channel(1, 4, r);
        const BeamSet bs = testsup::random_beamset(4, 4, r);
        const PowerSet grid = uniform_power_grid(3, ref.pmax);
        for (UtilityCase uc : {UtilityCase::capacity, UtilityCase::packet_rate}) {
            const Decision d = select_power(uc, h, bs, grid, ref);
            const double g = select_beam(h, bs).gain;
            const double u = utility(uc, grid.levels[d.power_index], g, ref);
            CHECK(u <= continuous_optimum(uc, h, ref).u_star * (1 + 1e-12));
        }
    }
}

TEST_CASE("feedback budget is enforced at construction", "[codebook]") {
    RngStream rng(26);
    const BeamSet beams = testsup::random_beamset(4, 4, rng); // b2 = 2
    const PowerSet powers = uniform_power_grid(4, 1.0);       // b1 = 4

    const FeedbackBudget ok{4, 2, 800, 0.01}; // budget 8 bits
    CHECK_NOTHROW(make_decision_set(powers, beams, ok));

    const FeedbackBudget tight{4, 2, 500, 0.01}; // budget 5 bits
    CHECK_FALSE(tight.allows(4, 2));
    CHECK_THROWS_AS(make_decision_set(powers, beams, tight), ConfigError);
}

TEST_CASE("codebook JSON round-trips bit-exactly", "[codebook]") {
    RngStream rng(27);
    const auto path = std::filesystem::temp_directory_path() / "dsopt_test_codebook.json";
    for (int t = 0; t < 5; ++t) {
        RngStream r = rng.substream(t);
        const std::size_t nt = 2 + r.next_below(3);
        const BeamSet beams = testsup::random_beamset(nt, std::size_t{1} << (1 + r.next_below(3)), r);
        const PowerSet powers = uniform_power_grid(1 + static_cast<int>(r.next_below(4)), 1.0);
        save_codebook_json(path.string(), powers, beams);
        const DecisionSet loaded = load_codebook_json(path.string());
        CHECK(loaded.powers.levels == powers.levels);
        CHECK(loaded.beams == beams);
    }
    std::filesystem::remove(path);
}

TEST_CASE("beam sets validate their invariants", "[codebook]") {
    BeamSet bs(2, 2);
    bs.column(0)[0] = cxd{1, 0};
    bs.column(1)[0] = cxd{0.5, 0}; // not unit norm
    CHECK_THROWS_AS(bs.validate_unit_columns(), std::invalid_argument);
    bs.column(1)[0] = cxd{0, 1};
    CHECK_NOTHROW(bs.validate_unit_columns());

    PowerSet bad;
    bad.levels = {0.0, 0.5, 0.25, 1.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    PowerSet not_pow2;
    not_pow2.levels = {0.0, 0.5, 1.0};
    CHECK_THROWS_AS(not_pow2.validate(), std::invalid_argument);
}
