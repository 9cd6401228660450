#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "support/stats.hpp"
#include "whmc/coupling.hpp"
#include "whmc/engine.hpp"

using namespace whmc;

namespace {

std::vector<FineStep> random_tape(Rng& rng, std::size_t length, double boundary_probability) {
    std::vector<FineStep> tape;
    for (std::size_t i = 0; i < length; ++i)
        tape.push_back({exponential(rng, 2.0), -exponential(rng, 1.5), uniform01(rng) < boundary_probability});
    return tape;
}

WhPath fine_path(const std::vector<FineStep>& tape, std::size_t steps) {
    std::vector<double> s, in;
    for (std::size_t i = 0; i < steps; ++i) {
        s.push_back(tape[i].sup_increment);
        in.push_back(tape[i].inf_increment);
    }
    return accumulate_wh_path(s, in);
}

}  // namespace

TEST(Coupling, AllMarksGiveBlockSizeOne) {
    Rng rng(4);
    const std::size_t n = 16;
    const auto tape = random_tape(rng, n, 1.1);
    const CoupledOutcome out = coupled_pair_from_steps(tape, 0.8, 2.0, n);
    const WhPath first_half = fine_path(tape, n / 2);
    EXPECT_EQ(out.coarse, first_passage_tuple(first_half, GridSpec{n / 2, 2.0}, 0.8));
    EXPECT_EQ(out.coarse_terminal, terminal_pair(first_half));
    EXPECT_EQ(out.fine, first_passage_tuple(fine_path(tape, n), GridSpec{n, 2.0}, 0.8));
}

TEST(Coupling, TapeReplayEqualsThinnedWalk) {
    Rng rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 * (1 + rng() % 20);
        auto tape = random_tape(rng, 8 * n, 0.5);
        std::vector<bool> marks;
        std::size_t blocks = 0, needed = 0;
        for (const auto& s : tape) {
            marks.push_back(s.boundary);
            ++needed;
            if (s.boundary && ++blocks == n / 2) break;
        }
        if (blocks < n / 2) continue;
        needed = std::max(needed, n);
        tape.resize(needed);
        marks.resize(needed);
        const double u = 0.5 + uniform01(rng);
        const CoupledOutcome out = coupled_pair_from_steps(tape, u, 1.0, n);
        const WhPath full = fine_path(tape, tape.size());
        const WhPath coarse = thin_walk(full, marks, n / 2);
        ASSERT_EQ(coarse.steps(), n / 2);
        EXPECT_EQ(out.coarse, first_passage_tuple(coarse, GridSpec{n / 2, 1.0}, u));
        EXPECT_EQ(out.fine, first_passage_tuple(fine_path(tape, n), GridSpec{n, 1.0}, u));
        EXPECT_EQ(out.fine_terminal, terminal_pair(fine_path(tape, n)));
    }
}

TEST(Coupling, ExhaustedTapeIsAnError) {
    Rng rng(1);
    const auto tape = random_tape(rng, 3, 0.0);
    EXPECT_THROW(coupled_pair_from_steps(tape, 100.0, 1.0, 4), ParameterError);
    EXPECT_THROW(coupled_pair_from_steps(tape, 1.0, 1.0, 3), ParameterError);
}

TEST(Coupling, CoarseMarginalMatchesIndependentRun) {
    const std::size_t n_coarse = 16;
    const double t = 1.0, u = 0.5;
    const LevyModel model = BetaFamily{rate_study_params()};
    const WhFactorSampler fine = build_sampler(model, 2.0 * n_coarse / t, 40);
    const WhFactorSampler coarse = build_sampler(model, n_coarse / t, 40);
    Rng a(100), b(200);
    std::vector<double> coupled, independent;
    for (int i = 0; i < 5000; ++i) {
        coupled.push_back(coupled_pair_sample(fine, u, t, 2 * n_coarse, a).coarse.time);
        independent.push_back(simulate_first_passage(coarse, GridSpec{n_coarse, t}, u, b).time);
    }
    EXPECT_GT(whmc::testing::ks_two_sample(coupled, independent).p_value, 0.01);
}

TEST(Coupling, CoupledDifferencesAreSmall) {
    const std::size_t n = 1024;
    const double t = 1.0, u = 1.0;
    const WhFactorSampler s = build_sampler(BrownianMotion{}, n / t);
    Rng rng(77);
    std::vector<double> sq, fine_times;
    for (int i = 0; i < 4000; ++i) {
        const CoupledOutcome c = coupled_pair_sample(s, u, t, n, rng);
        sq.push_back((c.fine.time - c.coarse.time) * (c.fine.time - c.coarse.time));
        fine_times.push_back(c.fine.time);
    }
    const auto mse = whmc::testing::mean_se(sq);
    const auto m = whmc::testing::mean_se(fine_times);
    const double var = m.se * m.se * static_cast<double>(fine_times.size());
    EXPECT_LT(mse.mean * 4.0, 2.0 * var);
}

TEST(Coupling, StopAfterCrossingDoesNotChangeTuples) {
    const WhFactorSampler s = build_sampler(BrownianMotion{}, 32.0);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng a(seed), b(seed);
        CouplingOptions keep;
        keep.stop_after_crossing = false;
        const CoupledOutcome stop = coupled_pair_sample(s, 0.6, 1.0, 32, a);
        const CoupledOutcome full = coupled_pair_sample(s, 0.6, 1.0, 32, b, keep);
        EXPECT_EQ(stop.fine, full.fine);
        EXPECT_EQ(stop.coarse, full.coarse);
        EXPECT_LE(stop.fine_steps, full.fine_steps);
    }
}
