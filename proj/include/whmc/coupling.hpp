#pragma once
/**
 * @file coupling.hpp
 * @brief Law-exact coupling of the n- and n/2-step walks by geometric thinning.
 *
 * The fine walk runs at rate 2 lambda_c = n_fine / t. After every fine step
 * an independent fair coin marks a coarse boundary. A coarse block is then a
 * Geometric(1/2) number of Exp(2 lambda_c) spacings, i.e. an Exp(lambda_c)
 * spacing, and the fine (V, J) at the block end is exactly
 * (X, sup X) after that spacing. So the coarse walk is the fine walk read at
 * the marked steps, and each marginal is the plain single-level walk law.
 *
 * Per fine step the stream is consumed as: S draw, I draw, one uniform for
 * the mark.
 */

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "whmc/engine.hpp"
#include "whmc/errors.hpp"
#include "whmc/random.hpp"
#include "whmc/wh_sampler.hpp"

namespace whmc {

struct CoupledOutcome {
    FourTuple fine;
    FourTuple coarse;
    std::pair<double, double> fine_terminal{0.0, 0.0};    ///< (V, J) after n_fine steps
    std::pair<double, double> coarse_terminal{0.0, 0.0};  ///< (V, J) after n_coarse blocks
    std::size_t fine_steps = 0;                            ///< fine steps actually simulated
};

struct CouplingOptions {
    /// Stop as soon as both tuples are known. Terminal pairs are then undefined.
    bool stop_after_crossing = true;
    /// Probability that a fine step closes a coarse block. 1/2 is the law-exact value;
    /// other values only make sense for diagnostics.
    double boundary_probability = 0.5;
};

struct FineStep {
    double sup_increment;
    double inf_increment;
    bool boundary;
};

namespace detail {

/// Drives the fine and thinned coarse walks from a step source until both are done.
template <class Source>
inline CoupledOutcome run_coupled(Source&& next_step, std::size_t n_fine, double t, double u,
                                  bool stop_after_crossing) {
    if (n_fine < 2 || n_fine % 2 != 0) throw ParameterError("coupled pair: n_fine must be even and >= 2");
    if (!(u > 0.0)) throw DomainError("coupled pair: barrier u must be > 0");
    const std::size_t n_coarse = n_fine / 2;
    const GridSpec fine_grid{n_fine, t};
    const GridSpec coarse_grid{n_coarse, t};

    CoupledOutcome out;
    WalkState fine, coarse;
    bool fine_done = false, coarse_done = false;
    bool fine_crossed = false, coarse_crossed = false;
    while (!(fine_done && coarse_done)) {
        const std::optional<FineStep> step = next_step();
        if (!step) throw ParameterError("coupled pair: step source exhausted");
        const WalkState fine_before = fine;
        fine.advance(step->sup_increment, step->inf_increment);
        ++out.fine_steps;
        if (!fine_done) {
            if (!fine_crossed && fine.j > u) {
                out.fine = make_tuple(fine_before, fine, fine_grid, u, true);
                fine_crossed = true;
                if (stop_after_crossing) fine_done = true;
            }
            if (fine.k == n_fine) {
                if (!fine_crossed) out.fine = make_tuple(fine, fine, fine_grid, u, false);
                out.fine_terminal = {fine.v, fine.j};
                fine_done = true;
            }
        }
        if (!coarse_done && step->boundary) {
            const WalkState coarse_before = coarse;
            coarse = WalkState{fine.v, fine.j, coarse.k + 1};
            if (!coarse_crossed && coarse.j > u) {
                out.coarse = make_tuple(coarse_before, coarse, coarse_grid, u, true);
                coarse_crossed = true;
                if (stop_after_crossing) coarse_done = true;
            }
            if (coarse.k == n_coarse) {
                if (!coarse_crossed) out.coarse = make_tuple(coarse, coarse, coarse_grid, u, false);
                out.coarse_terminal = {coarse.v, coarse.j};
                coarse_done = true;
            }
        }
    }
    return out;
}

}  // namespace detail

/// One coupled (fine, coarse) draw; `sampler` must be built at rate n_fine / t.
template <class URBG>
inline CoupledOutcome coupled_pair_sample(const WhFactorSampler& sampler, double u, double t, std::size_t n_fine,
                                          URBG& rng, const CouplingOptions& opt = {}) {
    check_rate(sampler, GridSpec{n_fine, t});
    auto source = [&]() -> std::optional<FineStep> {
        const double s = sample_sup(sampler, rng);
        const double in = sample_inf(sampler, rng);
        const bool boundary = uniform01(rng) < opt.boundary_probability;
        return FineStep{s, in, boundary};
    };
    return detail::run_coupled(source, n_fine, t, u, opt.stop_after_crossing);
}

/// Coupled draw from a pre-recorded tape of fine steps.
inline CoupledOutcome coupled_pair_from_steps(std::span<const FineStep> steps, double u, double t,
                                              std::size_t n_fine, bool stop_after_crossing = false) {
    std::size_t next = 0;
    auto source = [&]() -> std::optional<FineStep> {
        if (next >= steps.size()) return std::nullopt;
        return steps[next++];
    };
    return detail::run_coupled(source, n_fine, t, u, stop_after_crossing);
}

/// Coarse walk obtained by reading `fine` at the marked steps; marks[i] refers to fine step i + 1.
inline WhPath thin_walk(const WhPath& fine, const std::vector<bool>& marks, std::size_t max_blocks) {
    if (marks.size() < fine.steps()) throw ParameterError("thin_walk: need one mark per fine step");
    WhPath coarse;
    for (std::size_t i = 1; i <= fine.steps() && coarse.steps() < max_blocks; ++i) {
        if (marks[i - 1]) {
            coarse.v.push_back(fine.v[i]);
            coarse.j.push_back(fine.j[i]);
        }
    }
    return coarse;
}

}  // namespace whmc
