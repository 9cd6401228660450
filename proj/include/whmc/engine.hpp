#pragma once
/**
 * @file engine.hpp
 * @brief The (V, J) Wiener-Hopf random walk on the stochastic grid and the
 *        first-passage 4-tuple read off it.
 *
 * With S_i ~ sup X on [0, e(lambda)] and I_i ~ inf X on [0, e(lambda)], all
 * independent,
 *
 *   V_0 = J_0 = 0,   V_i = V_{i-1} + S_i + I_i,   J_i = max(J_{i-1}, V_{i-1} + S_i)
 *
 * has the law of (X, sup X) sampled at the arrival times of a rate-lambda
 * Poisson process. Taking lambda = n / t, kappa = min{k : J_k > u} gives the
 * 4-tuple approximation
 *
 *   ( (t/n)(kappa ^ n), V_{kappa ^ n} - u, u - V_{(kappa-1) ^ n}, u - J_{(kappa-1) ^ n} ).
 *
 * Grid times never enter the walk; `generate_grid_times` exists for diagnostics.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "whmc/errors.hpp"
#include "whmc/random.hpp"
#include "whmc/wh_sampler.hpp"

namespace whmc {

struct GridSpec {
    std::size_t n = 1;  ///< steps
    double t = 1.0;     ///< horizon

    [[nodiscard]] double lambda() const noexcept { return static_cast<double>(n) / t; }
    [[nodiscard]] double step() const noexcept { return t / static_cast<double>(n); }
};

/// Materialized walk; v[k] = V_k, j[k] = J_k for k = 0..n.
struct WhPath {
    std::vector<double> v{0.0};
    std::vector<double> j{0.0};

    [[nodiscard]] std::size_t steps() const noexcept { return v.size() - 1; }
};

struct FourTuple {
    double time = 0.0;        ///< (t/n)(kappa ^ n)
    double overshoot = 0.0;   ///< V_{kappa ^ n} - u
    double undershoot = 0.0;  ///< u - V_{(kappa-1) ^ n}
    double gap_to_max = 0.0;  ///< u - J_{(kappa-1) ^ n}
    bool crossed = false;     ///< kappa <= n

    friend bool operator==(const FourTuple&, const FourTuple&) = default;
};

/// Running state of the walk; one `advance` per grid step.
struct WalkState {
    double v = 0.0;
    double j = 0.0;
    std::size_t k = 0;

    void advance(double sup_increment, double inf_increment) noexcept {
        j = std::max(j, v + sup_increment);
        v = v + sup_increment + inf_increment;
        ++k;
    }
};

inline void check_rate(const WhFactorSampler& sampler, const GridSpec& grid) {
    if (grid.n == 0 || !(grid.t > 0.0)) throw ParameterError("grid: need n >= 1 and t > 0");
    const double lambda = grid.lambda();
    if (std::abs(sampler.q() - lambda) > 1e-12 * lambda)
        throw ContractError("sampler rate q = " + std::to_string(sampler.q()) + " does not match grid rate n/t = " +
                            std::to_string(lambda));
}

/// Walk built from given increments (S_1..S_n, I_1..I_n).
inline WhPath accumulate_wh_path(std::span<const double> sup_increments, std::span<const double> inf_increments) {
    if (sup_increments.size() != inf_increments.size())
        throw ParameterError("accumulate_wh_path: S and I must have equal length");
    WhPath path;
    path.v.reserve(sup_increments.size() + 1);
    path.j.reserve(sup_increments.size() + 1);
    WalkState state;
    for (std::size_t i = 0; i < sup_increments.size(); ++i) {
        state.advance(sup_increments[i], inf_increments[i]);
        path.v.push_back(state.v);
        path.j.push_back(state.j);
    }
    return path;
}

/// n-step walk; draws S_i then I_i for each step (exactly 2n draws from the sampler).
template <class URBG>
inline WhPath simulate_wh_path(const WhFactorSampler& sampler, const GridSpec& grid, URBG& rng) {
    check_rate(sampler, grid);
    WhPath path;
    path.v.reserve(grid.n + 1);
    path.j.reserve(grid.n + 1);
    WalkState state;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double s = sample_sup(sampler, rng);
        const double in = sample_inf(sampler, rng);
        state.advance(s, in);
        path.v.push_back(state.v);
        path.j.push_back(state.j);
    }
    return path;
}

/// Tuple from the walk state at the first strict exceedance (or at step n).
inline FourTuple make_tuple(const WalkState& before, const WalkState& at, const GridSpec& grid, double u,
                            bool crossed) {
    FourTuple out;
    out.time = crossed ? grid.step() * static_cast<double>(at.k) : grid.t;
    out.overshoot = at.v - u;
    out.undershoot = u - before.v;
    out.gap_to_max = u - before.j;
    out.crossed = crossed;
    return out;
}

inline FourTuple first_passage_tuple(const WhPath& path, const GridSpec& grid, double u) {
    if (!(u > 0.0)) throw DomainError("first_passage_tuple: barrier u must be > 0");
    if (path.steps() != grid.n) throw ParameterError("first_passage_tuple: path length does not match grid.n");
    const std::size_t n = grid.n;
    std::size_t kappa = n + 1;
    for (std::size_t k = 0; k <= n; ++k) {
        if (path.j[k] > u) {
            kappa = k;
            break;
        }
    }
    const bool crossed = kappa <= n;
    const std::size_t at = crossed ? kappa : n;
    const std::size_t before = crossed ? kappa - 1 : n;
    return make_tuple(WalkState{path.v[before], path.j[before], before}, WalkState{path.v[at], path.j[at], at}, grid,
                      u, crossed);
}

/// (V_n, J_n), the approximation of (X_t, sup_{s <= t} X_s).
inline std::pair<double, double> terminal_pair(const WhPath& path) { return {path.v.back(), path.j.back()}; }

/// Streaming form of simulate_wh_path + first_passage_tuple; stops drawing once J exceeds u.
template <class URBG>
inline FourTuple simulate_first_passage(const WhFactorSampler& sampler, const GridSpec& grid, double u, URBG& rng) {
    if (!(u > 0.0)) throw DomainError("simulate_first_passage: barrier u must be > 0");
    check_rate(sampler, grid);
    WalkState state;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const WalkState before = state;
        const double s = sample_sup(sampler, rng);
        const double in = sample_inf(sampler, rng);
        state.advance(s, in);
        if (state.j > u) return make_tuple(before, state, grid, u, true);
    }
    return make_tuple(state, state, grid, u, false);
}

/// Streaming (V_n, J_n).
template <class URBG>
inline std::pair<double, double> simulate_terminal(const WhFactorSampler& sampler, const GridSpec& grid, URBG& rng) {
    check_rate(sampler, grid);
    WalkState state;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double s = sample_sup(sampler, rng);
        const double in = sample_inf(sampler, rng);
        state.advance(s, in);
    }
    return {state.v, state.j};
}

/// Grid points g(0..n): g(0) = 0, spacings i.i.d. Exp(n/t).
template <class URBG>
inline std::vector<double> generate_grid_times(const GridSpec& grid, URBG& rng) {
    std::vector<double> g{0.0};
    if (grid.n == 0) return g;
    g.reserve(grid.n + 1);
    const double rate = grid.lambda();
    for (std::size_t i = 0; i < grid.n; ++i) g.push_back(g.back() + exponential(rng, rate));
    return g;
}

/// First grid point strictly past x minus x, for a rate-`rate` Poisson grid.
template <class URBG>
inline double grid_overshoot(double x, double rate, URBG& rng) {
    double g = 0.0;
    while (g <= x) g += exponential(rng, rate);
    return g - x;
}

}  // namespace whmc
