#pragma once
/**
 * @file baselines.hpp
 * @brief Brownian first-passage references: the analytic cdf, the plain
 *        Gaussian random walk, and the Wiener-Hopf walk with exact factors.
 *
 * For standard Brownian motion P(tau_u <= s) = erfc(u / sqrt(2 s))
 * = 2 (1 - Phi(u / sqrt(s))). Its Laplace transform is exp(-u sqrt(2q)),
 * matching sup_{s <= e(q)} X_s ~ Exp(sqrt(2q)).
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "whmc/engine.hpp"
#include "whmc/errors.hpp"
#include "whmc/estimators.hpp"
#include "whmc/levy_model.hpp"
#include "whmc/random.hpp"
#include "whmc/wh_sampler.hpp"

namespace whmc {

struct CdfMeta {
    double u = 0.0;
    std::string method;  ///< "analytic", "plain" or "whmc"
    double step = 0.0;   ///< h for plain, n for whmc, 0 for analytic
    std::size_t samples = 0;
};

struct CdfTable {
    std::vector<double> grid;
    std::vector<double> values;
    CdfMeta meta;
};

inline double bm_fptime_cdf(double u, double s) {
    if (!(u > 0.0) || !(s > 0.0)) throw DomainError("bm_fptime_cdf: u and s must be > 0");
    return std::erfc(u / std::sqrt(2.0 * s));
}

inline void validate_time_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw ParameterError("cdf: time grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw ParameterError("cdf: grid points must be > 0");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw ParameterError("cdf: grid must be strictly ascending");
    }
}

/// {k step : k = 1..count}
inline std::vector<double> uniform_time_grid(double step, std::size_t count) {
    std::vector<double> g;
    g.reserve(count);
    for (std::size_t k = 1; k <= count; ++k) g.push_back(step * static_cast<double>(k));
    return g;
}

inline CdfTable bm_analytic_cdf_table(double u, const std::vector<double>& grid) {
    validate_time_grid(grid);
    CdfTable table{grid, {}, {u, "analytic", 0.0, 0}};
    for (double s : grid) table.values.push_back(bm_fptime_cdf(u, s));
    return table;
}

/// Crossing times of the crossed paths; the rest count as mass beyond the horizon.
struct CrossingTimes {
    std::vector<double> times;
    std::uint64_t paths = 0;

    void merge(const CrossingTimes& o) {
        times.insert(times.end(), o.times.begin(), o.times.end());
        paths += o.paths;
    }
};

inline CdfTable empirical_cdf(CrossingTimes crossings, const std::vector<double>& grid, CdfMeta meta) {
    std::sort(crossings.times.begin(), crossings.times.end());
    CdfTable table{grid, {}, std::move(meta)};
    const double m = static_cast<double>(crossings.paths);
    for (double s : grid) {
        const auto count = std::upper_bound(crossings.times.begin(), crossings.times.end(), s) - crossings.times.begin();
        table.values.push_back(static_cast<double>(count) / m);
    }
    return table;
}

/// Gaussian random walk with step h on [0, t]; kappa = first k with max_{i <= k} V_i > u.
template <class URBG>
inline FourTuple simulate_plain_first_passage(const BrownianMotion& bm, double u, double t, double h, URBG& rng) {
    if (!(u > 0.0)) throw DomainError("plain walk: barrier u must be > 0");
    if (!(h > 0.0) || !(t > 0.0)) throw ParameterError("plain walk: need h > 0 and t > 0");
    const auto steps = static_cast<std::size_t>(std::floor(t / h * (1.0 + 1e-12)));
    std::normal_distribution<double> normal(bm.drift * h, bm.volatility * std::sqrt(h));
    WalkState state;
    for (std::size_t k = 0; k < steps; ++k) {
        const WalkState before = state;
        const double x = normal(rng);
        state.v += x;
        state.j = std::max(state.j, state.v);
        ++state.k;
        if (state.j > u) {
            FourTuple out;
            out.time = h * static_cast<double>(state.k);
            out.overshoot = state.v - u;
            out.undershoot = u - before.v;
            out.gap_to_max = u - before.j;
            out.crossed = true;
            return out;
        }
    }
    return FourTuple{t, state.v - u, u - state.v, u - state.j, false};
}

/// Empirical cdf of the plain-walk first passage time; M paths at step h.
inline CdfTable bm_plain_mc_fptime_cdf(double u, double t, double h, std::size_t samples,
                                       const std::vector<double>& grid, const Execution& exec) {
    validate_time_grid(grid);
    if (samples == 0) throw ParameterError("plain cdf: need M >= 1");
    const BrownianMotion bm{};
    CrossingTimes crossings = run_sharded<CrossingTimes>(samples, exec.workers, exec.seed,
                                                         [&](Rng& rng, std::size_t, std::size_t count) {
                                                             CrossingTimes c;
                                                             c.paths = count;
                                                             for (std::size_t i = 0; i < count; ++i) {
                                                                 const FourTuple tup = simulate_plain_first_passage(
                                                                     bm, u, t, h, rng);
                                                                 if (tup.crossed) c.times.push_back(tup.time);
                                                             }
                                                             return c;
                                                         });
    return empirical_cdf(std::move(crossings), grid, CdfMeta{u, "plain", h, samples});
}

/// Empirical cdf of the Wiener-Hopf walk first passage time, n steps of mean t/n.
inline CdfTable whmc_bm_fptime_cdf(double u, double t, std::size_t n, std::size_t samples,
                                   const std::vector<double>& grid, const Execution& exec) {
    validate_time_grid(grid);
    if (samples == 0) throw ParameterError("whmc cdf: need M >= 1");
    const GridSpec spec{n, t};
    const WhFactorSampler sampler = build_sampler(BrownianMotion{}, spec.lambda());
    CrossingTimes crossings = run_sharded<CrossingTimes>(samples, exec.workers, exec.seed,
                                                         [&](Rng& rng, std::size_t, std::size_t count) {
                                                             CrossingTimes c;
                                                             c.paths = count;
                                                             for (std::size_t i = 0; i < count; ++i) {
                                                                 const FourTuple tup =
                                                                     simulate_first_passage(sampler, spec, u, rng);
                                                                 if (tup.crossed) c.times.push_back(tup.time);
                                                             }
                                                             return c;
                                                         });
    return empirical_cdf(std::move(crossings), grid, CdfMeta{u, "whmc", static_cast<double>(n), samples});
}

/// max_s |table(s) - bm_fptime_cdf(u, s)| over the table grid.
inline double sup_norm_error(const CdfTable& table, double u) {
    double worst = 0.0;
    for (std::size_t i = 0; i < table.grid.size(); ++i)
        worst = std::max(worst, std::abs(table.values[i] - bm_fptime_cdf(u, table.grid[i])));
    return worst;
}

}  // namespace whmc
