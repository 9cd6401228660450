#pragma once
/**
 * @file estimators.hpp
 * @brief Plain and multilevel Monte Carlo over the Wiener-Hopf walk.
 *
 * Multilevel estimator, with n_l = 2^l n_0:
 *
 *   E[f^{n_L}] = E[f^{n_0}] + sum_{l=1..L} E[f^{n_l} - f^{n_{l-1}}],
 *
 * each term estimated by its own plain average, the correction terms from
 * coupled (fine, coarse) draws (see coupling.hpp).
 *
 * Trials are sharded over `workers` threads. Worker w of a run seeded with
 * s draws from stream substream_seed(s, w); level l of a multilevel run uses
 * substream_seed(substream_seed(s, l), w). Per-worker statistics are merged
 * in worker order, so (seed, workers) fixes the result bit for bit.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "whmc/coupling.hpp"
#include "whmc/engine.hpp"
#include "whmc/errors.hpp"
#include "whmc/random.hpp"
#include "whmc/wh_sampler.hpp"

namespace whmc {

// ---------------------------------------------------------------------------
// Functionals
// ---------------------------------------------------------------------------

/// f = (t/n)(kappa ^ n)
struct FirstPassageTime {};
/// f = 1{crossed, time <= s}
struct IndicatorCdf {
    double s;
};
/// f = exp(-q time) 1{overshoot <= y} on crossed paths, 0 otherwise.
struct DiscountedOvershootIndicator {
    double q;
    double y;
};
/// f = payoff(V_n, J_n); must be bounded.
struct TerminalPayoff {
    std::function<double(double, double)> payoff;
};
/// f = map(tuple); must be bounded.
struct TupleMap {
    std::function<double(const FourTuple&)> map;
};

using Functional = std::variant<FirstPassageTime, IndicatorCdf, DiscountedOvershootIndicator, TerminalPayoff, TupleMap>;

inline bool needs_terminal(const Functional& f) noexcept { return std::holds_alternative<TerminalPayoff>(f); }

/// exp(-q time) 1{overshoot <= y} if crossed, else 0 (the tail past the horizon is dropped).
inline double gerber_shiu_value(const FourTuple& tuple, double q, double y) {
    if (!(q > 0.0) || !(y > 0.0)) throw DomainError("gerber_shiu_value: q and y must be > 0");
    if (!tuple.crossed) return 0.0;
    return tuple.overshoot <= y ? std::exp(-q * tuple.time) : 0.0;
}

inline double evaluate(const Functional& f, const FourTuple& tuple, std::pair<double, double> terminal) {
    struct Visitor {
        const FourTuple& tuple;
        std::pair<double, double> terminal;
        double operator()(const FirstPassageTime&) const { return tuple.time; }
        double operator()(const IndicatorCdf& c) const { return (tuple.crossed && tuple.time <= c.s) ? 1.0 : 0.0; }
        double operator()(const DiscountedOvershootIndicator& d) const { return gerber_shiu_value(tuple, d.q, d.y); }
        double operator()(const TerminalPayoff& p) const { return p.payoff(terminal.first, terminal.second); }
        double operator()(const TupleMap& m) const { return m.map(tuple); }
    };
    return std::visit(Visitor{tuple, terminal}, f);
}

// ---------------------------------------------------------------------------
// Statistics and sharding
// ---------------------------------------------------------------------------

/// Welford accumulator; `merge` is Chan's pairwise update.
struct RunningStats {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const RunningStats& other) noexcept {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double n1 = static_cast<double>(count), n2 = static_cast<double>(other.count);
        const double delta = other.mean - mean;
        const double total = n1 + n2;
        mean += delta * n2 / total;
        m2 += other.m2 + delta * delta * n1 * n2 / total;
        count += other.count;
    }

    /// Unbiased sample variance; NaN below two samples.
    [[nodiscard]] double variance() const noexcept {
        return count < 2 ? std::nan("") : m2 / static_cast<double>(count - 1);
    }
};

struct Execution {
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

/// Runs body(rng, first_trial, count) -> Acc on each worker and merges in worker order.
template <class Acc, class Body>
inline Acc run_sharded(std::size_t total, unsigned workers, std::uint64_t stream_parent, Body body) {
    workers = std::max(1u, workers);
    std::vector<Acc> partial(workers);
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t base = total / workers, rem = total % workers;
    auto work = [&](unsigned w) {
        const std::size_t first = w * base + std::min<std::size_t>(w, rem);
        const std::size_t count = base + (w < rem ? 1 : 0);
        try {
            Rng rng = make_stream(stream_parent, w);
            partial[w] = body(rng, first, count);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    Acc merged{};
    for (const Acc& p : partial) merged.merge(p);
    return merged;
}

// ---------------------------------------------------------------------------
// Reports and schedules
// ---------------------------------------------------------------------------

struct LevelSummary {
    std::size_t level = 0;
    std::size_t n_fine = 0;
    std::size_t samples = 0;
    double mean = 0.0;
    double variance = 0.0;
    double cost_per_sample = 0.0;
};

struct EstimateReport {
    double value = 0.0;
    double std_error = 0.0;
    std::pair<double, double> ci95{0.0, 0.0};
    std::vector<std::size_t> samples;
    std::uint64_t steps_consumed = 0;
    std::uint64_t pilot_steps = 0;  ///< multilevel pilot runs, not included in steps_consumed
    std::vector<LevelSummary> levels;
};

inline void set_value(EstimateReport& r, double value, double estimator_variance) {
    r.value = value;
    r.std_error = std::sqrt(std::max(0.0, estimator_variance));
    r.ci95 = {value - 1.96 * r.std_error, value + 1.96 * r.std_error};
}

struct LevelSchedule {
    std::size_t n0 = 1;
    std::size_t levels = 0;            ///< L; levels 0..L
    std::vector<std::size_t> samples;  ///< M_0..M_L

    [[nodiscard]] std::size_t n_at(std::size_t level) const noexcept { return n0 << level; }
};

inline void validate(const LevelSchedule& s) {
    if (s.n0 == 0) throw ParameterError("schedule: n0 must be >= 1");
    if (s.samples.size() != s.levels + 1) throw ParameterError("schedule: need one sample count per level");
    for (std::size_t m : s.samples)
        if (m == 0) throw ParameterError("schedule: every M_l must be >= 1");
}

/// Walk steps charged per sample: n_0 at level 0, n_l + n_{l-1} above.
inline double level_cost(std::size_t n0, std::size_t level) {
    const double n = static_cast<double>(n0 << level);
    return level == 0 ? n : 1.5 * n;
}

// ---------------------------------------------------------------------------
// Plain Monte Carlo
// ---------------------------------------------------------------------------

namespace detail {

inline void check_finite(double value, std::size_t trial) {
    if (!std::isfinite(value))
        throw DataError("functional returned a non-finite value at trial " + std::to_string(trial));
}

template <class URBG>
inline double single_level_sample(const WhFactorSampler& sampler, const Functional& f, double u,
                                  const GridSpec& grid, URBG& rng) {
    if (needs_terminal(f)) {
        const auto terminal = simulate_terminal(sampler, grid, rng);
        return evaluate(f, FourTuple{}, terminal);
    }
    return evaluate(f, simulate_first_passage(sampler, grid, u, rng), {0.0, 0.0});
}

template <class URBG>
inline double coupled_difference(const WhFactorSampler& fine_sampler, const Functional& f, double u, double t,
                                 std::size_t n_fine, URBG& rng) {
    CouplingOptions opt;
    opt.stop_after_crossing = !needs_terminal(f);
    const CoupledOutcome c = coupled_pair_sample(fine_sampler, u, t, n_fine, rng, opt);
    return evaluate(f, c.fine, c.fine_terminal) - evaluate(f, c.coarse, c.coarse_terminal);
}

inline void check_barrier(const Functional& f, double u) {
    if (!needs_terminal(f) && !(u > 0.0)) throw DomainError("barrier u must be > 0");
}

}  // namespace detail

/// Accumulates `count` single-level trials from one stream.
template <class URBG>
inline RunningStats mc_accumulate(const WhFactorSampler& sampler, const Functional& f, double u,
                                  const GridSpec& grid, std::size_t count, URBG& rng, std::size_t first_trial = 0) {
    RunningStats stats;
    for (std::size_t i = 0; i < count; ++i) {
        const double x = detail::single_level_sample(sampler, f, u, grid, rng);
        detail::check_finite(x, first_trial + i);
        stats.add(x);
    }
    return stats;
}

inline EstimateReport report_from_stats(const RunningStats& stats, std::size_t n) {
    EstimateReport r;
    const double var = stats.count > 1 ? stats.variance() : 0.0;
    set_value(r, stats.mean, var / static_cast<double>(stats.count));
    r.samples = {static_cast<std::size_t>(stats.count)};
    r.steps_consumed = stats.count * n;
    r.levels = {LevelSummary{0, n, static_cast<std::size_t>(stats.count), stats.mean, var, static_cast<double>(n)}};
    return r;
}

/// Plain estimate of E[f] with M trials of the n-step walk, single stream.
template <class URBG>
inline EstimateReport mc_estimate(const WhFactorSampler& sampler, const Functional& f, double u,
                                  const GridSpec& grid, std::size_t samples, URBG& rng) {
    if (samples < 2) throw ParameterError("mc_estimate: need M >= 2");
    detail::check_barrier(f, u);
    check_rate(sampler, grid);
    return report_from_stats(mc_accumulate(sampler, f, u, grid, samples, rng), grid.n);
}

/// Plain estimate sharded over exec.workers streams.
inline EstimateReport mc_estimate(const WhFactorSampler& sampler, const Functional& f, double u,
                                  const GridSpec& grid, std::size_t samples, const Execution& exec) {
    if (samples < 2) throw ParameterError("mc_estimate: need M >= 2");
    detail::check_barrier(f, u);
    check_rate(sampler, grid);
    const RunningStats stats = run_sharded<RunningStats>(
        samples, exec.workers, exec.seed,
        [&](Rng& rng, std::size_t first, std::size_t count) {
            return mc_accumulate(sampler, f, u, grid, count, rng, first);
        });
    return report_from_stats(stats, grid.n);
}

inline EstimateReport mc_estimate(const LevyModel& model, const Functional& f, double u, const GridSpec& grid,
                                  std::size_t samples, const Execution& exec,
                                  std::size_t truncation_n = kDefaultTruncation) {
    return mc_estimate(build_sampler(model, grid.lambda(), truncation_n), f, u, grid, samples, exec);
}

// ---------------------------------------------------------------------------
// Multilevel Monte Carlo
// ---------------------------------------------------------------------------

/// Samplers for levels 0..L (level l at rate n_l / t).
inline std::vector<WhFactorSampler> build_level_samplers(const LevyModel& model, std::size_t n0, std::size_t levels,
                                                         double t, std::size_t truncation_n) {
    std::vector<WhFactorSampler> out;
    out.reserve(levels + 1);
    for (std::size_t l = 0; l <= levels; ++l)
        out.push_back(build_sampler(model, static_cast<double>(n0 << l) / t, truncation_n));
    return out;
}

/// M draws of the level-l summand (f^{n_0} at l = 0, coupled difference above).
inline RunningStats run_level(const WhFactorSampler& sampler, const Functional& f, double u, double t,
                              std::size_t n0, std::size_t level, std::size_t samples, unsigned workers,
                              std::uint64_t stream_parent) {
    const std::size_t n = n0 << level;
    return run_sharded<RunningStats>(samples, workers, stream_parent,
                                     [&](Rng& rng, std::size_t first, std::size_t count) {
                                         RunningStats s;
                                         const GridSpec grid{n, t};
                                         for (std::size_t i = 0; i < count; ++i) {
                                             const double x =
                                                 level == 0 ? detail::single_level_sample(sampler, f, u, grid, rng)
                                                            : detail::coupled_difference(sampler, f, u, t, n, rng);
                                             detail::check_finite(x, first + i);
                                             s.add(x);
                                         }
                                         return s;
                                     });
}

/// Combines per-level statistics into the telescoping estimate.
inline EstimateReport combine_levels(std::span<const RunningStats> stats, std::size_t n0) {
    EstimateReport r;
    double value = 0.0, var = 0.0;
    for (std::size_t l = 0; l < stats.size(); ++l) {
        const RunningStats& s = stats[l];
        const double v = s.count > 1 ? s.variance() : 0.0;
        value += s.mean;
        var += v / static_cast<double>(s.count);
        const double cost = level_cost(n0, l);
        r.samples.push_back(static_cast<std::size_t>(s.count));
        r.steps_consumed += static_cast<std::uint64_t>(cost * static_cast<double>(s.count));
        r.levels.push_back(LevelSummary{l, n0 << l, static_cast<std::size_t>(s.count), s.mean, v, cost});
    }
    set_value(r, value, var);
    return r;
}

inline EstimateReport mlmc_estimate(const LevyModel& model, const Functional& f, double u, double t,
                                    const LevelSchedule& schedule, const Execution& exec,
                                    std::size_t truncation_n = kDefaultTruncation) {
    validate(schedule);
    detail::check_barrier(f, u);
    if (!(t > 0.0)) throw ParameterError("mlmc_estimate: t must be > 0");
    const auto samplers = build_level_samplers(model, schedule.n0, schedule.levels, t, truncation_n);
    std::vector<RunningStats> stats;
    for (std::size_t l = 0; l <= schedule.levels; ++l) {
        stats.push_back(run_level(samplers[l], f, u, t, schedule.n0, l, schedule.samples[l], exec.workers,
                                  substream_seed(exec.seed, l)));
    }
    return combine_levels(stats, schedule.n0);
}

inline constexpr double kVarianceFloor = 1e-12;

/// Optimal allocation M_l = ceil(sum_k sqrt(V_k C_k) sqrt(V_l / C_l) / eps^2).
/// With `level_means`, L is the first level >= 1 whose |mean correction| < eps / sqrt(2).
/// Sample counts are made non-increasing in l by raising earlier levels.
inline LevelSchedule mlmc_plan(std::span<const double> level_variances, std::span<const double> level_costs,
                               double target_stderr, std::size_t n0 = 1,
                               std::span<const double> level_means = {}) {
    if (level_variances.empty() || level_variances.size() != level_costs.size())
        throw ParameterError("mlmc_plan: need matching, non-empty variance and cost arrays");
    if (!(target_stderr > 0.0)) throw ParameterError("mlmc_plan: target_stderr must be > 0");
    std::size_t last = level_variances.size() - 1;
    if (!level_means.empty()) {
        if (level_means.size() != level_variances.size())
            throw ParameterError("mlmc_plan: need one mean per level");
        for (std::size_t l = 1; l < level_means.size(); ++l) {
            if (std::abs(level_means[l]) < target_stderr / std::sqrt(2.0)) {
                last = l;
                break;
            }
        }
    }
    std::vector<double> v(level_variances.begin(), level_variances.begin() + last + 1);
    for (double& x : v)
        if (!(x > kVarianceFloor)) x = kVarianceFloor;
    double total = 0.0;
    for (std::size_t l = 0; l <= last; ++l) {
        if (!(level_costs[l] > 0.0)) throw ParameterError("mlmc_plan: costs must be > 0");
        total += std::sqrt(v[l] * level_costs[l]);
    }
    LevelSchedule s;
    s.n0 = n0;
    s.levels = last;
    const double eps2 = target_stderr * target_stderr;
    for (std::size_t l = 0; l <= last; ++l) {
        const double m = std::ceil(total * std::sqrt(v[l] / level_costs[l]) / eps2);
        s.samples.push_back(static_cast<std::size_t>(std::max(1.0, m)));
    }
    for (std::size_t l = last; l-- > 0;) s.samples[l] = std::max(s.samples[l], s.samples[l + 1]);
    return s;
}

/// Pilot run on levels 0..max_level with `pilot_samples` draws each.
inline std::vector<LevelSummary> mlmc_pilot(const LevyModel& model, const Functional& f, double u, double t,
                                            std::size_t n0, std::size_t max_level, std::size_t pilot_samples,
                                            const Execution& exec, std::size_t truncation_n = kDefaultTruncation) {
    detail::check_barrier(f, u);
    const auto samplers = build_level_samplers(model, n0, max_level, t, truncation_n);
    const std::uint64_t pilot_parent = substream_seed(exec.seed, 0xFFFFFFFFULL);
    std::vector<LevelSummary> out;
    for (std::size_t l = 0; l <= max_level; ++l) {
        const RunningStats s =
            run_level(samplers[l], f, u, t, n0, l, pilot_samples, exec.workers, substream_seed(pilot_parent, l));
        out.push_back(LevelSummary{l, n0 << l, static_cast<std::size_t>(s.count), s.mean, s.variance(),
                                   level_cost(n0, l)});
    }
    return out;
}

struct MlmcRunOptions {
    std::size_t n0 = 16;
    std::size_t max_level = 6;
    std::size_t pilot_samples = 1000;
    bool bias_stopping = true;  ///< choose L from the pilot mean corrections
    std::size_t truncation_n = kDefaultTruncation;
};

/// Pilot, plan, then estimate to the target standard error.
inline EstimateReport mlmc_run(const LevyModel& model, const Functional& f, double u, double t,
                               double target_stderr, const Execution& exec, const MlmcRunOptions& opt = {}) {
    const auto pilot = mlmc_pilot(model, f, u, t, opt.n0, opt.max_level, opt.pilot_samples, exec, opt.truncation_n);
    std::vector<double> vars, costs, means;
    std::uint64_t pilot_steps = 0;
    for (const auto& p : pilot) {
        vars.push_back(p.variance);
        costs.push_back(p.cost_per_sample);
        means.push_back(p.mean);
        pilot_steps += static_cast<std::uint64_t>(p.cost_per_sample * static_cast<double>(p.samples));
    }
    const LevelSchedule schedule =
        mlmc_plan(vars, costs, target_stderr, opt.n0, opt.bias_stopping ? std::span<const double>(means) : std::span<const double>{});
    EstimateReport r = mlmc_estimate(model, f, u, t, schedule, exec, opt.truncation_n);
    r.pilot_steps = pilot_steps;
    return r;
}

// ---------------------------------------------------------------------------
// Consecutive-level convergence study
// ---------------------------------------------------------------------------

inline constexpr std::size_t kTupleCoordinates = 4;

/// 0: time, 1: overshoot, 2: undershoot, 3: gap to the pre-passage maximum.
inline double coordinate(const FourTuple& t, std::size_t c) {
    switch (c) {
        case 0: return t.time;
        case 1: return t.overshoot;
        case 2: return t.undershoot;
        default: return t.gap_to_max;
    }
}

struct LevelMseRow {
    std::size_t level = 0;
    std::size_t n_fine = 0;
    std::size_t samples = 0;
    std::array<double, kTupleCoordinates> mse{};         ///< E[(coord^{n_l} - coord^{n_{l-1}})^2]
    std::array<double, kTupleCoordinates> mse_stderr{};  ///< NaN when samples < 2
    bool variance_defined = false;
};

struct TupleMseAccumulator {
    std::array<RunningStats, kTupleCoordinates> stats{};
    void merge(const TupleMseAccumulator& o) {
        for (std::size_t c = 0; c < kTupleCoordinates; ++c) stats[c].merge(o.stats[c]);
    }
};

/// Consecutive-level mean squared differences of the four tuple coordinates,
/// n_l = n0 2^l for l in [level_lo, level_hi] (level_lo >= 1), M coupled draws per level.
inline std::vector<LevelMseRow> level_mse_study(const LevyModel& model, double u, double t, std::size_t level_lo,
                                                std::size_t level_hi, std::size_t samples, const Execution& exec,
                                                std::size_t truncation_n = kDefaultTruncation, std::size_t n0 = 1) {
    if (level_lo < 1 || level_hi < level_lo) throw ParameterError("level_mse_study: need 1 <= level_lo <= level_hi");
    if (samples == 0) throw ParameterError("level_mse_study: need M >= 1");
    if (!(u > 0.0)) throw DomainError("level_mse_study: barrier u must be > 0");
    std::vector<LevelMseRow> rows;
    for (std::size_t l = level_lo; l <= level_hi; ++l) {
        const std::size_t n = n0 << l;
        const WhFactorSampler sampler = build_sampler(model, static_cast<double>(n) / t, truncation_n);
        const TupleMseAccumulator acc = run_sharded<TupleMseAccumulator>(
            samples, exec.workers, substream_seed(exec.seed, l), [&](Rng& rng, std::size_t, std::size_t count) {
                TupleMseAccumulator a;
                for (std::size_t i = 0; i < count; ++i) {
                    const CoupledOutcome c = coupled_pair_sample(sampler, u, t, n, rng);
                    for (std::size_t k = 0; k < kTupleCoordinates; ++k) {
                        const double d = coordinate(c.fine, k) - coordinate(c.coarse, k);
                        a.stats[k].add(d * d);
                    }
                }
                return a;
            });
        LevelMseRow row;
        row.level = l;
        row.n_fine = n;
        row.samples = samples;
        row.variance_defined = samples >= 2;
        for (std::size_t k = 0; k < kTupleCoordinates; ++k) {
            row.mse[k] = acc.stats[k].mean;
            row.mse_stderr[k] = row.variance_defined
                                    ? std::sqrt(acc.stats[k].variance() / static_cast<double>(samples))
                                    : std::nan("");
        }
        rows.push_back(row);
    }
    return rows;
}

/// Least-squares slope of log2(y) against log2(x); empty with fewer than two
/// points or any non-positive value.
inline std::optional<double> fit_log2_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
        const double lx = std::log2(x[i]), ly = std::log2(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return std::nullopt;
    return (n * sxy - sx * sy) / den;
}

/// Slope per coordinate over the rows of a level study.
inline std::array<std::optional<double>, kTupleCoordinates> fit_study_slopes(std::span<const LevelMseRow> rows) {
    std::array<std::optional<double>, kTupleCoordinates> out{};
    std::vector<double> n;
    for (const auto& r : rows) n.push_back(static_cast<double>(r.n_fine));
    for (std::size_t k = 0; k < kTupleCoordinates; ++k) {
        std::vector<double> y;
        for (const auto& r : rows) y.push_back(r.mse[k]);
        out[k] = fit_log2_slope(n, y);
    }
    return out;
}

}  // namespace whmc
