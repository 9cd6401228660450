#pragma once
/**
 * @file roots.hpp
 * @brief Zeros of zeta -> q + Psi(i zeta) for the beta family.
 *
 * All zeros are real and simple and interlace with the poles of F:
 *
 *   zeta_0^-  in (-b1 a1, 0),                   zeta_0^+ in (0, a2 b2),
 *   zeta_k^-  in (b1 (k - a1), b1 (k + 1 - a1)),  k <= -1,
 *   zeta_k^+  in (b2 (a2 + k - 1), b2 (a2 + k)),   k >= 1.
 *
 * Each one is located by plain bisection inside its bracket, shrunk away
 * from the poles by a guard band.
 */

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "whmc/errors.hpp"
#include "whmc/levy_model.hpp"

namespace whmc {

struct RootTable {
    double q = 0.0;
    /// zeta_neg[j] = zeta_{-j}^-, j = 0..N-1 (decreasing values).
    std::vector<double> zeta_neg;
    /// zeta_pos[k] = zeta_k^+, k = 0..N-1 (increasing values).
    std::vector<double> zeta_pos;
    /// pole_neg[j] = b1 (-j - a1), the pole directly below zeta_neg[j].
    std::vector<double> pole_neg;
    /// pole_pos[k] = b2 (a2 + k), the pole directly above zeta_pos[k].
    std::vector<double> pole_pos;

    [[nodiscard]] std::size_t size() const noexcept { return zeta_pos.size(); }
};

struct RootFinderOptions {
    double guard_band = 1e-10;  ///< fraction of the bracket width removed at each pole end
    double tolerance = 1e-12;   ///< stop once the bracket is this narrow (relative to max(1, |zeta|))
    int max_iterations = 300;
};

/// Open interval holding zeta_{-j}^- (side = -1) or zeta_k^+ (side = +1).
struct RootBracket {
    double lo;
    double hi;
};

inline RootBracket negative_root_bracket(const BetaFamilyParams& p, std::size_t j) {
    const double k = -static_cast<double>(j);
    if (j == 0) return {-p.beta1 * p.alpha1, 0.0};
    return {p.beta1 * (k - p.alpha1), p.beta1 * (k + 1.0 - p.alpha1)};
}

inline RootBracket positive_root_bracket(const BetaFamilyParams& p, std::size_t k) {
    const double kk = static_cast<double>(k);
    if (k == 0) return {0.0, p.alpha2 * p.beta2};
    return {p.beta2 * (p.alpha2 + kk - 1.0), p.beta2 * (p.alpha2 + kk)};
}

namespace detail {

inline double bisect_root(const BetaFamilyParams& p, double q, double lo, double hi, const RootFinderOptions& opt,
                          const std::string& label) {
    double flo = eval_psi_shifted(p, q, lo);
    const double fhi = eval_psi_shifted(p, q, hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw NumericalError("find_roots: no sign change in bracket for " + label +
                             " (guard band too wide or tolerance too tight)");
    for (int it = 0; it < opt.max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fmid = eval_psi_shifted(p, q, mid);
        if (fmid == 0.0) return mid;
        if ((fmid > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        // Keep bisecting past the tolerance while representable: the residual
        // certificate |F(zeta)| <= 1e-10 needs more than 1e-12 near steep poles.
        if (hi - lo <= opt.tolerance * 1e-4 * std::max(1.0, std::abs(mid))) break;
    }
    const double f_lo = std::abs(eval_psi_shifted(p, q, lo));
    const double f_hi = std::abs(eval_psi_shifted(p, q, hi));
    return f_lo <= f_hi ? lo : hi;
}

}  // namespace detail

/// First `count` roots on each side of q + Psi(i zeta) = 0.
inline RootTable find_roots(const BetaFamilyParams& p, double q, std::size_t count,
                            const RootFinderOptions& opt = {}) {
    validate(p);
    if (!(std::isfinite(q) && q > 0.0)) throw ParameterError("find_roots: q must be > 0");
    if (count == 0) throw ParameterError("find_roots: count must be >= 1");
    if (p.c1 == 0.0 || p.c2 == 0.0)
        throw ParameterError("find_roots: the pole/root brackets need jumps on both sides (c1, c2 > 0)");

    RootTable table;
    table.q = q;
    table.zeta_neg.reserve(count);
    table.zeta_pos.reserve(count);
    table.pole_neg.reserve(count);
    table.pole_pos.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        const RootBracket b = negative_root_bracket(p, j);
        const double guard = opt.guard_band * (b.hi - b.lo);
        // zeta_0^- has a pole only at the lower end; zeta = 0 is a regular point.
        const double hi = (j == 0) ? b.hi : b.hi - guard;
        table.zeta_neg.push_back(
            detail::bisect_root(p, q, b.lo + guard, hi, opt, "zeta_{-" + std::to_string(j) + "}^-"));
        table.pole_neg.push_back(b.lo);
    }
    for (std::size_t k = 0; k < count; ++k) {
        const RootBracket b = positive_root_bracket(p, k);
        const double guard = opt.guard_band * (b.hi - b.lo);
        const double lo = (k == 0) ? b.lo : b.lo + guard;
        table.zeta_pos.push_back(
            detail::bisect_root(p, q, lo, b.hi - guard, opt, "zeta_{" + std::to_string(k) + "}^+"));
        table.pole_pos.push_back(b.hi);
    }
    return table;
}

inline RootTable find_roots(const LevyModel& model, double q, std::size_t count, const RootFinderOptions& opt = {}) {
    const auto* beta = std::get_if<BetaFamily>(&model);
    if (beta == nullptr) throw ParameterError("find_roots: model must be a beta-family process");
    return find_roots(beta->params, q, count, opt);
}

}  // namespace whmc
