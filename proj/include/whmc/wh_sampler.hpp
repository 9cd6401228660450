#pragma once
/**
 * @file wh_sampler.hpp
 * @brief Samplers for the Wiener-Hopf factors sup_{s <= e(q)} X_s and inf_{s <= e(q)} X_s.
 *
 * For the beta family each factor of the truncated product
 *
 *   (1 + iz / pole_n) / (1 + iz / zeta_n)
 *
 * is the characteristic function of  p_n delta_0 + (1 - p_n) Exp(|zeta_n|)
 * with p_n = zeta_n / pole_n in (0, 1), so a truncated factor is a sum of
 * independent atom-plus-exponential draws. Brownian motion uses a single
 * exponential factor with no atom, which is exact.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "whmc/errors.hpp"
#include "whmc/levy_model.hpp"
#include "whmc/random.hpp"
#include "whmc/roots.hpp"

namespace whmc {

inline constexpr std::size_t kDefaultTruncation = 100;

/// One factor: atom at zero with probability `atom_probability`, otherwise Exp(rate).
struct MixtureFactor {
    double atom_probability;
    double rate;
};

class WhFactorSampler {
public:
    WhFactorSampler(LevyModel model, double q, std::size_t truncation_n, std::optional<RootTable> roots,
                    std::vector<MixtureFactor> sup_mixture, std::vector<MixtureFactor> inf_mixture)
        : model_(std::move(model)),
          q_(q),
          truncation_n_(truncation_n),
          roots_(std::move(roots)),
          sup_(std::move(sup_mixture)),
          inf_(std::move(inf_mixture)) {}

    [[nodiscard]] const LevyModel& model() const noexcept { return model_; }
    [[nodiscard]] double q() const noexcept { return q_; }
    /// Factor count per side; 0 for the (exact) Brownian sampler.
    [[nodiscard]] std::size_t truncation_n() const noexcept { return truncation_n_; }
    [[nodiscard]] const std::optional<RootTable>& roots() const noexcept { return roots_; }
    [[nodiscard]] std::span<const MixtureFactor> sup_mixture() const noexcept { return sup_; }
    [[nodiscard]] std::span<const MixtureFactor> inf_mixture() const noexcept { return inf_; }
    [[nodiscard]] bool exact() const noexcept { return !roots_.has_value(); }

private:
    LevyModel model_;
    double q_;
    std::size_t truncation_n_;
    std::optional<RootTable> roots_;
    std::vector<MixtureFactor> sup_;
    std::vector<MixtureFactor> inf_;
};

/// Rates (theta_sup, theta_inf) of sup ~ Exp(theta_sup) and -inf ~ Exp(theta_inf)
/// for drift mu and volatility s at rate q. The roots of q + mu z - s^2 z^2 / 2
/// are -theta_sup and theta_inf, as for zeta_0^- and zeta_0^+ in the beta family.
inline std::pair<double, double> brownian_wh_rates(const BrownianMotion& bm, double q) {
    const double s2 = bm.volatility * bm.volatility;
    const double disc = std::sqrt(bm.drift * bm.drift + 2.0 * q * s2);
    return {(disc - bm.drift) / s2, (disc + bm.drift) / s2};
}

inline WhFactorSampler build_sampler(const LevyModel& model, double q, std::size_t truncation_n = kDefaultTruncation,
                                     const RootFinderOptions& opt = {}) {
    validate(model);
    if (!(std::isfinite(q) && q > 0.0)) throw ParameterError("build_sampler: q must be > 0");
    if (const auto* bm = std::get_if<BrownianMotion>(&model)) {
        const auto [up, down] = brownian_wh_rates(*bm, q);
        return WhFactorSampler(model, q, 0, std::nullopt, {{0.0, up}}, {{0.0, down}});
    }
    if (truncation_n == 0) throw ParameterError("build_sampler: truncation_n must be >= 1");
    const BetaFamilyParams& p = std::get<BetaFamily>(model).params;
    RootTable roots = find_roots(p, q, truncation_n, opt);
    std::vector<MixtureFactor> sup, inf;
    sup.reserve(truncation_n);
    inf.reserve(truncation_n);
    for (std::size_t j = 0; j < truncation_n; ++j) {
        sup.push_back({roots.zeta_neg[j] / roots.pole_neg[j], -roots.zeta_neg[j]});
        inf.push_back({roots.zeta_pos[j] / roots.pole_pos[j], roots.zeta_pos[j]});
    }
    return WhFactorSampler(model, q, truncation_n, std::move(roots), std::move(sup), std::move(inf));
}

namespace detail {

/// Sum over factors of atom-or-exponential draws, one uniform per factor.
template <class URBG>
inline double sample_mixture_sum(std::span<const MixtureFactor> factors, URBG& rng) {
    double total = 0.0;
    for (const MixtureFactor& f : factors) {
        const double u = uniform01(rng);
        if (u < f.atom_probability) continue;
        // (u - p) / (1 - p) is again uniform on [0, 1)
        const double v = (u - f.atom_probability) / (1.0 - f.atom_probability);
        total += -std::log1p(-v) / f.rate;
    }
    return total;
}

}  // namespace detail

/// Draw of the (truncated) supremum at an independent Exp(q) time; >= 0.
template <class URBG>
inline double sample_sup(const WhFactorSampler& sampler, URBG& rng) {
    return detail::sample_mixture_sum(sampler.sup_mixture(), rng);
}

/// Draw of the (truncated) infimum at an independent Exp(q) time; <= 0.
template <class URBG>
inline double sample_inf(const WhFactorSampler& sampler, URBG& rng) {
    return -detail::sample_mixture_sum(sampler.inf_mixture(), rng);
}

/// Upper bound on the mean squared truncation error, max over the two sides of
/// 3 / (beta_i^2 (alpha_i + N)^2). Zero for the exact Brownian sampler.
inline double truncation_error_bound(const WhFactorSampler& sampler) {
    const auto* beta = std::get_if<BetaFamily>(&sampler.model());
    if (beta == nullptr) return 0.0;
    const BetaFamilyParams& p = beta->params;
    const double n = static_cast<double>(sampler.truncation_n());
    const double inf_side = 3.0 / (p.beta2 * p.beta2 * (p.alpha2 + n) * (p.alpha2 + n));
    const double sup_side = 3.0 / (p.beta1 * p.beta1 * (p.alpha1 + n) * (p.alpha1 + n));
    return std::max(inf_side, sup_side);
}

/// Characteristic function of a finite sum of signed mixture factors.
inline std::complex<double> mixture_characteristic_function(std::span<const MixtureFactor> factors, double sign,
                                                            double z) {
    std::complex<double> phi{1.0, 0.0};
    const std::complex<double> i{0.0, 1.0};
    for (const MixtureFactor& f : factors) {
        phi *= f.atom_probability + (1.0 - f.atom_probability) / (1.0 - i * sign * z / f.rate);
    }
    return phi;
}

/// Exact second moment of the sum of factors [first, last) of one side.
inline double mixture_tail_second_moment(std::span<const MixtureFactor> factors, std::size_t first, std::size_t last) {
    double mean = 0.0, var = 0.0;
    for (std::size_t k = first; k < std::min(last, factors.size()); ++k) {
        const double w = 1.0 - factors[k].atom_probability;
        const double m1 = w / factors[k].rate;
        const double m2 = 2.0 * w / (factors[k].rate * factors[k].rate);
        mean += m1;
        var += m2 - m1 * m1;
    }
    return var + mean * mean;
}

}  // namespace whmc
