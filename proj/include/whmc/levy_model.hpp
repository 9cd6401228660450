#pragma once
/**
 * @file levy_model.hpp
 * @brief Brownian motion and beta-family Levy models, and the real-line
 *        restriction F(zeta) = q + Psi(i zeta) of the characteristic exponent.
 *
 * Conventions: E[exp(i z X_t)] = exp(-t Psi(z)). For the beta family
 *
 *   Psi(z) = sigma^2 z^2 / 2 + i rho z
 *            - c1/b1 B(a1 - iz/b1, 1 - l1) - c2/b2 B(a2 + iz/b2, 1 - l2) + gamma
 *
 * with gamma and rho fixed by (c_i, a_i, b_i, l_i) and the mean `a`
 * (E[X_1] = a). Along z = i zeta everything is real:
 *
 *   F(zeta) = q - sigma^2 zeta^2 / 2 + a zeta - c1/b1 G1(zeta/b1) - c2/b2 G2(-zeta/b2)
 *   G(x)    = B(alpha + x, d) - B(alpha, d) + x B(alpha, d) (psi(alpha + d) - psi(alpha)),
 *             d = 1 - lambda.
 *
 * G is the second-order remainder of x -> B(alpha + x, d) at 0, so the
 * divergences of B(., d) at d = 0 and d = -1 cancel; those two cases use
 * closed-form limits.
 */

#include <cmath>
#include <numbers>
#include <string>
#include <variant>

#include "whmc/errors.hpp"
#include "whmc/special_functions.hpp"

namespace whmc {

/// Jump density parameters of the beta family plus the Gaussian and mean terms.
/// Side 1 carries the positive jumps, side 2 the negative jumps.
struct BetaFamilyParams {
    double c1 = 1.0, c2 = 1.0;
    double alpha1 = 1.0, alpha2 = 1.0;
    double beta1 = 1.0, beta2 = 1.0;
    double lambda1 = 1.0, lambda2 = 1.0;
    double sigma = 0.0;
    double a = 0.0;  ///< E[X_1]

    friend bool operator==(const BetaFamilyParams&, const BetaFamilyParams&) = default;
};

struct BrownianMotion {
    double drift = 0.0;
    double volatility = 1.0;

    friend bool operator==(const BrownianMotion&, const BrownianMotion&) = default;
};

struct BetaFamily {
    BetaFamilyParams params;

    friend bool operator==(const BetaFamily&, const BetaFamily&) = default;
};

using LevyModel = std::variant<BrownianMotion, BetaFamily>;

/// |1 - lambda| or |2 - lambda| below this switches to the analytic limit branch.
inline constexpr double kLambdaLimitBand = 1e-8;

inline void validate(const BetaFamilyParams& p) {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!positive(p.alpha1) || !positive(p.alpha2)) throw ParameterError("beta family: alpha_i must be > 0");
    if (!positive(p.beta1) || !positive(p.beta2)) throw ParameterError("beta family: beta_i must be > 0");
    if (!nonneg(p.c1) || !nonneg(p.c2)) throw ParameterError("beta family: c_i must be >= 0");
    for (double l : {p.lambda1, p.lambda2}) {
        if (!(std::isfinite(l) && l > 0.0 && l < 3.0)) throw ParameterError("beta family: lambda_i must lie in (0, 3)");
    }
    if (!nonneg(p.sigma)) throw ParameterError("beta family: sigma must be >= 0");
    if (!std::isfinite(p.a)) throw ParameterError("beta family: a must be finite");
    if (p.sigma == 0.0 && p.c1 == 0.0 && p.c2 == 0.0)
        throw ParameterError("beta family: one of sigma, c1, c2 must be > 0");
}

inline void validate(const BrownianMotion& bm) {
    if (!(std::isfinite(bm.volatility) && bm.volatility > 0.0))
        throw ParameterError("brownian motion: volatility must be > 0");
    if (!std::isfinite(bm.drift)) throw ParameterError("brownian motion: drift must be finite");
}

inline void validate(const LevyModel& model) {
    std::visit([](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, BetaFamily>) validate(m.params);
        else validate(m);
    }, model);
}

inline bool is_beta_family(const LevyModel& model) noexcept { return std::holds_alternative<BetaFamily>(model); }

/// Law of -X.
inline LevyModel reflect_model(const LevyModel& model) {
    if (const auto* bm = std::get_if<BrownianMotion>(&model)) return BrownianMotion{-bm->drift, bm->volatility};
    const BetaFamilyParams& p = std::get<BetaFamily>(model).params;
    BetaFamilyParams r = p;
    r.c1 = p.c2;
    r.c2 = p.c1;
    r.alpha1 = p.alpha2;
    r.alpha2 = p.alpha1;
    r.beta1 = p.beta2;
    r.beta2 = p.beta1;
    r.lambda1 = p.lambda2;
    r.lambda2 = p.lambda1;
    r.a = -p.a;
    return BetaFamily{r};
}

/// Levy density pi(x); zero for Brownian motion.
inline double levy_density(const LevyModel& model, double x) {
    if (x == 0.0 || std::isnan(x)) throw DomainError("levy_density: x must be nonzero");
    const auto* beta = std::get_if<BetaFamily>(&model);
    if (beta == nullptr) return 0.0;
    const BetaFamilyParams& p = beta->params;
    if (x > 0.0) {
        if (p.c1 == 0.0) return 0.0;
        return p.c1 * std::exp(-p.alpha1 * p.beta1 * x) / std::pow(-std::expm1(-p.beta1 * x), p.lambda1);
    }
    if (p.c2 == 0.0) return 0.0;
    return p.c2 * std::exp(p.alpha2 * p.beta2 * x) / std::pow(-std::expm1(p.beta2 * x), p.lambda2);
}

namespace detail {

/// B(alpha, d)(psi(alpha + d) - psi(alpha)), continued to d = 0 and d = -1.
inline double beta_slope(double alpha, double lambda) {
    using special::beta;
    using special::digamma;
    using special::trigamma;
    const double d = 1.0 - lambda;
    if (std::abs(d) < kLambdaLimitBand) return trigamma(alpha);
    if (std::abs(d + 1.0) < kLambdaLimitBand)
        throw ParameterError("beta family: linear coefficient diverges at lambda = 2");
    return beta(alpha, d) * (digamma(alpha + d) - digamma(alpha));
}

/// y psi(y + 1) - 1 = y psi(y), finite at y = 0.
inline double y_digamma(double y) { return y * special::digamma(y + 1.0) - 1.0; }

/// d/dy [y psi(y)] = psi(y + 1) + y psi'(y + 1).
inline double y_digamma_derivative(double y) {
    return special::digamma(y + 1.0) + y * special::trigamma(y + 1.0);
}

/// Second-order remainder G(x) of x -> B(alpha + x, 1 - lambda).
inline double beta_remainder(double alpha, double lambda, double x) {
    using special::beta;
    using special::digamma;
    using special::trigamma;
    const double d = 1.0 - lambda;
    if (std::abs(d) < kLambdaLimitBand) {
        return digamma(alpha) - digamma(alpha + x) + x * trigamma(alpha);
    }
    if (std::abs(d + 1.0) < kLambdaLimitBand) {
        const double y0 = alpha - 1.0;
        return y_digamma(y0 + x) - y_digamma(y0) - x * y_digamma_derivative(y0);
    }
    const double b0 = beta(alpha, d);
    return beta(alpha + x, d) - b0 + x * b0 * (digamma(alpha + d) - digamma(alpha));
}

}  // namespace detail

/// The coefficient rho of the linear term i rho z in Psi.
inline double linear_coefficient(const BetaFamilyParams& p) {
    double rho = -p.a;
    if (p.c1 > 0.0) rho += p.c1 / (p.beta1 * p.beta1) * detail::beta_slope(p.alpha1, p.lambda1);
    if (p.c2 > 0.0) rho -= p.c2 / (p.beta2 * p.beta2) * detail::beta_slope(p.alpha2, p.lambda2);
    return rho;
}

/// Same jump structure with `a` chosen so that rho = 0 ("driftless" pure jump
/// form Psi(z) = int (1 - e^{izx}) pi(x) dx when the variation is bounded).
inline BetaFamilyParams with_zero_linear_term(BetaFamilyParams p) {
    p.a = 0.0;
    p.a = linear_coefficient(p);
    return p;
}

/// c_i = beta_i = lambda_i = 1, alpha1 = 1, alpha2 = 2, sigma = 0, rho = 0.
inline BetaFamilyParams rate_study_params() {
    BetaFamilyParams p;
    p.alpha1 = 1.0;
    p.alpha2 = 2.0;
    return with_zero_linear_term(p);
}

/// Relative distance (in units of the Beta argument) below which zeta counts as a pole.
inline constexpr double kPoleGuard = 1e-13;

/// F(zeta) = q + Psi(i zeta) for the beta family.
inline double eval_psi_shifted(const BetaFamilyParams& p, double q, double zeta) {
    if (!std::isfinite(zeta)) throw DomainError("eval_psi_shifted: zeta must be finite");
    double f = q - 0.5 * p.sigma * p.sigma * zeta * zeta + p.a * zeta;
    auto near_pole = [](double arg) {
        if (arg > 0.5) return false;
        return std::abs(arg - std::round(arg)) <= kPoleGuard * std::max(1.0, std::abs(arg));
    };
    if (p.c1 > 0.0) {
        const double x = zeta / p.beta1;
        if (near_pole(p.alpha1 + x)) throw DomainError("eval_psi_shifted: zeta at a negative-side pole");
        f -= p.c1 / p.beta1 * detail::beta_remainder(p.alpha1, p.lambda1, x);
    }
    if (p.c2 > 0.0) {
        const double x = -zeta / p.beta2;
        if (near_pole(p.alpha2 + x)) throw DomainError("eval_psi_shifted: zeta at a positive-side pole");
        f -= p.c2 / p.beta2 * detail::beta_remainder(p.alpha2, p.lambda2, x);
    }
    return f;
}

inline double eval_psi_shifted(const LevyModel& model, double q, double zeta) {
    if (const auto* beta = std::get_if<BetaFamily>(&model)) {
        validate(beta->params);
        return eval_psi_shifted(beta->params, q, zeta);
    }
    const auto& bm = std::get<BrownianMotion>(model);
    return q + bm.drift * zeta - 0.5 * bm.volatility * bm.volatility * zeta * zeta;
}

}  // namespace whmc
