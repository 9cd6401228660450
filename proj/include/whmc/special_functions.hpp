#pragma once
/**
 * @file special_functions.hpp
 * @brief Gamma, Beta, digamma and trigamma on the whole real line.
 *
 * The Beta terms of the beta-family exponent are evaluated at negative,
 * non-integer arguments (the second argument lies in (-2, 1)), so every
 * function here accepts negative inputs and tracks the sign of Gamma
 * separately from its log-magnitude.
 *
 * - log_gamma: Lanczos (g = 7, 9 terms) for x >= 1/2, reflection below.
 * - digamma / trigamma: reflection for x < 1/2, upward recurrence to
 *   x >= 10, then the asymptotic series.
 */

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "whmc/errors.hpp"

namespace whmc::special {

/// |value| = exp(log_abs), sign in {-1, 0, +1}.
struct SignedLog {
    double log_abs;
    int sign;

    [[nodiscard]] double value() const noexcept {
        return sign == 0 ? 0.0 : sign * std::exp(log_abs);
    }
};

/// sin(pi x) with exact zeros at the integers.
inline double sin_pi(double x) noexcept {
    const double r = x - std::round(x);
    const double s = std::sin(std::numbers::pi * r);
    const long long k = static_cast<long long>(std::round(x));
    return (k % 2 == 0) ? s : -s;
}

/// True when x is 0, -1, -2, ...
inline bool is_nonpositive_integer(double x) noexcept {
    return x <= 0.0 && x == std::round(x);
}

namespace detail {

inline double lanczos_log_gamma(double x) noexcept {
    // x >= 1/2
    static constexpr std::array<double, 9> coef = {
        0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,   12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    constexpr double g = 7.0;
    const double z = x - 1.0;
    double a = coef[0];
    const double tt = z + g + 0.5;
    for (int i = 1; i < 9; ++i) a += coef[i] / (z + i);
    return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(tt) - tt + std::log(a);
}

}  // namespace detail

/// log|Gamma(x)| and sign(Gamma(x)). Throws DomainError at the poles.
inline SignedLog log_gamma(double x) {
    if (std::isnan(x)) throw DomainError("log_gamma: NaN argument");
    if (is_nonpositive_integer(x)) throw DomainError("log_gamma: pole at non-positive integer");
    if (x >= 0.5) return {detail::lanczos_log_gamma(x), 1};
    // Gamma(x) Gamma(1-x) = pi / sin(pi x)
    const double s = sin_pi(x);
    return {std::log(std::numbers::pi) - std::log(std::abs(s)) - detail::lanczos_log_gamma(1.0 - x),
            s > 0.0 ? 1 : -1};
}

/// log|1/Gamma(x)| and its sign; finite everywhere, sign 0 at the poles of Gamma.
inline SignedLog log_reciprocal_gamma(double x) {
    if (std::isnan(x)) throw DomainError("log_reciprocal_gamma: NaN argument");
    if (x >= 0.5) return {-detail::lanczos_log_gamma(x), 1};
    const double s = sin_pi(x);
    if (s == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
    return {std::log(std::abs(s)) + detail::lanczos_log_gamma(1.0 - x) - std::log(std::numbers::pi),
            s > 0.0 ? 1 : -1};
}

inline double gamma(double x) { return log_gamma(x).value(); }

/// B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b) for any a, b off the poles of Gamma.
/// Returns 0 when a + b is a pole of Gamma.
inline double beta(double a, double b) {
    const SignedLog ga = log_gamma(a);
    const SignedLog gb = log_gamma(b);
    const SignedLog rab = log_reciprocal_gamma(a + b);
    if (rab.sign == 0) return 0.0;
    return ga.sign * gb.sign * rab.sign * std::exp(ga.log_abs + gb.log_abs + rab.log_abs);
}

inline double digamma(double x) {
    if (std::isnan(x)) throw DomainError("digamma: NaN argument");
    if (is_nonpositive_integer(x)) throw DomainError("digamma: pole at non-positive integer");
    if (x < 0.5) {
        // psi(1 - x) - psi(x) = pi cot(pi x)
        const double r = x - std::round(x);
        return digamma(1.0 - x) - std::numbers::pi / std::tan(std::numbers::pi * r);
    }
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // Bernoulli terms B_{2k} / (2k)
    const double series =
        inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132)))));
    return acc + std::log(x) - 0.5 * inv - series;
}

inline double trigamma(double x) {
    if (std::isnan(x)) throw DomainError("trigamma: NaN argument");
    if (is_nonpositive_integer(x)) throw DomainError("trigamma: pole at non-positive integer");
    if (x < 0.5) {
        // psi'(1 - x) + psi'(x) = pi^2 / sin^2(pi x)
        const double s = sin_pi(x);
        return std::numbers::pi * std::numbers::pi / (s * s) - trigamma(1.0 - x);
    }
    double acc = 0.0;
    while (x < 10.0) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double series =
        inv * inv2 * (1.0 / 6 - inv2 * (1.0 / 30 - inv2 * (1.0 / 42 - inv2 * (1.0 / 30 - inv2 * (5.0 / 66)))));
    return acc + inv + 0.5 * inv2 + series;
}

}  // namespace whmc::special
