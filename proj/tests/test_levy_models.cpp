#include <gtest/gtest.h>

#include <cmath>

#include "whmc/errors.hpp"
#include "whmc/levy_model.hpp"
#include "whmc/roots.hpp"

using namespace whmc;

namespace {

BetaFamilyParams gaussian_only() {
    BetaFamilyParams p;
    p.c1 = p.c2 = 0.0;
    p.sigma = 1.0;
    return p;
}

// Quadrature of int (1 - e^{-zeta x} - zeta x 1{|x| < 1}) pi(x) dx, the jump part of
// Psi(i zeta) with a unit-interval compensator. It differs from the closed form
// only by a linear term.
double jump_integral(const BetaFamilyParams& p, double zeta) {
    auto integrand = [&](double x) {
        const double pi = levy_density(BetaFamily{p}, x);
        const double comp = std::abs(x) < 1.0 ? zeta * x : 0.0;
        return -(std::expm1(-zeta * x) + comp) * pi;
    };
    // Simpson on a log-spaced substitution x = +-e^s for each half line.
    double total = 0.0;
    for (int side : {1, -1}) {
        const double lo = -25.0, hi = 4.0;
        const int m = 40000;
        const double h = (hi - lo) / m;
        double acc = 0.0;
        for (int i = 0; i <= m; ++i) {
            const double s = lo + i * h;
            const double x = side * std::exp(s);
            const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += w * integrand(x) * std::exp(s);
        }
        total += acc * h / 3.0;
    }
    return total;
}

}  // namespace

TEST(LevyModels, PureGaussianRootIsSqrtTwoQ) {
    const BetaFamilyParams p = gaussian_only();
    for (double q : {0.5, 2.0, 8.0}) {
        EXPECT_NEAR(eval_psi_shifted(p, q, std::sqrt(2.0 * q)), 0.0, 1e-12);
        EXPECT_NEAR(eval_psi_shifted(p, q, 0.7), q - 0.245, 1e-14);
    }
}

TEST(LevyModels, BetaFamilyChangesSignOnPrincipalPositiveBracket) {
    const BetaFamilyParams p = rate_study_params();
    const double eps = 1e-6;
    const double left = eval_psi_shifted(p, 1.0, eps);
    const double right = eval_psi_shifted(p, 1.0, 2.0 - eps);
    EXPECT_GT(left, 0.0);
    EXPECT_LT(right, 0.0);
}

TEST(LevyModels, RateStudyParamsHaveUnitDrift) {
    const BetaFamilyParams p = rate_study_params();
    EXPECT_EQ(p.c1, 1.0);
    EXPECT_EQ(p.alpha1, 1.0);
    EXPECT_EQ(p.alpha2, 2.0);
    EXPECT_EQ(p.sigma, 0.0);
    // psi'(1) - psi'(2) = 1
    EXPECT_NEAR(p.a, 1.0, 1e-12);
    EXPECT_NEAR(linear_coefficient(p), 0.0, 1e-14);
}

TEST(LevyModels, LambdaOneLimitIsBracketedByNeighbours) {
    BetaFamilyParams p = rate_study_params();
    p.a = 0.3;
    for (double zeta : {-0.6, 0.4, 1.3, 2.7}) {
        p.lambda1 = 1.0;
        const double mid = eval_psi_shifted(p, 1.0, zeta);
        p.lambda1 = 1.0 - 1e-6;
        const double lo = eval_psi_shifted(p, 1.0, zeta);
        p.lambda1 = 1.0 + 1e-6;
        const double hi = eval_psi_shifted(p, 1.0, zeta);
        EXPECT_NEAR(mid, 0.5 * (lo + hi), 1e-4 * std::max(1.0, std::abs(mid))) << zeta;
        EXPECT_LE(std::min(lo, hi) - 1e-9, mid);
        EXPECT_GE(std::max(lo, hi) + 1e-9, mid);
    }
}

TEST(LevyModels, LambdaTwoLimitIsBracketedByNeighbours) {
    BetaFamilyParams p = rate_study_params();
    p.lambda2 = 2.0;
    p.a = 0.0;
    for (double zeta : {-0.6, 0.4, 1.3}) {
        p.lambda2 = 2.0;
        const double mid = eval_psi_shifted(p, 1.0, zeta);
        p.lambda2 = 2.0 - 1e-6;
        const double lo = eval_psi_shifted(p, 1.0, zeta);
        p.lambda2 = 2.0 + 1e-6;
        const double hi = eval_psi_shifted(p, 1.0, zeta);
        EXPECT_NEAR(mid, 0.5 * (lo + hi), 1e-4 * std::max(1.0, std::abs(mid))) << zeta;
    }
}

TEST(LevyModels, ClosedFormMatchesQuadratureUpToLinearTerm) {
    // F(zeta) - q + sigma^2 zeta^2 / 2 equals the jump integral plus b zeta for some b;
    // eliminate b using two points and compare the third.
    BetaFamilyParams p = rate_study_params();
    p.lambda1 = 1.5;
    p.lambda2 = 0.5;
    p.alpha1 = 1.5;
    auto diff = [&](double z) { return (eval_psi_shifted(p, 1.0, z) - 1.0) - jump_integral(p, z); };
    const double b = diff(0.5) / 0.5;
    for (double z : {-0.8, 0.25, 1.2}) EXPECT_NEAR(diff(z), b * z, 2e-7) << z;
}

TEST(LevyModels, DensityValues) {
    const LevyModel m = BetaFamily{rate_study_params()};
    EXPECT_NEAR(levy_density(m, 1.0), std::exp(-1.0) / (1.0 - std::exp(-1.0)), 1e-15);
    EXPECT_NEAR(levy_density(m, -1.0), std::exp(-2.0) / (1.0 - std::exp(-1.0)), 1e-15);
    BetaFamilyParams p = rate_study_params();
    p.c2 = 0.0;
    EXPECT_EQ(levy_density(BetaFamily{p}, -0.5), 0.0);
    EXPECT_EQ(levy_density(BrownianMotion{}, 0.3), 0.0);
    EXPECT_THROW(levy_density(m, 0.0), DomainError);
}

TEST(LevyModels, ReflectionMirrorsDensity) {
    BetaFamilyParams p;
    p.c1 = 0.7;
    p.c2 = 1.3;
    p.alpha1 = 1.2;
    p.alpha2 = 2.6;
    p.beta1 = 0.9;
    p.beta2 = 1.7;
    p.lambda1 = 0.4;
    p.lambda2 = 2.2;
    p.a = 0.25;
    const LevyModel m = BetaFamily{p};
    const LevyModel r = reflect_model(m);
    for (double x = -3.0; x <= 3.0; x += 0.37) {
        if (std::abs(x) < 1e-9) continue;
        EXPECT_DOUBLE_EQ(levy_density(m, x), levy_density(r, -x)) << x;
    }
    // F of -X at zeta equals F of X at -zeta.
    for (double z : {-0.3, 0.2, 0.9}) EXPECT_NEAR(eval_psi_shifted(r, 1.0, z), eval_psi_shifted(m, 1.0, -z), 1e-12);
}

TEST(LevyModels, ReflectIsAnInvolution) {
    const LevyModel m = BetaFamily{rate_study_params()};
    const auto back = std::get<BetaFamily>(reflect_model(reflect_model(m))).params;
    const auto orig = std::get<BetaFamily>(m).params;
    EXPECT_EQ(back.c1, orig.c1);
    EXPECT_EQ(back.alpha1, orig.alpha1);
    EXPECT_EQ(back.alpha2, orig.alpha2);
    EXPECT_EQ(back.a, orig.a);
    const auto bm = std::get<BrownianMotion>(reflect_model(BrownianMotion{}));
    EXPECT_EQ(bm.volatility, 1.0);
    EXPECT_EQ(bm.drift, 0.0);
    const auto swapped = std::get<BetaFamily>(reflect_model(m)).params;
    EXPECT_EQ(swapped.alpha1, 2.0);
    EXPECT_EQ(swapped.alpha2, 1.0);
}

TEST(LevyModels, ValidationRejectsBadParameters) {
    BetaFamilyParams p = rate_study_params();
    p.lambda1 = 3.0;
    EXPECT_THROW(validate(p), ParameterError);
    p = rate_study_params();
    p.c1 = p.c2 = 0.0;
    EXPECT_THROW(validate(p), ParameterError);
    EXPECT_THROW(validate(BrownianMotion{0.0, 0.0}), ParameterError);
}

TEST(LevyModels, PoleEvaluationIsADomainError) {
    const BetaFamilyParams p = rate_study_params();
    EXPECT_THROW(eval_psi_shifted(p, 1.0, 2.0), DomainError);   // beta2 (alpha2 + 0)
    EXPECT_THROW(eval_psi_shifted(p, 1.0, -1.0), DomainError);  // beta1 (0 - alpha1)
}

TEST(Roots, PositiveRootsAreInsideTheirBrackets) {
    const BetaFamilyParams p = rate_study_params();
    const RootTable r = find_roots(p, 1.0, 40);
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double lo = k == 0 ? 0.0 : p.beta2 * (p.alpha2 + k - 1.0);
        const double hi = p.beta2 * (p.alpha2 + k);
        EXPECT_GT(r.zeta_pos[k], lo);
        EXPECT_LT(r.zeta_pos[k], hi);
        EXPECT_EQ(r.pole_pos[k], hi);
        const double nlo = p.beta1 * (-static_cast<double>(k) - p.alpha1);
        EXPECT_GT(r.zeta_neg[k], nlo);
        EXPECT_LT(r.zeta_neg[k], nlo + p.beta1);
    }
}

TEST(Roots, ResidualCertificate) {
    const BetaFamilyParams p = rate_study_params();
    for (double q : {0.25, 1.0, 16.0}) {
        const RootTable r = find_roots(p, q, 32);
        for (std::size_t k = 0; k < r.size(); ++k) {
            EXPECT_LE(std::abs(eval_psi_shifted(p, q, r.zeta_pos[k])), 1e-10) << q << " " << k;
            EXPECT_LE(std::abs(eval_psi_shifted(p, q, r.zeta_neg[k])), 1e-10) << q << " " << k;
            if (k > 0) {
                EXPECT_GT(r.zeta_pos[k], r.zeta_pos[k - 1]);
                EXPECT_LT(r.zeta_neg[k], r.zeta_neg[k - 1]);
            }
        }
    }
}

TEST(Roots, IllConditionedRootsAreSignChangesBetweenNeighbouringDoubles) {
    // Roots within ~1e-4 of a pole: |F| at the best double can exceed 1e-10,
    // so the certificate falls back to a sign change across adjacent doubles.
    BetaFamilyParams p;
    p.c1 = 0.5;
    p.c2 = 2.0;
    p.alpha1 = 1.7;
    p.alpha2 = 0.6;
    p.beta1 = 2.0;
    p.beta2 = 0.5;
    p.lambda1 = 2.5;
    p.lambda2 = 0.3;
    p.sigma = 0.4;
    p.a = -0.2;
    for (double q : {0.25, 1.0, 16.0}) {
        const RootTable r = find_roots(p, q, 32);
        for (std::size_t k = 0; k < r.size(); ++k) {
            for (double z : {r.zeta_pos[k], r.zeta_neg[k]}) {
                const double f = eval_psi_shifted(p, q, z);
                const double below = eval_psi_shifted(p, q, std::nextafter(z, -1e300));
                const double above = eval_psi_shifted(p, q, std::nextafter(z, 1e300));
                const bool brackets = f == 0.0 || (below > 0.0) != (above > 0.0);
                EXPECT_TRUE(brackets || std::abs(f) <= 1e-10) << q << " " << k << " " << z;
            }
        }
    }
}

TEST(Roots, SingleRootPerSide) {
    const RootTable r = find_roots(rate_study_params(), 1.0, 1);
    ASSERT_EQ(r.zeta_neg.size(), 1u);
    ASSERT_EQ(r.zeta_pos.size(), 1u);
    EXPECT_LT(r.zeta_neg[0], 0.0);
    EXPECT_GT(r.zeta_pos[0], 0.0);
}

TEST(Roots, ErrorsAreTyped) {
    EXPECT_THROW(find_roots(rate_study_params(), 1.0, 0), ParameterError);
    EXPECT_THROW(find_roots(rate_study_params(), -1.0, 3), ParameterError);
    EXPECT_THROW(find_roots(LevyModel{BrownianMotion{}}, 1.0, 3), ParameterError);
    // A tolerance no bisection can meet still returns; a guard band wider than the bracket cannot.
    RootFinderOptions wide;
    wide.guard_band = 0.49;
    try {
        find_roots(rate_study_params(), 1.0, 4, wide);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("zeta_"), std::string::npos);
    }
}
