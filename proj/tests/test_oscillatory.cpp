#include <gtest/gtest.h>

#include <cmath>

#include "equiloc/amplitude_grammar.hpp"
#include "equiloc/desing.hpp"
#include "equiloc/fit.hpp"
#include "equiloc/oscillatory.hpp"

using namespace equiloc;

namespace {

LinearHamiltonianModel pair_model() { return LinearHamiltonianModel::from_weights({{1}, {-1}}); }

AmplitudeExpr gaussian_pair() { return parse_amplitude("gauss(p) * gauss(X)", 4, 1); }

// a = exp(-|z|^2 - X^2) on weights (1,-1): I = pi^2 int exp(-X^2) / (1 + X^2/(4 mu^2)) dX = 2 mu pi^3 e^{4mu^2} erfc(2 mu)
double pair_closed_form(double mu) { return 2 * mu * std::pow(M_PI, 3) * std::exp(4 * mu * mu) * std::erfc(2 * mu); }

}  // namespace

TEST(Oscillatory, GaussianExactMatchesClosedForm) {
    for (double mu : {0.01, 0.05, 0.2, 1.0}) {
        Complex v = gaussian_exact_I(pair_model(), gaussian_pair(), mu);
        EXPECT_NEAR(v.real(), pair_closed_form(mu), 1e-10 * pair_closed_form(mu)) << mu;
        EXPECT_NEAR(v.imag(), 0.0, 1e-10 * pair_closed_form(mu));
    }
}

TEST(Oscillatory, BruteForceMatchesClosedFormAndExact) {
    auto m = pair_model();
    auto a = gaussian_pair();
    for (double mu : {0.2, 0.1, 0.05}) {
        QuadratureOutcome q = brute_force_I(m, a, mu);
        Complex g = gaussian_exact_I(m, a, mu);
        EXPECT_LE(std::abs(q.value - g), 1e-5 * std::abs(g)) << mu;
        EXPECT_LE(std::abs(q.value - pair_closed_form(mu)), 1e-5 * pair_closed_form(mu)) << mu;
    }
}

TEST(Oscillatory, GridConvergence) {
    auto m = pair_model();
    auto a = parse_amplitude("gauss(p) * (1 + X1^2) * bump(X, 1, 2)", 4, 1);
    QuadratureSpec coarse, fine;
    coarse.min_nodes = 200;
    fine.min_nodes = 400;
    for (double mu : {0.2, 0.1}) {
        Complex c = brute_force_I(m, a, mu, coarse).value, f = brute_force_I(m, a, mu, fine).value;
        EXPECT_LE(std::abs(c - f), 1e-6 * std::abs(f)) << mu;
    }
}

TEST(Oscillatory, ZeroAndLargeMu) {
    auto m = pair_model();
    EXPECT_EQ(brute_force_I(m, AmplitudeExpr(4, 1), 0.1).value, Complex(0));
    // phase close to 1 on the support: I -> int int a = pi^2 sqrt(pi), relative gap 1/(16 mu^2)
    double mu = 20;
    Complex v = brute_force_I(m, gaussian_pair(), mu).value;
    EXPECT_NEAR(v.real(), std::pow(M_PI, 2.5), 1e-3 * std::pow(M_PI, 2.5));
}

TEST(Oscillatory, GuardAndDomainErrors) {
    auto m = pair_model();
    QuadratureSpec q;
    q.nodes = {8};
    try {
        brute_force_I(m, gaussian_pair(), 0.01, q);
        FAIL() << "expected a resolution error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::resolution);
    }
    EXPECT_THROW(brute_force_I(m, gaussian_pair(), 0.0), Error);
    EXPECT_THROW(brute_force_I(m, parse_amplitude("gauss(p) * gauss(X)", 2, 1), 0.1), Error);
}

TEST(Oscillatory, InnerStationaryPhaseOrder) {
    // exact: 2 pi nu (1 + nu^2)^{-1/2}
    auto a = parse_amplitude("gauss({p1, X1}, 1/2)", 1, 1);
    std::vector<double> nus;
    for (int i = 0; i < 8; ++i) nus.push_back(0.02 * std::pow(10.0, i / 7.0));
    for (int K : {1, 2, 3}) {
        auto e = inner_sp_expansion(a, nus, K);
        for (std::size_t k = 1; k < e.coefficients.size(); k += 2) EXPECT_EQ(e.coefficients[k], 0.0);
        std::vector<double> err;
        for (std::size_t i = 0; i < nus.size(); ++i) {
            double exact = 2 * M_PI * nus[i] / std::sqrt(1 + nus[i] * nus[i]);
            err.push_back(std::abs(e.partial_sums[i] - exact));
            EXPECT_LE(err.back(), e.remainder_bound(nus[i]));
        }
        OrderFit f = fit_order(nus, err, false);
        EXPECT_NEAR(f.alpha, 2 * K + 1, 0.15) << K;
    }
    EXPECT_THROW(inner_sp_expansion(a, nus, 5), Error);
}

TEST(Oscillatory, FlatBumpCoefficients) {
    auto a = parse_amplitude("bump({p1, X1}, 1, 2)", 1, 1);
    auto e = inner_sp_expansion(a, {0.1}, 1);
    EXPECT_EQ(e.coefficients[0], 1.0);
    auto flat = parse_amplitude("p1^4 * X1^4 * bump({p1, X1}, 1, 2)", 1, 1);
    auto f = inner_sp_expansion(flat, {0.1}, 1);
    EXPECT_EQ(f.coefficients[0], 0.0);
}

TEST(Oscillatory, LeadingTermAtRegularValues) {
    // level s2 - s1 = eta of exp(-2(s1 + s2)): Q0 = pi^2 exp(-2 eta)
    auto m = pair_model();
    auto a = gaussian_pair();
    for (const Rational& eta : {Rational(1, 5), Rational(1, 10), Rational(1, 20), Rational(1, 2)}) {
        double q0 = leading_term_regular(m, a, {eta});
        EXPECT_NEAR(q0, M_PI * M_PI * std::exp(-2 * to_double(eta)), 1e-9);
    }
    EXPECT_THROW(leading_term_regular(m, a, {Rational(0)}), Error);
    // continuity toward the singular leading term L0(0) = pi^2
    EXPECT_NEAR(leading_term_regular(m, a, {Rational(1, 1000)}), leading_term_L0(m, a), 0.01 * M_PI * M_PI);
    double mu = 0.01;
    Complex v = gaussian_exact_I(m, a, mu, {0.5});
    EXPECT_NEAR(std::abs(v) / (2 * M_PI * mu), M_PI * M_PI * std::exp(-1.0), 0.02 * M_PI * M_PI * std::exp(-1.0));
    EXPECT_EQ(leading_term_regular(m, parse_amplitude("bump(p, 1/4, 1/2) * gauss(X)", 4, 1), {Rational(2)}), 0.0);
}

TEST(Oscillatory, ClosedFormNeedsSeparableGaussian) {
    try {
        gaussian_exact_I(pair_model(), parse_amplitude("bump(p, 1, 2) * gauss(X)", 4, 1), 0.1);
        FAIL() << "expected a capability error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::capability);
    }
}
