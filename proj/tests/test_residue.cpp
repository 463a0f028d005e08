#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <cmath>
#include <random>

#include "equiloc/amplitude_grammar.hpp"
#include "equiloc/level_set.hpp"
#include "equiloc/residue.hpp"
#include "equiloc/symplectic.hpp"

using namespace equiloc;

namespace {

LinearHamiltonianModel model_of(const IntMatrix& w) { return LinearHamiltonianModel::from_weights(w); }

std::vector<FixedPointDatum> sphere_square() {
    std::vector<FixedPointDatum> out;
    for (int a : {1, -1})
        for (int b : {1, -1}) out.push_back({"p", 0, {Rational(a), Rational(b)}, {{a, 0}, {0, b}}, {}});
    return out;
}

double integrate_line(const std::function<double(double)>& f, double lo, double hi) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-12);
}

}  // namespace

TEST(Residue, SphereLocalizationTerms) {
    auto data = sphere_fixed_points();
    auto terms = localization_terms(data, 1);
    ASSERT_EQ(terms.size(), 2u);
    for (double Y : {0.3, 1.0, 2.5, 7.0}) {
        Complex s = localization_sum(data, 1, {Y});
        EXPECT_NEAR(s.real(), 2 * std::sin(Y) / Y, 1e-14);
        EXPECT_NEAR(s.imag(), 0.0, 1e-14);
    }
    EXPECT_THROW(localization_sum(data, 1, {0.0}), Error);
    EXPECT_TRUE(localization_terms(data, 0).empty());
}

TEST(Residue, SurfaceIntegralAgreesWithFixedPointSum) {
    SphereModel s;
    auto data = sphere_fixed_points();
    for (int i = 1; i <= 20; ++i) {
        double Y = 0.37 * i;
        Complex numeric = s.equivariant_integral(Y);
        Complex local = Complex(0, -2 * M_PI) * localization_sum(data, 1, {Y});
        EXPECT_LE(std::abs(numeric - local), 1e-5 * (1 + std::abs(local))) << Y;
    }
}

TEST(Residue, SphereMeasureAndResidues) {
    auto u = dh_measure(sphere_fixed_points(), ConeLambda{{{Rational(1)}}});
    EXPECT_EQ(u.two_pi_power, 1);
    EXPECT_FALSE(u.has_atoms());
    EXPECT_NEAR(u.density({0.3}), 2 * M_PI, 1e-12);
    EXPECT_NEAR(u.density({-0.9}), 2 * M_PI, 1e-12);
    EXPECT_NEAR(u.density({1.4}), 0.0, 1e-12);
    EXPECT_NEAR(u.density({-1.4}), 0.0, 1e-12);
    // residues are germs of U at the origin approached along eta
    for (const Rational& e : {Rational(1, 2), Rational(-1, 2), Rational(3, 2)}) EXPECT_EQ(jk_residue_exact(u, {e}), Rational(1));
    EXPECT_NEAR(jk_residue(u, {Rational(1, 2)}), 2 * M_PI, 1e-12);
    EXPECT_THROW(jk_residue_exact(u, {Rational(0)}), Error);
}

TEST(Residue, RankTwoResiduesAndWalls) {
    auto m = dh_measure(cut_fixed_points(model_of({{1, 0}, {0, 1}, {-1, -1}}), 1), ConeLambda{{{Rational(1), Rational(2)}}});
    EXPECT_EQ(m.two_pi_power, 3);
    EXPECT_EQ(jk_residue_exact(m, {Rational(1), Rational(-1)}), Rational(1, 3));
    EXPECT_EQ(jk_residue_exact(m, {Rational(1, 3), Rational(1, 5)}), Rational(1, 3));
    for (const RationalVector& eta : {RationalVector{Rational(1), Rational(0)}, RationalVector{Rational(1), Rational(1)}}) {
        try {
            jk_residue_exact(m, eta);
            FAIL() << "expected a wall error";
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::wall);
        }
    }
}

TEST(Residue, RankOneFourierPairingByContourShift) {
    // e^{3iY/2} / (iY)^2 on the cone {1}: <U, phi> = int f(Y + i) phi_hat(Y + i) dY, phi = exp(-(xi - c)^2 / 2)
    RationalExpTerm t;
    t.exponent = {Rational(3, 2)};
    t.numerator = Polynomial::constant(1, 1);
    t.denominators = {{{1}, 2}};
    auto u = fourier_piecewise({t}, ConeLambda{{{Rational(1)}}});
    EXPECT_NEAR(u.density({2.0}), 2 * M_PI * 0.5, 1e-12);
    EXPECT_EQ(u.density({1.0}), 0.0);
    EXPECT_EQ(jk_residue_exact(u, {Rational(1)}), Rational(0));
    for (double c : {-1.0, 0.5, 2.0}) {
        double lhs = integrate_line([&](double x) { return u.density({x}) * std::exp(-(x - c) * (x - c) / 2); }, 1.5, 40.0);
        auto integrand = [&](double Y, bool imag) {
            Complex z(Y, 1.0);
            Complex f = std::exp(Complex(0, 1.5) * z) / std::pow(Complex(0, 1) * z, 2);
            Complex phi = std::sqrt(2 * M_PI) * std::exp(Complex(0, -c) * z - z * z / 2.0);
            Complex v = f * phi;
            return imag ? v.imag() : v.real();
        };
        boost::math::quadrature::sinh_sinh<double> ss;
        double re = ss.integrate([&](double Y) { return integrand(Y, false); });
        double im = ss.integrate([&](double Y) { return integrand(Y, true); });
        EXPECT_NEAR(lhs, re, 1e-6 * (1 + std::abs(re))) << c;
        EXPECT_NEAR(im, 0.0, 1e-6);
    }
}

TEST(Residue, PlaneMeasure) {
    // C with weight 1: J = -|z|^2/2, DH = 2 pi on (-inf, 0)
    auto u = dh_measure(model_of({{1}}));
    EXPECT_NEAR(u.density({-0.5}), 2 * M_PI, 1e-12);
    EXPECT_NEAR(u.density({0.5}), 0.0, 1e-12);
    EXPECT_THROW(dh_measure(model_of({{1}, {-1}})), Error);
}

TEST(Residue, HistogramOracles) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> unit(-1, 1);
    const int n = 400000;
    // sphere: J = z with area 4 pi
    auto sphere = dh_measure(sphere_fixed_points(), ConeLambda{{{Rational(1)}}});
    std::vector<int> bins(8, 0);
    for (int i = 0; i < n; ++i) {
        double x, y, z, r2;
        do {
            x = unit(rng);
            y = unit(rng);
            z = unit(rng);
            r2 = x * x + y * y + z * z;
        } while (r2 > 1 || r2 < 1e-6);
        double h = z / std::sqrt(r2);
        bins[std::min(7, static_cast<int>((h + 1) * 4))]++;
    }
    for (int b = 0; b < 8; ++b) {
        double estimate = 4 * M_PI * bins[b] / (n * 0.25);
        EXPECT_NEAR(estimate, sphere.density({-1 + 0.25 * b + 0.125}), 0.05 * 2 * M_PI) << b;
    }
    // plane: disc of radius 2, J in [-2, 0]
    auto plane = dh_measure(model_of({{1}}));
    std::vector<int> pbins(4, 0);
    int inside = 0;
    for (int i = 0; i < n; ++i) {
        double x = 2 * unit(rng), y = 2 * unit(rng);
        double r2 = x * x + y * y;
        if (r2 > 4) continue;
        ++inside;
        pbins[std::min(3, static_cast<int>(-(-r2 / 2) * 2))]++;
    }
    for (int b = 0; b < 4; ++b) {
        double estimate = 16.0 * pbins[b] / (n * 0.5);
        EXPECT_NEAR(estimate, plane.density({-0.5 * b - 0.25}), 0.05 * 2 * M_PI) << b;
    }
    EXPECT_GT(inside, 0);
}

TEST(Residue, MeasureIndependentOfCone) {
    struct Case {
        std::vector<FixedPointDatum> data;
        std::vector<ConeLambda> cones;
        std::vector<std::vector<double>> probes;
    };
    std::vector<Case> cases;
    cases.push_back({sphere_fixed_points(), {ConeLambda{{{Rational(1)}}}, ConeLambda{{{Rational(-1)}}}}, {{0.3}, {-0.7}, {1.2}}});
    cases.push_back({sphere_square(),
                     {ConeLambda{{{Rational(1), Rational(2)}}}, ConeLambda{{{Rational(-2), Rational(1)}}}, ConeLambda{{{Rational(-1), Rational(-3)}}}},
                     {{0.3, -0.2}, {0.9, 0.1}, {1.3, 0.2}, {-0.5, -1.5}}});
    cases.push_back({cut_fixed_points(model_of({{1}, {-1}}), 1), {ConeLambda{{{Rational(1)}}}, ConeLambda{{{Rational(-1)}}}}, {{0.3}, {-0.6}, {1.5}}});
    cases.push_back({cut_fixed_points(model_of({{1}, {2}, {-1}}), 1), {ConeLambda{{{Rational(1)}}}, ConeLambda{{{Rational(-1)}}}}, {{0.3}, {-0.6}, {-1.5}, {2.5}}});
    cases.push_back({cut_fixed_points(model_of({{1, 0}, {0, 1}, {-1, -1}}), 1),
                     {ConeLambda{{{Rational(1), Rational(2)}}}, ConeLambda{{{Rational(2), Rational(1)}}}, ConeLambda{{{Rational(-1), Rational(-3)}}}},
                     {{-0.3, -0.1}, {0.2, 0.3}, {-0.1, 0.4}, {0.5, -0.2}, {3.0, 2.5}}});
    for (const auto& c : cases) {
        auto ref = dh_measure(c.data, c.cones[0]);
        for (std::size_t k = 1; k < c.cones.size(); ++k) {
            auto u = dh_measure(c.data, c.cones[k]);
            for (const auto& xi : c.probes) EXPECT_NEAR(u.density(xi), ref.density(xi), 1e-9 * (1 + std::abs(ref.density(xi))));
        }
    }
    EXPECT_NEAR(dh_measure(sphere_square(), ConeLambda{{{Rational(1), Rational(2)}}}).density({0.3, -0.2}), 4 * M_PI * M_PI, 1e-9);
}

TEST(Residue, MeasureMatchesLevelSetChart) {
    // density of the pushforward of the cut volume equals the level-set integral of 1 over the cut
    auto m = model_of({{1, 0}, {0, 1}, {-1, -1}});
    auto u = dh_measure(cut_fixed_points(m, 1), ConeLambda{{{Rational(1), Rational(2)}}});
    AmplitudeExpr one = AmplitudeExpr::constant(m.real_dim(), 2, 1);
    HalfSpace cut{{1.0, 1.0, 1.0}, 1.0};
    for (std::vector<double> xi : {std::vector<double>{-0.2, -0.1}, {0.1, 0.25}, {-0.3, 0.2}}) {
        double chart = level_set_integral(m, one, xi, {1.0, 1.0, 1.0}, {cut});
        EXPECT_NEAR(u.density(xi), chart, 1e-9 * (1 + chart));
    }
}

TEST(Residue, ResidueFormulaOnCuts) {
    auto pair = model_of({{1}, {-1}});
    for (const auto& cone : {ConeLambda{{{Rational(1)}}}, ConeLambda{{{Rational(-1)}}}}) {
        ResidueCheck c = residue_formula_check(pair, 1, 1, cone, {Rational(1)});
        EXPECT_EQ(c.residue, Rational(1, 2));
        EXPECT_LE(c.difference, 1e-6 * std::abs(c.lhs));
    }
    auto m2 = model_of({{1, 0}, {0, 1}, {-1, -1}});
    for (const auto& cone : {ConeLambda{{{Rational(1), Rational(2)}}}, ConeLambda{{{Rational(2), Rational(1)}}}}) {
        ResidueCheck c = residue_formula_check(m2, 1, 1, cone, {Rational(1, 3), Rational(1, 5)});
        EXPECT_EQ(c.residue, Rational(1, 3));
        EXPECT_LE(c.difference, 1e-6 * std::abs(c.lhs));
        EXPECT_NEAR(c.lhs.imag(), 8 * std::pow(M_PI, 3) / 3, 1e-6);
    }
    EXPECT_EQ(residue_formula_check(pair, 0, 1, ConeLambda{{{Rational(1)}}}, {Rational(1)}).residue, Rational(0));
    EXPECT_THROW(residue_formula_check(pair, 1, 1, ConeLambda{{{Rational(1)}}}, {Rational(0)}), Error);
    EXPECT_THROW(cut_fixed_points(pair, 0), Error);
}

TEST(Residue, EulerClassInverse) {
    FixedPointDatum f{"p", 2, {Rational(0)}, {{2}}, {"c"}};
    Polynomial inv = euler_class_inverse(f, {Rational(1)});
    Polynomial expected = Polynomial::constant(1, Rational(1, 2)) + Polynomial::variable(1, 0) * Rational(-1, 4);
    EXPECT_TRUE(inv == expected);
    FixedPointDatum g{"q", 4, {Rational(0), Rational(0)}, {{1, 0}, {1, 2}}, {"a", "b"}};
    RationalVector y{Rational(2, 3), Rational(-1, 5)};
    EXPECT_TRUE(detail::truncate(euler_class(g, y) * euler_class_inverse(g, y), 2) == Polynomial::constant(2, 1));
    try {
        euler_class_inverse(g, {Rational(0), Rational(1)});
        FAIL() << "expected a hyperplane error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::hyperplane);
    }
}

TEST(Residue, WeylIntegrationFormula) {
    auto su2 = CompactGroupData::su2();
    double v = weyl_lie_algebra_integral(su2, [](const std::vector<double>& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])); });
    EXPECT_NEAR(v, std::pow(M_PI, 1.5), 1e-6 * std::pow(M_PI, 1.5));
    try {
        weyl_lie_algebra_integral(su2, [](const std::vector<double>& x) { return std::exp(-(x[0] * x[0] + 2 * x[1] * x[1] + 3 * x[2] * x[2])); });
        FAIL() << "expected a precondition error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::precondition);
    }
    double t = weyl_lie_algebra_integral(CompactGroupData::torus(2), [](const std::vector<double>& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1])); });
    EXPECT_NEAR(t, M_PI, 1e-8);
}
