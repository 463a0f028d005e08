#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "equiloc/amplitude_grammar.hpp"
#include "equiloc/desing.hpp"

using namespace equiloc;

namespace {

LinearHamiltonianModel model_of(const IntMatrix& w) { return LinearHamiltonianModel::from_weights(w); }

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(lo * std::pow(hi / lo, double(i) / (count - 1)));
    return out;
}

}  // namespace

TEST(Desing, DyadicPartitionOfUnity) {
    DyadicPartition part;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> logr(std::log(1e-6), std::log(0.5));
    std::uniform_real_distribution<double> dir(-1, 1);
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
        std::vector<double> w(4);
        double n = 0;
        for (double& x : w) {
            x = dir(rng);
            n += x * x;
        }
        double r = std::exp(logr(rng));
        for (double& x : w) x *= r / std::sqrt(n);
        double sum = 0;
        for (auto [l, s] : dyadic_weights(part, w)) {
            EXPECT_GE(s, 0.0);
            sum += s;
        }
        worst = std::max(worst, std::abs(sum - 1));
    }
    EXPECT_LE(worst, 1e-12);
    EXPECT_THROW(dyadic_weights(part, {0, 0}), Error);
    EXPECT_THROW(dyadic_weights(part, {0.6, 0}), Error);
}

TEST(Desing, RescaledAmplitudeMatchesPointwiseDefinition) {
    DyadicPartition part;
    auto a = parse_amplitude("gauss(p) * (1 + x1 * X1 + y2^2) * bump(X, 1, 2)", 4, 1);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (int l : {0, 1, 3}) {
        auto s = rescale_amplitude(a, l, part);
        double tau = DyadicPartition::scale(l);
        for (int i = 0; i < 20; ++i) {
            std::vector<double> v(5);
            for (double& x : v) x = u(rng);
            std::vector<double> scaled(v);
            double r = 0;
            for (int j = 0; j < 4; ++j) {
                scaled[j] *= tau;
                r += v[j] * v[j];
            }
            EXPECT_NEAR(s.evaluate(v), a.evaluate(scaled) * part.shell(std::sqrt(r)), 1e-13);
        }
    }
    auto straddle = parse_amplitude("bump({x1, X1}, 1, 2) * gauss(z2)", 4, 1);
    try {
        rescale_amplitude(straddle, {0, 1}, 1, part);
        FAIL() << "expected a capability error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::capability);
    }
    EXPECT_THROW(rescale_amplitude(a, -1, part), Error);
}

TEST(Desing, StrataOfCorpusModels) {
    auto g = parse_amplitude("gauss(p) * bump(X, 1, 2)", 4, 1);
    auto pair = strata_catalog(model_of({{1}, {-1}}), g);
    EXPECT_EQ(pair.strata.size(), 2u);
    EXPECT_EQ(pair.lambda_a, 1);
    EXPECT_EQ(pair.strata[pair.regular].algebra_dim, 0);

    auto g8 = parse_amplitude("gauss(p) * bump(X, 1, 2)", 8, 1);
    auto doubled = strata_catalog(model_of({{1}, {-1}, {1}, {-1}}), g8);
    EXPECT_EQ(doubled.lambda_a, 0);

    auto g82 = parse_amplitude("gauss(p) * bump(X, 1, 2)", 8, 2);
    auto cross = strata_catalog(model_of({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}), g82);
    EXPECT_EQ(cross.lambda_a, 2);
    EXPECT_EQ(cross.lambda_a, cross.lambda_tuple);

    // the level s2 - s1 = 1/2 misses the origin: one free class
    auto free = strata_catalog(model_of({{1}, {-1}}), g, {Rational(1, 2)});
    EXPECT_EQ(free.strata.size(), 1u);
    EXPECT_EQ(free.lambda_a, 0);

    // a shell support excluding the origin also removes the singular class
    auto ring = strata_catalog(model_of({{1}, {-1}}), parse_amplitude("cut(p, 1/4, 1/2) * bump(p, 2, 3) * bump(X, 1, 2)", 4, 1));
    EXPECT_EQ(ring.strata.size(), 1u);

    EXPECT_THROW(strata_catalog(model_of({{1}, {1}}), g), Error);
}

TEST(Desing, TreeDepthsAndTermination) {
    auto box = parse_amplitude("bump(p, 1, 2) * bump(X, 1, 2)", 4, 1).support_box();
    auto pair = model_of({{1}, {-1}});
    EXPECT_EQ(build_desing_tree(pair, box, {Rational(0)}, 8).tree_depth(), 1);
    EXPECT_EQ(build_desing_tree(pair, box, {Rational(1, 2)}, 8).tree_depth(), 0);
    try {
        build_desing_tree(pair, box, {Rational(0)}, 0);
        FAIL() << "expected a consistency error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::consistency);
    }
    for (const IntMatrix& w : {IntMatrix{{1}, {-1}, {1}, {-1}}, IntMatrix{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}, IntMatrix{{1, 0}, {0, 1}, {-1, -1}},
                               IntMatrix{{2}, {-1}}, IntMatrix{{1, 2}, {-1, 1}, {0, -1}}}) {
        auto m = model_of(w);
        int r = m.torus_rank;
        auto b = parse_amplitude("bump(p, 1, 2) * bump(X, 1, 2)", m.real_dim(), r).support_box();
        RationalVector eta(r, Rational(0));
        auto cat = strata_catalog(m, b, eta);
        auto tree = build_desing_tree(m, b, eta, 16);
        EXPECT_LE(tree.tree_depth(), cat.chain_bound + 1);
        EXPECT_FALSE(dump_tree(tree).empty());
    }
    auto cross = model_of({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
    auto b = parse_amplitude("bump(p, 1, 2) * bump(X, 1, 2)", 8, 2).support_box();
    EXPECT_EQ(build_desing_tree(cross, b, {Rational(0), Rational(0)}, 8).tree_depth(), 2);
}

TEST(Desing, LeadingTermDirectAndThroughShells) {
    // exp(-2(s1 + s2)) on s1 = s2 with measure (2 pi)^2 ds: L0 = pi^2
    auto m = model_of({{1}, {-1}});
    auto a = parse_amplitude("gauss(p) * bump(X, 1, 2)", 4, 1);
    EXPECT_NEAR(leading_term_L0(m, a), M_PI * M_PI, 1e-9);
    ShellSum s = leading_term_L0_shells(m, a);
    EXPECT_NEAR(s.value, M_PI * M_PI, 1e-6);
    EXPECT_FALSE(s.shells.empty());
    double total = s.core;
    for (double x : s.shells) total += x;
    EXPECT_NEAR(total, s.value, 1e-12);
    EXPECT_EQ(leading_term_L0(m, AmplitudeExpr(4, 1)), 0.0);
}

TEST(Desing, Homogeneity) {
    auto m = model_of({{1, 2}, {-1, 1}, {0, -1}});
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 50; ++i) {
        RealVector w(6), X(2);
        for (double& x : w) x = u(rng);
        for (double& x : X) x = u(rng);
        EXPECT_LE(homogeneity_check(m, w, X, 0.5 + std::abs(u(rng)) * 3), 1e-13);
    }
}

TEST(Desing, RecoveryIdentity) {
    auto m = model_of({{1}, {-1}});
    auto a = parse_amplitude("bump(p, 1/4, 1/2) * gauss(X)", 4, 1);
    RecoveryResult r = recovery_identity(m, a, 0.1, 24);
    EXPECT_LE(r.relative_error, 1e-6);
    EXPECT_THROW(recovery_identity(m, parse_amplitude("bump(p, 1, 2) * gauss(X)", 4, 1), 0.1, 8), Error);
}

TEST(Desing, ResidualOrderForPair) {
    auto m = model_of({{1}, {-1}});
    auto a = parse_amplitude("gauss(p) * bump(X, 1, 2)", 4, 1);
    AsymptoticResult res = desingularize(m, a, log_grid(0.01, 0.2, 5), 8);
    EXPECT_EQ(res.kappa, 1);
    EXPECT_EQ(res.tree_depth, 1);
    EXPECT_EQ(res.lambda_a, 1);
    EXPECT_NEAR(res.L0, M_PI * M_PI, 1e-9);
    EXPECT_GE(res.plain.alpha, 1.8);
    EXPECT_LE(res.plain.alpha, 2.2);
    EXPECT_THROW(desingularize(m, a, {}, 8), Error);
}

TEST(Desing, FreeActionLevel) {
    // s2 - s1 = 1/2: L0 = pi^2 / e and no singular classes
    auto m = model_of({{1}, {-1}});
    auto a = parse_amplitude("gauss(p) * (1 + X1) * bump(X, 1, 2)", 4, 1);
    AsymptoticResult res = desingularize(m, a, log_grid(0.01, 0.2, 5), 8, {Rational(1, 2)});
    EXPECT_EQ(res.tree_depth, 0);
    EXPECT_NEAR(res.L0, M_PI * M_PI / std::exp(1.0), 1e-9);
    EXPECT_GE(res.plain.alpha, 1.8);
}
