#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "equiloc/checks.hpp"
#include "equiloc/symplectic.hpp"

using namespace equiloc;

namespace {

LinearHamiltonianModel pair_model() { return LinearHamiltonianModel::from_weights({{1}, {-1}}); }

}  // namespace

TEST(Symplectic, MomentumMapSignConvention) {
    // one circle of weight n on C: J = -n |z|^2 / 2
    auto m = LinearHamiltonianModel::from_weights({{3}});
    EXPECT_DOUBLE_EQ(momentum_map(m, {1.0, 2.0})[0], -3.0 * 5.0 / 2.0);
    auto p = pair_model();
    EXPECT_DOUBLE_EQ(momentum_map(p, {1, 0, 0, 2})[0], -(0.5 - 2.0));
}

TEST(Symplectic, DefiningIdentityHoldsAndDetectsWrongSign) {
    auto m = LinearHamiltonianModel::from_weights({{1, 0}, {-1, 2}, {0, -1}});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 20; ++i) {
        RealVector v(6), X(2);
        for (double& x : v) x = u(rng);
        for (double& x : X) x = u(rng);
        EXPECT_LE(momentum_defect(m, v, X, 1e-3), 1e-9);
        auto flipped = [&](const RealVector& q) {
            RealVector J = momentum_map(m, q);
            for (double& x : J) x = -x;
            return J;
        };
        double norm = 0;
        for (double x : fundamental_field(m, v, X)) norm = std::max(norm, std::abs(x));
        EXPECT_NEAR(momentum_defect(m, v, X, 1e-3, flipped), 2 * norm, 1e-6);
    }
}

TEST(Symplectic, CubicPerturbationShowsSecondOrderResidual) {
    // J + eps * x1^3 has defect 3 eps x1^2 + eps h^2 in the x1 slot; the h^2 part is the central-difference error
    auto m = pair_model();
    RealVector v{0.0, 0.3, -0.2, 0.1}, X{1.0};
    auto cubic = [&](const RealVector& q) {
        RealVector J = momentum_map(m, q);
        J[0] += q[0] * q[0] * q[0];
        return J;
    };
    double d1 = momentum_defect(m, v, X, 1e-2, cubic), d2 = momentum_defect(m, v, X, 5e-3, cubic);
    EXPECT_NEAR(d1, 1e-4, 1e-12);
    EXPECT_NEAR(d1 / d2, 4.0, 1e-6);
}

TEST(Symplectic, IsotropyFromSmithForm) {
    auto m = LinearHamiltonianModel::from_weights({{2}, {3}});
    EXPECT_EQ(isotropy(m, {1, 0, 0, 0}).finite_order, 2);
    EXPECT_EQ(isotropy(m, {0, 0, 0, 1}).finite_order, 3);
    EXPECT_EQ(isotropy(m, {1, 0, 0, 1}).finite_order, 1);
    EXPECT_EQ(isotropy(m, {0, 0, 0, 0}).algebra_dim, 1);
    auto d = LinearHamiltonianModel::from_weights({{2, 0}, {0, 2}});
    EXPECT_EQ(isotropy(d, {1, 0, 1, 0}).finite_order, 4);
}

TEST(Symplectic, SliceAtPointWithCircleStabilizer) {
    auto m = LinearHamiltonianModel::from_weights({{1, 0}, {-1, 0}, {0, 1}});
    auto s = slice_decomposition(m, {1, 0, 0, 0, 0, 0});
    ASSERT_EQ(s.stabilizer_lattice.size(), 1u);
    EXPECT_EQ(s.stabilizer_lattice[0], (std::vector<long long>{0, 1}));
    EXPECT_EQ(s.symplectic_complement, std::vector<int>{2});
}

TEST(Symplectic, ZeroLevelToleranceIsScaleAware) {
    auto m = pair_model();
    EXPECT_TRUE(on_zero_level(m, {1, 0, 0, 1}));
    EXPECT_TRUE(on_zero_level(m, {1e5, 0, 0, 1e5 * (1 + 1e-13)}));
    EXPECT_FALSE(on_zero_level(m, {1, 0, 0, 1.001}));
}

TEST(Symplectic, HessianDeterminantClosedForm) {
    // rank 1: the Gram determinant is sum_j w_j^2 |z_j|^2
    auto m = LinearHamiltonianModel::from_weights({{1}, {-2}});
    RealVector p{std::sqrt(2.0), 0, 0, 1};
    ASSERT_TRUE(on_zero_level(m, p));
    EXPECT_NEAR(transversal_hessian_det(m, p, {0.0}), 2.0 + 4 * 1.0, 1e-12);
    EXPECT_THROW(transversal_hessian_det(m, {1, 0, 0, 0}, {0.0}), Error);
}

TEST(Symplectic, HessianDeterminantMatchesFiniteDifferences) {
    for (const IntMatrix& w : {IntMatrix{{1}, {-1}}, IntMatrix{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}, IntMatrix{{2, 1}, {-1, 1}, {-1, -2}}}) {
        auto m = LinearHamiltonianModel::from_weights(w);
        auto pts = zero_level_samples(m, 100, 5);
        ASSERT_EQ(pts.size(), 100u);
        for (const auto& p : pts) {
            ASSERT_TRUE(on_zero_level(m, p));
            double exact = transversal_hessian_det(m, p, RealVector(m.torus_rank, 0.0));
            EXPECT_NEAR(hessian_det_fd(m, p), exact, 1e-5 * std::abs(exact));
        }
    }
}

TEST(Symplectic, SphereEquivariantIntegral) {
    // int_{S^2} e^{iYz} dA = 4 pi sin(Y) / Y
    SphereModel s;
    for (double Y : {0.3, 1.0, 2.5, 7.0}) {
        auto v = s.equivariant_integral(Y);
        EXPECT_NEAR(v.real(), 0.0, 1e-12);
        EXPECT_NEAR(v.imag(), -4 * M_PI * std::sin(Y) / Y, 1e-10);
    }
}

TEST(Symplectic, RejectsBadShapes) {
    EXPECT_THROW(LinearHamiltonianModel::from_weights({}), Error);
    EXPECT_THROW(LinearHamiltonianModel::from_weights({{1, 0}, {1}}), Error);
    EXPECT_THROW(LinearHamiltonianModel::from_weights({{0}, {0}}), Error);
    EXPECT_THROW(momentum_map(pair_model(), {1, 2, 3}), Error);
}

TEST(Symplectic, StructuralChecksPassOnCorpus) {
    for (const IntMatrix& w : {IntMatrix{{1}, {-1}}, IntMatrix{{1}, {-1}, {1}, {-1}}, IntMatrix{{1, 0}, {0, 1}, {-1, -1}}}) {
        for (const auto& c : structural_checks(LinearHamiltonianModel::from_weights(w))) EXPECT_TRUE(c.pass()) << c.name << " " << c.value;
    }
}
