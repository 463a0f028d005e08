#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equiloc/core/linalg.hpp"
#include "equiloc/desing.hpp"
#include "equiloc/residue.hpp"
#include "equiloc/symplectic.hpp"

namespace equiloc {

struct StructuralCheck {
    std::string name;
    double value = 0;      // worst deviation observed
    double tolerance = 0;
    int samples = 0;
    bool skipped = false;
    std::string note;

    bool pass() const { return skipped || value <= tolerance; }
};

/// Points of the zero level with every coordinate nonzero; empty when no such point exists.
inline std::vector<RealVector> zero_level_samples(const LinearHamiltonianModel& model, int count, unsigned seed) {
    int n = model.complex_dim, r = model.torus_rank;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> quarter(4, 12);
    std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
    RationalMatrix a(r, RationalVector(n, Rational(0)));
    for (int k = 0; k < r; ++k)
        for (int j = 0; j < n; ++j) a[k][j] = Rational(model.weights[j][k]);
    std::vector<RealVector> out;
    for (int i = 0; i < count; ++i) {
        // s = floor + t with t >= 0 and sum_j w_j s_j = 0
        RationalVector floor(n);
        for (int j = 0; j < n; ++j) floor[j] = Rational(quarter(rng), 4);
        RationalVector b(r, Rational(0));
        for (int k = 0; k < r; ++k)
            for (int j = 0; j < n; ++j) b[k] -= a[k][j] * floor[j];
        auto t = nonnegative_solution(a, b, n);
        if (!t) return {};
        RealVector v(2 * n);
        for (int j = 0; j < n; ++j) {
            double s = to_double(floor[j] + (*t)[j]);
            double radius = std::sqrt(2 * s);
            double phi = angle(rng);
            v[2 * j] = radius * std::cos(phi);
            v[2 * j + 1] = radius * std::sin(phi);
        }
        out.push_back(v);
    }
    return out;
}

/// Gram determinant of the fundamental fields, each from central differences of the torus flow.
inline double hessian_det_fd(const LinearHamiltonianModel& model, const RealVector& p, double h = 1e-5) {
    int r = model.torus_rank, n = model.complex_dim;
    auto flow = [&](const RealVector& X, double t) {
        RealVector q(2 * n);
        for (int j = 0; j < n; ++j) {
            double theta = -t * model.pairing(j, X);
            double c = std::cos(theta), s = std::sin(theta);
            q[2 * j] = c * p[2 * j] - s * p[2 * j + 1];
            q[2 * j + 1] = s * p[2 * j] + c * p[2 * j + 1];
        }
        return q;
    };
    Eigen::MatrixXd fields(2 * n, r);
    for (int k = 0; k < r; ++k) {
        RealVector e(r, 0.0);
        e[k] = 1;
        RealVector plus = flow(e, h), minus = flow(e, -h);
        for (int i = 0; i < 2 * n; ++i) fields(i, k) = (plus[i] - minus[i]) / (2 * h);
    }
    Eigen::MatrixXd gram = fields.transpose().lazyProduct(fields);
    return gram.determinant();
}

/// Momentum identity, homogeneity, Euler-class inverse, and transversal Hessian checks at seeded points.
inline std::vector<StructuralCheck> structural_checks(const LinearHamiltonianModel& model, unsigned seed = 11, int points = 100) {
    std::vector<StructuralCheck> out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    int dim = model.real_dim(), r = model.torus_rank;
    auto random_vector = [&](int d) {
        RealVector v(d);
        for (double& x : v) x = unit(rng);
        return v;
    };

    StructuralCheck defect{"momentum identity (central differences, h = 1e-2 and 1e-3)", 0, 0, points, false, ""};
    StructuralCheck homog{"homogeneity psi(c w, X) = c^2 psi(w, X)", 0, 1e-13, points, false, ""};
    for (int i = 0; i < points; ++i) {
        RealVector v = random_vector(dim), X = random_vector(r);
        for (double h : {1e-2, 1e-3}) {
            // O(h^2) bound with unit constant
            defect.value = std::max(defect.value, momentum_defect(model, v, X, h) / (h * h));
        }
        double c = 0.1 + 3 * std::abs(unit(rng));
        double scale = 1 + std::abs(c * c * momentum_value(model, v, X));
        homog.value = std::max(homog.value, homogeneity_check(model, v, X, c) / scale);
    }
    defect.tolerance = 1;
    defect.note = "max residual / h^2";
    out.push_back(defect);
    out.push_back(homog);

    StructuralCheck euler{"Euler class times its inverse equals 1 exactly", 0, 0, 0, false, ""};
    FixedPointDatum probe{"probe", 4, RationalVector(r, Rational(0)), {}, {}};
    for (const auto& w : model.weights)
        if (std::any_of(w.begin(), w.end(), [](long long x) { return x != 0; })) {
            probe.weights.push_back(w);
            probe.chern.push_back("c" + std::to_string(probe.weights.size()));
        }
    std::uniform_int_distribution<int> small(-7, 7);
    for (int i = 0; i < 20 && !probe.weights.empty(); ++i) {
        RationalVector y(r);
        for (auto& c : y) c = Rational(small(rng), 3 + i % 4);
        try {
            Polynomial prod = detail::truncate(euler_class(probe, y) * euler_class_inverse(probe, y), probe.dim / 2);
            if (!(prod == Polynomial::constant(static_cast<int>(probe.weights.size()), 1))) euler.value = 1;
            ++euler.samples;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::hyperplane) throw;
        }
    }
    euler.skipped = euler.samples == 0;
    out.push_back(euler);

    StructuralCheck hess{"transversal Hessian determinant vs finite-difference Gram oracle", 0, 1e-5, 0, false, ""};
    auto pts = zero_level_samples(model, points, seed + 1);
    for (const auto& p : pts) {
        if (isotropy(model, p).algebra_dim != 0) continue;
        double exact = transversal_hessian_det(model, p, RealVector(r, 0.0));
        double fd = hessian_det_fd(model, p);
        hess.value = std::max(hess.value, std::abs(exact - fd) / std::max(1e-300, std::abs(exact)));
        ++hess.samples;
    }
    hess.skipped = hess.samples == 0;
    if (hess.skipped) hess.note = "no zero-level point with discrete stabilizer and all coordinates nonzero";
    out.push_back(hess);
    return out;
}

}  // namespace equiloc
