#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "equiloc/core/errors.hpp"
#include "equiloc/core/linalg.hpp"
#include "equiloc/core/quadrature.hpp"

namespace equiloc {

using RealVector = std::vector<double>;

/**
 * C^n = R^{2n} with coordinates (x_1, y_1, ..., x_n, y_n), standard form
 * sum dx_j ^ dy_j, and a rank-r torus acting on z_j with integer weight row w_j.
 * Momentum map: J(v)(X) = -sum_j (w_j . X) |z_j|^2 / 2.
 */
struct LinearHamiltonianModel {
    int complex_dim = 0;
    int torus_rank = 0;
    IntMatrix weights;

    static LinearHamiltonianModel from_weights(const IntMatrix& w) {
        if (w.empty()) fail(ErrorKind::shape, "weight matrix has no rows");
        int r = static_cast<int>(w[0].size());
        if (r == 0) fail(ErrorKind::shape, "torus rank must be positive");
        bool nonzero = false;
        for (const auto& row : w) {
            if (static_cast<int>(row.size()) != r) fail(ErrorKind::shape, "ragged weight matrix");
            for (long long x : row) nonzero = nonzero || x != 0;
        }
        if (!nonzero) fail(ErrorKind::shape, "weight matrix needs a nonzero row");
        return {static_cast<int>(w.size()), r, w};
    }

    int real_dim() const { return 2 * complex_dim; }

    double pairing(int j, const RealVector& X) const {
        double s = 0;
        for (int k = 0; k < torus_rank; ++k) s += static_cast<double>(weights[j][k]) * X[k];
        return s;
    }

    std::string describe() const {
        std::string s = "(";
        for (int j = 0; j < complex_dim; ++j) {
            if (j) s += ",";
            if (torus_rank > 1) s += "[";
            for (int k = 0; k < torus_rank; ++k) s += (k ? "," : "") + std::to_string(weights[j][k]);
            if (torus_rank > 1) s += "]";
        }
        return s + ")";
    }
};

inline double modulus_squared(const RealVector& v, int j) { return v[2 * j] * v[2 * j] + v[2 * j + 1] * v[2 * j + 1]; }

inline void check_point(const LinearHamiltonianModel& model, const RealVector& v) {
    if (static_cast<int>(v.size()) != model.real_dim()) fail(ErrorKind::shape, "point has wrong dimension");
}

inline RealVector momentum_map(const LinearHamiltonianModel& model, const RealVector& v) {
    check_point(model, v);
    RealVector J(model.torus_rank, 0.0);
    for (int j = 0; j < model.complex_dim; ++j) {
        double m = modulus_squared(v, j);
        for (int k = 0; k < model.torus_rank; ++k) J[k] -= 0.5 * static_cast<double>(model.weights[j][k]) * m;
    }
    return J;
}

inline double momentum_value(const LinearHamiltonianModel& model, const RealVector& v, const RealVector& X) {
    RealVector J = momentum_map(model, v);
    double s = 0;
    for (int k = 0; k < model.torus_rank; ++k) s += J[k] * X[k];
    return s;
}

/// Fundamental vector field X~_v = d/dt exp(-tX).v at t = 0.
inline RealVector fundamental_field(const LinearHamiltonianModel& model, const RealVector& v, const RealVector& X) {
    RealVector f(model.real_dim());
    for (int j = 0; j < model.complex_dim; ++j) {
        double c = model.pairing(j, X);
        f[2 * j] = c * v[2 * j + 1];
        f[2 * j + 1] = -c * v[2 * j];
    }
    return f;
}

inline double symplectic_pairing(const RealVector& u, const RealVector& w) {
    double s = 0;
    for (std::size_t j = 0; j + 1 < u.size(); j += 2) s += u[j] * w[j + 1] - u[j + 1] * w[j];
    return s;
}

using MomentumFunction = std::function<RealVector(const RealVector&)>;

/// max_k |dJ_X(v)[e_k] + omega(X~_v, e_k)| with dJ_X from central differences of `J`.
inline double momentum_defect(const LinearHamiltonianModel& model, const RealVector& v, const RealVector& X, double h,
                              const MomentumFunction& J) {
    if (!(h > 0)) fail(ErrorKind::precondition, "finite-difference step must be positive");
    RealVector field = fundamental_field(model, v, X);
    auto pair = [&](const RealVector& c) {
        double s = 0;
        for (int k = 0; k < model.torus_rank; ++k) s += c[k] * X[k];
        return s;
    };
    double worst = 0;
    for (int k = 0; k < model.real_dim(); ++k) {
        RealVector plus = v, minus = v;
        plus[k] += h;
        minus[k] -= h;
        double dJ = (pair(J(plus)) - pair(J(minus))) / (2 * h);
        RealVector e(model.real_dim(), 0.0);
        e[k] = 1;
        worst = std::max(worst, std::abs(dJ + symplectic_pairing(field, e)));
    }
    return worst;
}

inline double momentum_defect(const LinearHamiltonianModel& model, const RealVector& v, const RealVector& X, double h) {
    return momentum_defect(model, v, X, h, [&](const RealVector& p) { return momentum_map(model, p); });
}

struct IsotropyDatum {
    int algebra_dim = 0;
    std::optional<long long> finite_order;

    std::string order_string() const { return finite_order ? std::to_string(*finite_order) : "infinite"; }
    bool operator==(const IsotropyDatum& o) const = default;
};

inline std::vector<int> active_coordinates(const RealVector& v) {
    std::vector<int> s;
    for (std::size_t j = 0; 2 * j + 1 < v.size(); ++j)
        if (v[2 * j] != 0 || v[2 * j + 1] != 0) s.push_back(static_cast<int>(j));
    return s;
}

inline IntMatrix weight_rows(const LinearHamiltonianModel& model, const std::vector<int>& coords) {
    IntMatrix rows;
    for (int j : coords) rows.push_back(model.weights[j]);
    return rows;
}

/// Stabilizer type of any point whose nonzero coordinates are exactly `support`.
inline IsotropyDatum isotropy_of_support(const LinearHamiltonianModel& model, const std::vector<int>& support) {
    IntMatrix rows = weight_rows(model, support);
    int rk = rows.empty() ? 0 : rank(rows, model.torus_rank);
    IsotropyDatum d;
    d.algebra_dim = model.torus_rank - rk;
    if (d.algebra_dim == 0) {
        BigInt order = 1;
        for (const auto& f : smith_invariants(to_big(rows), model.torus_rank)) order *= f;
        d.finite_order = static_cast<long long>(order);
    }
    return d;
}

inline IsotropyDatum isotropy(const LinearHamiltonianModel& model, const RealVector& v) {
    check_point(model, v);
    return isotropy_of_support(model, active_coordinates(v));
}

struct SliceDecomposition {
    std::vector<RealVector> stabilizer_subalgebra;
    std::vector<RealVector> complement_m;
    std::vector<int> fixed_subspace;
    std::vector<int> symplectic_complement;
    IntMatrix stabilizer_lattice;  // primitive integer generators of h, one per row
};

inline SliceDecomposition slice_decomposition(const LinearHamiltonianModel& model, const RealVector& v) {
    check_point(model, v);
    int r = model.torus_rank;
    IntMatrix rows = weight_rows(model, active_coordinates(v));
    RationalMatrix a = to_rational(rows);
    auto h = rows.empty() ? std::vector<RationalVector>{} : nullspace(a, r);
    if (rows.empty()) {
        for (int k = 0; k < r; ++k) {
            RationalVector e(r, Rational(0));
            e[k] = 1;
            h.push_back(e);
        }
    }
    SliceDecomposition d;
    RationalMatrix hmat;
    for (const auto& vec : h) {
        auto prim = primitive_integer(vec);
        d.stabilizer_lattice.push_back(prim);
        RealVector dv;
        for (long long x : prim) dv.push_back(static_cast<double>(x));
        d.stabilizer_subalgebra.push_back(dv);
        RationalVector q;
        for (long long x : prim) q.push_back(Rational(x));
        hmat.push_back(q);
    }
    auto m = hmat.empty() ? std::vector<RationalVector>{} : nullspace(hmat, r);
    if (hmat.empty()) {
        for (int k = 0; k < r; ++k) {
            RealVector e(r, 0.0);
            e[k] = 1;
            d.complement_m.push_back(e);
        }
    }
    for (const auto& vec : m) {
        RealVector dv;
        for (long long x : primitive_integer(vec)) dv.push_back(static_cast<double>(x));
        d.complement_m.push_back(dv);
    }
    for (int j = 0; j < model.complex_dim; ++j) {
        bool fixed = true;
        for (const auto& gen : d.stabilizer_lattice) {
            long long s = 0;
            for (int k = 0; k < r; ++k) s += model.weights[j][k] * gen[k];
            if (s != 0) fixed = false;
        }
        (fixed ? d.fixed_subspace : d.symplectic_complement).push_back(j);
    }
    return d;
}

/// The torus with Lie algebra spanned by `generators` acting on the listed coordinates.
inline LinearHamiltonianModel restrict_model(const LinearHamiltonianModel& model, const std::vector<int>& coords,
                                             const IntMatrix& generators) {
    IntMatrix w;
    for (int j : coords) {
        std::vector<long long> row;
        for (const auto& gen : generators) {
            long long s = 0;
            for (int k = 0; k < model.torus_rank; ++k) s += model.weights[j][k] * gen[k];
            row.push_back(s);
        }
        w.push_back(row);
    }
    LinearHamiltonianModel sub;
    sub.complex_dim = static_cast<int>(coords.size());
    sub.torus_rank = static_cast<int>(generators.size());
    sub.weights = w;
    return sub;
}

/// Phi(v) paired with each stabilizer generator of the decomposition.
inline RealVector restricted_momentum(const LinearHamiltonianModel& model, const SliceDecomposition& d,
                                      const RealVector& v) {
    RealVector out;
    for (const auto& gen : d.stabilizer_subalgebra) out.push_back(momentum_value(model, v, gen));
    return out;
}

inline bool on_zero_level(const LinearHamiltonianModel& model, const RealVector& p) {
    RealVector J = momentum_map(model, p);
    double nj = 0, np = 0;
    for (double x : J) nj += x * x;
    for (double x : p) np += x * x;
    return std::sqrt(nj) <= 1e-10 * (1 + np);
}

/// det(Xi - L_X L_X) on g.p; for a torus L_X vanishes on g.p, leaving the Gram determinant of the fundamental fields.
inline double transversal_hessian_det(const LinearHamiltonianModel& model, const RealVector& p, const RealVector& X) {
    check_point(model, p);
    if (!on_zero_level(model, p)) fail(ErrorKind::precondition, "point is off the zero level");
    IsotropyDatum iso = isotropy(model, p);
    if (iso.algebra_dim != 0) fail(ErrorKind::precondition, "point has a positive-dimensional stabilizer");
    for (double x : X)
        if (x != 0) fail(ErrorKind::precondition, "X must lie in the (trivial) stabilizer algebra");
    int r = model.torus_rank;
    std::vector<RealVector> fields;
    for (int k = 0; k < r; ++k) {
        RealVector e(r, 0.0);
        e[k] = 1;
        fields.push_back(fundamental_field(model, p, e));
    }
    Eigen::MatrixXd gram(r, r);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
            double s = 0;
            for (int i = 0; i < model.real_dim(); ++i) s += fields[a][i] * fields[b][i];
            gram(a, b) = s;
        }
    return gram.determinant();
}

/// Unit sphere with height momentum map J(p)(Y) = Y z and area form of total mass 4 pi.
struct SphereModel {
    int grid = 64;

    double momentum(const RealVector& point, double Y) const { return Y * point[2]; }

    /// Integral of f(x, y, z) dA by Gauss-Legendre in z and the trapezoid rule in the angle.
    template <class F>
    auto integrate(F&& f) const -> decltype(f(0.0, 0.0, 0.0)) {
        using R = decltype(f(0.0, 0.0, 0.0));
        if (grid < 1) fail(ErrorKind::precondition, "sphere grid must be positive");
        Rule1D zr = composite_gauss(-1.0, 1.0, panels_for(grid));
        int na = 2 * grid;
        std::vector<R> rows(zr.size());
        for (std::size_t i = 0; i < zr.size(); ++i) {
            double z = zr.nodes[i];
            double rho = std::sqrt(std::max(0.0, 1 - z * z));
            std::vector<R> ring(na);
            for (int a = 0; a < na; ++a) {
                double phi = 2 * M_PI * a / na;
                ring[a] = f(rho * std::cos(phi), rho * std::sin(phi), z);
            }
            rows[i] = pairwise_sum(ring) * (2 * M_PI / na) * zr.weights[i];
        }
        return pairwise_sum(rows);
    }

    /// Integral of e^{i(J_Y - omega)}: only the top-degree part -i e^{iJ_Y} omega survives.
    std::complex<double> equivariant_integral(double Y) const {
        auto v = integrate([&](double, double, double z) { return std::exp(std::complex<double>(0, Y * z)); });
        return std::complex<double>(0, -1) * v;
    }
};

}  // namespace equiloc
