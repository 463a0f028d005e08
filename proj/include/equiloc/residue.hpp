#pragma once

#include <boost/math/quadrature/sinh_sinh.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "equiloc/core/errors.hpp"
#include "equiloc/core/linalg.hpp"
#include "equiloc/core/polynomial.hpp"
#include "equiloc/desing.hpp"
#include "equiloc/level_set.hpp"
#include "equiloc/symplectic.hpp"

namespace equiloc {

/// Isolated (dim = 0) or higher-dimensional fixed component with its normal weights.
struct FixedPointDatum {
    std::string label;
    int dim = 0;
    RationalVector J;                  // value of the momentum map at F
    IntMatrix weights;                 // normal weights lambda_q
    std::vector<std::string> chern;    // nilpotent generators, one per weight when dim > 0

    int rank() const { return static_cast<int>(J.size()); }

    void validate() const {
        if (dim < 0 || dim % 2 != 0) fail(ErrorKind::domain, "fixed component dimension must be even and nonnegative");
        for (const auto& w : weights) {
            if (static_cast<int>(w.size()) != rank()) fail(ErrorKind::shape, "weight of " + label + " has wrong length");
            if (std::all_of(w.begin(), w.end(), [](long long x) { return x == 0; }))
                fail(ErrorKind::domain, "zero weight at fixed point " + label);
        }
        if (dim > 0 && chern.size() != weights.size())
            fail(ErrorKind::shape, "fixed component " + label + " needs one nilpotent generator per weight");
    }
};

namespace detail {

inline Rational pairing(const std::vector<long long>& w, const RationalVector& y) {
    Rational s = 0;
    for (std::size_t k = 0; k < w.size(); ++k) s += Rational(w[k]) * y[k];
    return s;
}

inline Polynomial truncate(const Polynomial& p, int degree) {
    Polynomial r(p.nvars());
    for (const auto& [e, c] : p.terms()) {
        int d = 0;
        for (int x : e) d += x;
        if (d <= degree) r.add_term(e, c);
    }
    return r;
}

}  // namespace detail

/// prod_q (c_q + lambda_q(Y))^{-1} in the ring truncated above degree dim/2 in the generators c_q.
inline Polynomial euler_class_inverse(const FixedPointDatum& f, const RationalVector& y) {
    f.validate();
    if (static_cast<int>(y.size()) != f.rank()) fail(ErrorKind::shape, "evaluation point has wrong dimension");
    int q = static_cast<int>(f.weights.size());
    int top = f.dim / 2;
    Polynomial result = Polynomial::constant(q, 1);
    for (int i = 0; i < q; ++i) {
        Rational lam = detail::pairing(f.weights[i], y);
        if (lam == 0) fail(ErrorKind::hyperplane, "weight " + std::to_string(i + 1) + " of " + f.label + " vanishes at Y");
        Polynomial series(q);
        Polynomial step = Polynomial::constant(q, 1 / lam);
        Polynomial ratio = Polynomial::variable(q, i) * (-1 / lam);
        for (int k = 0; k <= top; ++k) {
            series += step;
            step = detail::truncate(step * ratio, top);
        }
        result = detail::truncate(result * series, top);
    }
    return result;
}

/// prod_q (c_q + lambda_q(Y)) truncated, for checking the inverse.
inline Polynomial euler_class(const FixedPointDatum& f, const RationalVector& y) {
    int q = static_cast<int>(f.weights.size());
    Polynomial result = Polynomial::constant(q, 1);
    for (int i = 0; i < q; ++i)
        result = detail::truncate(result * (Polynomial::variable(q, i) + Polynomial::constant(q, detail::pairing(f.weights[i], y))),
                                  f.dim / 2);
    return result;
}

/**
 * e^{i<lambda, Y>} N(zeta) / prod_j <alpha_j, zeta>^{r_j} in the variable zeta = iY,
 * so that all coefficients stay rational.
 */
struct RationalExpTerm {
    RationalVector exponent;
    Polynomial numerator;
    std::vector<std::pair<std::vector<long long>, int>> denominators;

    int rank() const { return static_cast<int>(exponent.size()); }

    Complex evaluate(const std::vector<double>& y) const {
        int r = rank();
        std::vector<Complex> zeta(r);
        double phase = 0;
        for (int k = 0; k < r; ++k) {
            zeta[k] = Complex(0, y[k]);
            phase += to_double(exponent[k]) * y[k];
        }
        Complex v = numerator.evaluate(zeta) * std::polar(1.0, phase);
        for (const auto& [a, m] : denominators) {
            Complex s = 0;
            for (int k = 0; k < r; ++k) s += static_cast<double>(a[k]) * zeta[k];
            if (s == Complex(0)) fail(ErrorKind::hyperplane, "denominator vanishes at Y");
            v /= std::pow(s, m);
        }
        return v;
    }
};

/// Terms of sum_F e^{iJ_F(Y)} rho / prod_q lambda_q(iY) over isolated fixed points.
inline std::vector<RationalExpTerm> localization_terms(const std::vector<FixedPointDatum>& data, const Rational& rho) {
    std::vector<RationalExpTerm> out;
    if (rho == 0) return out;
    for (const auto& f : data) {
        f.validate();
        if (f.dim != 0) fail(ErrorKind::capability, "only isolated fixed points are supported (" + f.label + ")");
        RationalExpTerm t;
        t.exponent = f.J;
        t.numerator = Polynomial::constant(f.rank(), rho);
        std::map<std::vector<long long>, int> mult;
        for (const auto& w : f.weights) ++mult[w];
        for (const auto& [w, m] : mult) t.denominators.push_back({w, m});
        out.push_back(t);
    }
    return out;
}

/// Sum of the fixed-point contributions at a real regular Y; equals (-2 pi i)^{-n} times the equivariant integral.
inline Complex localization_sum(const std::vector<FixedPointDatum>& data, const Rational& rho, const std::vector<double>& y) {
    Complex s = 0;
    for (const auto& t : localization_terms(data, rho)) s += t.evaluate(y);
    return s;
}

/// Open cone generated by rays; the boundary values Y + iZ are taken with Z inside it.
struct ConeLambda {
    RationalMatrix rays;

    int rank() const { return rays.empty() ? 0 : static_cast<int>(rays[0].size()); }

    /// +1 or -1 when the covector has that sign on the whole cone.
    int sign_of(const std::vector<long long>& alpha) const {
        if (rays.empty()) fail(ErrorKind::cone, "cone has no rays");
        int sg = 0;
        for (const auto& z : rays) {
            int s = sign(detail::pairing(alpha, z));
            if (s == 0 || (sg != 0 && s != sg)) {
                std::string w = "(";
                for (std::size_t k = 0; k < alpha.size(); ++k) w += (k ? "," : "") + std::to_string(alpha[k]);
                fail(ErrorKind::cone, "cone meets the hyperplane of " + w + ")");
            }
            sg = s;
        }
        return sg;
    }

    bool contains(const RationalVector& z) const {
        // z is a positive combination of the rays (rank <= 2 cones only need a sign test)
        auto c = nonnegative_solution(transpose(rays, rank()), z, static_cast<int>(rays.size()));
        return c && std::all_of(c->begin(), c->end(), [](const Rational& x) { return x >= 0; }) &&
               std::any_of(c->begin(), c->end(), [](const Rational& x) { return x > 0; });
    }
};

/// normal . xi >= offset, or the distribution delta^{(order)}(normal . xi - offset) when order >= 0.
struct MeasureCondition {
    RationalVector normal;
    Rational offset;
    int delta_order = -1;

    bool is_delta() const { return delta_order >= 0; }
    auto key() const { return std::tie(normal, offset, delta_order); }
    bool operator<(const MeasureCondition& o) const { return key() < o.key(); }
    bool operator==(const MeasureCondition& o) const { return key() == o.key(); }

    std::string to_string() const {
        std::string s = "[";
        for (std::size_t k = 0; k < normal.size(); ++k) s += (k ? "," : "") + equiloc::to_string(normal[k]);
        s += "]";
        if (is_delta()) return "delta" + std::to_string(delta_order) + "(" + s + ".xi-" + equiloc::to_string(offset) + ")";
        return s + ".xi>=" + equiloc::to_string(offset);
    }
};

struct MeasurePiece {
    std::vector<MeasureCondition> conditions;
    Polynomial density;  // in xi
};

struct MeasureAtom {
    Rational point;
    int order = 0;
    Rational weight;
};

/// Sum of pieces (2 pi)^{two_pi_power} * density(xi) * prod conditions.
struct PiecewisePolyMeasure {
    int rank = 1;
    int two_pi_power = 0;
    std::vector<MeasurePiece> pieces;

    bool has_atoms() const {
        for (const auto& p : pieces)
            for (const auto& c : p.conditions)
                if (c.is_delta()) return true;
        return false;
    }

    double scale() const { return std::pow(2 * M_PI, two_pi_power); }

    /// Density of the absolutely continuous part at xi, ignoring boundaries of measure zero.
    double density(const std::vector<double>& xi) const {
        double s = 0;
        for (const auto& p : pieces) {
            bool active = true;
            for (const auto& c : p.conditions) {
                if (c.is_delta()) {
                    active = false;
                    break;
                }
                double v = -to_double(c.offset);
                for (int k = 0; k < rank; ++k) v += to_double(c.normal[k]) * xi[k];
                if (v < 0) {
                    active = false;
                    break;
                }
            }
            if (active) s += p.density.evaluate(xi);
        }
        return s * scale();
    }

    /// Rank 1: sorted breakpoints of all conditions.
    std::vector<Rational> breakpoints() const {
        if (rank != 1) fail(ErrorKind::capability, "breakpoints are defined for rank 1");
        std::vector<Rational> b;
        for (const auto& p : pieces)
            for (const auto& c : p.conditions) b.push_back(c.offset / c.normal[0]);
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

    /// Rank 1: exact polynomial on each open interval (lo, hi); infinite ends are marked by flags.
    struct Interval {
        std::optional<Rational> lo, hi;
        Polynomial density;
    };

    std::vector<Interval> intervals() const {
        std::vector<Rational> b = breakpoints();
        std::vector<Interval> out;
        auto sample = [&](std::size_t i) -> Rational {
            if (b.empty()) return 0;
            if (i == 0) return b[0] - 1;
            if (i == b.size()) return b.back() + 1;
            return (b[i - 1] + b[i]) / 2;
        };
        for (std::size_t i = 0; i <= b.size(); ++i) {
            Interval iv;
            if (i > 0) iv.lo = b[i - 1];
            if (i < b.size()) iv.hi = b[i];
            iv.density = Polynomial(1);
            Rational x = sample(i);
            for (const auto& p : pieces) {
                bool active = true;
                for (const auto& c : p.conditions)
                    if (c.is_delta() || c.normal[0] * x - c.offset < 0) active = false;
                if (active) iv.density += p.density;
            }
            out.push_back(iv);
        }
        return out;
    }

    /// Rank 1: point masses delta^{(order)}(xi - point) with exact weights.
    std::vector<MeasureAtom> atoms() const {
        std::vector<MeasureAtom> out;
        if (rank != 1) fail(ErrorKind::capability, "atoms are listed for rank 1");
        for (const auto& p : pieces)
            for (const auto& c : p.conditions)
                if (c.is_delta()) {
                    Rational l = c.normal[0];
                    Rational w = p.density.evaluate(RationalVector{c.offset / l}) * rational_pow(l, -c.delta_order) / abs(l);
                    out.push_back({c.offset / l, c.delta_order, w});
                }
        return out;
    }

    std::string serialize() const {
        std::ostringstream out;
        out << "# measure rank " << rank << " two_pi_power " << two_pi_power << "\n";
        auto poly_text = [](const Polynomial& p) {
            std::string s;
            for (const auto& [e, c] : p.terms()) {
                s += " " + to_string(c);
                for (std::size_t k = 0; k < e.size(); ++k)
                    if (e[k]) s += "*xi" + std::to_string(k + 1) + "^" + std::to_string(e[k]);
            }
            return s.empty() ? std::string(" 0") : s;
        };
        if (rank == 1 && !has_atoms()) {
            for (const auto& iv : intervals()) {
                if (iv.density.is_zero()) continue;
                out << "interval " << (iv.lo ? to_string(*iv.lo) : "-inf") << " " << (iv.hi ? to_string(*iv.hi) : "inf")
                    << " coeffs";
                int deg = std::max(0, iv.density.total_degree());
                for (int k = 0; k <= deg; ++k) out << " " << to_string(iv.density.coefficient({k}));
                out << "\n";
            }
            return out.str();
        }
        for (const auto& p : pieces) {
            out << "piece";
            for (const auto& c : p.conditions) out << " " << c.to_string();
            out << " |" << poly_text(p.density) << "\n";
        }
        return out.str();
    }
};

namespace detail {

inline std::vector<long long> primitive_of(const std::vector<long long>& a, long long& scale) {
    long long g = 0;
    for (long long x : a) g = std::gcd(g, std::llabs(x));
    if (g == 0) fail(ErrorKind::hyperplane, "zero covector in a denominator");
    std::vector<long long> p(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) p[k] = a[k] / g;
    scale = g;
    return p;
}

struct ReducedTerm {
    RationalVector exponent;
    Polynomial numerator;
    std::vector<std::pair<std::vector<long long>, int>> forms;  // primitive, positive on the cone, pairwise independent
};

/// Normalizes denominators and applies 1/(a b) = (c1/(b g) + c2/(a g)) for g = c1 a + c2 b until at most rank forms remain.
inline std::vector<ReducedTerm> partial_fractions(const RationalExpTerm& t, const ConeLambda& cone) {
    int r = t.rank();
    ReducedTerm base{t.exponent, t.numerator, {}};
    std::map<std::vector<long long>, int> forms;
    Rational coef = 1;
    for (const auto& [a, m] : t.denominators) {
        if (static_cast<int>(a.size()) != r) fail(ErrorKind::shape, "denominator covector has wrong length");
        long long g = 0;
        std::vector<long long> p = primitive_of(a, g);
        int sg = cone.sign_of(p);
        if (sg < 0)
            for (auto& x : p) x = -x;
        coef /= rational_pow(Rational(g * sg), m);
        forms[p] += m;
    }
    base.numerator = base.numerator * coef;
    for (const auto& f : forms) base.forms.push_back(f);
    std::vector<ReducedTerm> done, work{base};
    while (!work.empty()) {
        ReducedTerm cur = work.back();
        work.pop_back();
        if (static_cast<int>(cur.forms.size()) <= r) {
            done.push_back(cur);
            continue;
        }
        if (r != 2) fail(ErrorKind::capability, "partial fractions implemented for rank <= 2");
        const auto& a = cur.forms[0].first;
        const auto& b = cur.forms[1].first;
        const auto& g = cur.forms[2].first;
        RationalMatrix m{{Rational(a[0]), Rational(b[0])}, {Rational(a[1]), Rational(b[1])}};
        RationalVector c = mat_vec(inverse(m), {Rational(g[0]), Rational(g[1])});
        for (int side = 0; side < 2; ++side) {
            ReducedTerm nt = cur;
            nt.numerator = nt.numerator * c[side];
            nt.forms[side].second -= 1;
            nt.forms[2].second += 1;
            nt.forms.erase(std::remove_if(nt.forms.begin(), nt.forms.end(), [](const auto& f) { return f.second == 0; }),
                           nt.forms.end());
            if (!nt.numerator.is_zero()) work.push_back(nt);
        }
    }
    return done;
}

/// One-dimensional transform of e^{i l y} (i y)^{-m} with the pole pushed to the positive side, at x = xi' - l.
inline MeasurePiece kernel_piece(const Polynomial& x, const RationalVector& normal, const Rational& offset, int m) {
    MeasurePiece p;
    int nv = x.nvars();
    if (m >= 1) {
        Polynomial minus_x = x * Rational(-1);
        p.density = minus_x.pow(m - 1) * (Rational(-1) / factorial(m - 1));
        p.conditions.push_back({normal, offset, -1});
    } else {
        p.density = Polynomial::constant(nv, (-m) % 2 == 0 ? 1 : -1);
        p.conditions.push_back({normal, offset, -m});
    }
    return p;
}

inline void merge_pieces(PiecewisePolyMeasure& u) {
    std::map<std::vector<MeasureCondition>, Polynomial> acc;
    for (auto& p : u.pieces) {
        std::sort(p.conditions.begin(), p.conditions.end());
        auto it = acc.find(p.conditions);
        if (it == acc.end()) acc.emplace(p.conditions, p.density);
        else it->second += p.density;
    }
    u.pieces.clear();
    for (auto& [c, d] : acc)
        if (!d.is_zero()) u.pieces.push_back({c, d});
}

}  // namespace detail

/**
 * Fourier transform U(xi) = int e^{-i<xi, Y>} u(Y) dY of a sum of terms, with u taken as the boundary
 * value from Y + iZ, Z in the cone. Rank 2 uses the basis of the two remaining denominators as the flag.
 */
inline PiecewisePolyMeasure fourier_piecewise(const std::vector<RationalExpTerm>& terms, const ConeLambda& cone) {
    int r = cone.rank();
    if (r < 1) fail(ErrorKind::cone, "cone has no rays");
    if (r > 2) fail(ErrorKind::capability, "Fourier transforms implemented for rank <= 2");
    PiecewisePolyMeasure u;
    u.rank = r;
    u.two_pi_power = r;
    for (const auto& t : terms) {
        if (t.rank() != r) fail(ErrorKind::shape, "term rank differs from the cone");
        for (const auto& red : detail::partial_fractions(t, cone)) {
            // basis A: rows are the remaining forms, completed by unit covectors
            IntMatrix rows;
            std::vector<int> powers;
            for (const auto& [f, m] : red.forms) {
                rows.push_back(f);
                powers.push_back(m);
            }
            for (int k = 0; k < r && static_cast<int>(rows.size()) < r; ++k) {
                std::vector<long long> e(r, 0);
                e[k] = 1;
                IntMatrix trial = rows;
                trial.push_back(e);
                if (rank(trial, r) == static_cast<int>(trial.size())) {
                    rows.push_back(e);
                    powers.push_back(0);
                }
            }
            RationalMatrix a = to_rational(rows);
            RationalMatrix ainv = inverse(a);
            Rational det = abs(determinant(a));
            // zeta = A^{-1} (u, v): numerator in the new variables
            std::vector<Polynomial> images;
            for (int k = 0; k < r; ++k) images.push_back(Polynomial::linear(ainv[k]));
            Polynomial num = red.numerator.compose(images);
            // xi' = A^{-T} xi, lambda' = A^{-T} lambda
            RationalMatrix ainv_t = transpose(ainv, r);
            RationalVector lam = mat_vec(ainv_t, red.exponent);
            std::vector<Polynomial> xprime;
            for (int k = 0; k < r; ++k) xprime.push_back(Polynomial::linear(ainv_t[k]) + Polynomial::constant(r, -lam[k]));
            for (const auto& [e, c] : num.terms()) {
                MeasurePiece piece{{}, Polynomial::constant(r, c / det)};
                for (int k = 0; k < r; ++k) {
                    MeasurePiece f = detail::kernel_piece(xprime[k], ainv_t[k], lam[k], powers[k] - e[k]);
                    piece.density = piece.density * f.density;
                    piece.conditions.push_back(f.conditions[0]);
                }
                u.pieces.push_back(piece);
            }
        }
    }
    detail::merge_pieces(u);
    return u;
}

/// Coefficient of (2 pi)^{two_pi_power} in lim_{t -> 0+} U(t eta).
inline Rational jk_residue_exact(const PiecewisePolyMeasure& u, const RationalVector& eta) {
    if (static_cast<int>(eta.size()) != u.rank) fail(ErrorKind::shape, "eta has wrong dimension");
    if (std::all_of(eta.begin(), eta.end(), [](const Rational& x) { return x == 0; }))
        fail(ErrorKind::domain, "eta must be nonzero");
    Rational total = 0;
    for (const auto& p : u.pieces) {
        bool active = true;
        for (const auto& c : p.conditions) {
            Rational v0 = -c.offset;
            Rational v1 = 0;
            for (int k = 0; k < u.rank; ++k) v1 += c.normal[k] * eta[k];
            if (v0 == 0 && v1 == 0) fail(ErrorKind::wall, "eta lies on the wall " + c.to_string());
            if (c.is_delta()) {
                active = false;
                continue;
            }
            if (v0 < 0 || (v0 == 0 && v1 < 0)) active = false;
        }
        if (active) total += p.density.evaluate(RationalVector(u.rank, Rational(0)));
    }
    return total;
}

inline double jk_residue(const PiecewisePolyMeasure& u, const RationalVector& eta) {
    return to_double(jk_residue_exact(u, eta)) * u.scale();
}

struct CompactGroupData {
    std::string name;
    int rank = 1;
    RationalMatrix positive_roots;
    long long weyl_order = 1;
    double vol_torus = 2 * M_PI;
    double vol_group = 2 * M_PI;

    int dim() const { return rank + 2 * static_cast<int>(positive_roots.size()); }

    static CompactGroupData torus(int r) {
        double v = std::pow(2 * M_PI, r);
        return {"torus", r, {}, 1, v, v};
    }

    /// su(2) = R^3 with the standard inner product; the torus is the last axis and the root is y.
    static CompactGroupData su2() { return {"su2", 1, {{Rational(1)}}, 2, 2 * M_PI, 8 * M_PI * M_PI}; }

    double root_product(const std::vector<double>& y) const {
        double p = 1;
        for (const auto& g : positive_roots) {
            double s = 0;
            for (int k = 0; k < rank; ++k) s += to_double(g[k]) * y[k];
            p *= s;
        }
        return p;
    }
};

namespace detail {

inline std::vector<double> random_rotation_apply(std::mt19937_64& rng, const std::vector<double>& x) {
    std::normal_distribution<double> n(0.0, 1.0);
    double q[4];
    double norm = 0;
    for (double& c : q) {
        c = n(rng);
        norm += c * c;
    }
    norm = std::sqrt(norm);
    for (double& c : q) c /= norm;
    double w = q[0], a = q[1], b = q[2], c = q[3];
    double m[3][3] = {{1 - 2 * (b * b + c * c), 2 * (a * b - w * c), 2 * (a * c + w * b)},
                      {2 * (a * b + w * c), 1 - 2 * (a * a + c * c), 2 * (b * c - w * a)},
                      {2 * (a * c - w * b), 2 * (b * c + w * a), 1 - 2 * (a * a + b * b)}};
    std::vector<double> y(3, 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) y[i] += m[i][j] * x[j];
    return y;
}

}  // namespace detail

/// int_g F = vol G / (|W| vol T) * int_t F(Y) prod_roots(Y)^2 dY, with t the last `rank` coordinates of g.
inline double weyl_lie_algebra_integral(const CompactGroupData& g, const std::function<double(const std::vector<double>&)>& f,
                                        unsigned seed = 7) {
    int d = g.dim();
    if (g.name == "su2") {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n(0.0, 1.0);
        for (int trial = 0; trial < 8; ++trial) {
            std::vector<double> x{n(rng), n(rng), n(rng)};
            double a = f(x), b = f(detail::random_rotation_apply(rng, x));
            if (std::abs(a - b) > 1e-9 * (1 + std::abs(a)))
                fail(ErrorKind::precondition, "integrand is not invariant under conjugation");
        }
    }
    boost::math::quadrature::sinh_sinh<double> integrator;
    std::vector<double> x(d, 0.0), y(g.rank, 0.0);
    std::function<double(int)> nested = [&](int k) -> double {
        return integrator.integrate([&, k](double t) {
            y[k] = t;
            x[d - g.rank + k] = t;
            if (k + 1 == g.rank) {
                double phi = g.root_product(y);
                double v = f(x) * phi * phi;
                return std::isfinite(v) ? v : 0.0;
            }
            return nested(k + 1);
        });
    };
    return g.vol_group / (static_cast<double>(g.weyl_order) * g.vol_torus) * nested(0);
}

/// Duistermaat-Heckman measure from isolated fixed-point data with n normal weights at each point.
inline PiecewisePolyMeasure dh_measure(const std::vector<FixedPointDatum>& data, const ConeLambda& cone) {
    PiecewisePolyMeasure u = fourier_piecewise(localization_terms(data, 1), cone);
    if (data.empty()) return u;
    std::size_t n = data[0].weights.size();
    for (const auto& f : data)
        if (f.weights.size() != n) fail(ErrorKind::shape, "fixed points have different numbers of weights");
    u.two_pi_power += static_cast<int>(n) - u.rank;
    return u;
}

/// The origin as the only fixed point, with a cone on which every weight is negative.
inline std::pair<std::vector<FixedPointDatum>, ConeLambda> linear_fixed_point_data(const LinearHamiltonianModel& model) {
    int r = model.torus_rank, n = model.complex_dim;
    FixedPointDatum origin{"origin", 0, RationalVector(r, Rational(0)), model.weights, {}};
    origin.validate();
    // Z = Zp - Zm with w_j . Z + s_j = -1, s >= 0
    RationalMatrix a(n, RationalVector(2 * r + n, Rational(0)));
    RationalVector b(n, Rational(-1));
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < r; ++k) {
            a[j][k] = Rational(model.weights[j][k]);
            a[j][r + k] = -Rational(model.weights[j][k]);
        }
        a[j][2 * r + j] = 1;
    }
    auto sol = nonnegative_solution(a, b, 2 * r + n);
    if (!sol) fail(ErrorKind::unsupported_model, "momentum map is not proper: no direction makes every weight negative");
    RationalVector z(r);
    for (int k = 0; k < r; ++k) z[k] = (*sol)[k] - (*sol)[r + k];
    return {{origin}, ConeLambda{{z}}};
}

inline PiecewisePolyMeasure dh_measure(const LinearHamiltonianModel& model) {
    auto [data, cone] = linear_fixed_point_data(model);
    return dh_measure(data, cone);
}

/// Fixed points of the cut {sum_j |z_j|^2 / 2 <= R}: the origin and one vertex per coordinate.
inline std::vector<FixedPointDatum> cut_fixed_points(const LinearHamiltonianModel& model, const Rational& radius) {
    if (radius <= 0) fail(ErrorKind::domain, "cut radius must be positive");
    int n = model.complex_dim, r = model.torus_rank;
    std::vector<FixedPointDatum> out;
    out.push_back({"origin", 0, RationalVector(r, Rational(0)), model.weights, {}});
    for (int k = 0; k < n; ++k) {
        FixedPointDatum v;
        v.label = "vertex" + std::to_string(k + 1);
        v.J.assign(r, Rational(0));
        for (int c = 0; c < r; ++c) v.J[c] = -radius * Rational(model.weights[k][c]);
        std::vector<long long> minus(r);
        for (int c = 0; c < r; ++c) minus[c] = -model.weights[k][c];
        v.weights.push_back(minus);
        for (int j = 0; j < n; ++j) {
            if (j == k) continue;
            std::vector<long long> d(r);
            for (int c = 0; c < r; ++c) d[c] = model.weights[j][c] - model.weights[k][c];
            v.weights.push_back(d);
        }
        out.push_back(v);
    }
    for (const auto& f : out) {
        for (const auto& w : f.weights)
            if (std::all_of(w.begin(), w.end(), [](long long x) { return x == 0; }))
                fail(ErrorKind::capability, "cut has non-isolated fixed points at " + f.label);
    }
    return out;
}

struct ResidueCheck {
    Complex lhs;
    Complex rhs;
    double difference = 0;
    Rational residue;  // coefficient of (2 pi)^rank
    double reduced_volume_integral = 0;
    std::vector<FixedPointDatum> data;
};

/**
 * Reduced-space side against the residue side for the constant form alpha on the cut of radius R:
 * lhs = (-2 pi i)^r (-i)^{n-r} |H| / vol G * L0,  rhs = |H| / (|W| vol T) * (-2 pi i)^n * Res.
 */
inline ResidueCheck residue_formula_check(const LinearHamiltonianModel& model, const Rational& alpha, const Rational& radius,
                                          const ConeLambda& cone, const RationalVector& eta,
                                          const LevelSetOptions& opt = {}) {
    int n = model.complex_dim, r = model.torus_rank;
    ResidueCheck out;
    out.data = cut_fixed_points(model, radius);
    if (alpha == 0) {
        out.residue = 0;
        return out;
    }
    CompactGroupData g = CompactGroupData::torus(r);
    SupportBox everywhere;
    StrataCatalog cat = strata_catalog(model, everywhere);
    double order = static_cast<double>(cat.strata[cat.regular].finite_order.value_or(1));
    double R = to_double(radius);
    HalfSpace cut{std::vector<double>(n, 1.0), R};
    AmplitudeExpr one = AmplitudeExpr::constant(model.real_dim(), r, 1);
    out.reduced_volume_integral = level_set_integral(model, one, std::vector<double>(r, 0.0), std::vector<double>(n, R), {cut}, opt);
    Complex m2pii(0, -2 * M_PI);
    Complex mi(0, -1);
    double a = to_double(alpha);
    out.lhs = a * std::pow(m2pii, r) * std::pow(mi, n - r) * (order / g.vol_group) * out.reduced_volume_integral;
    PiecewisePolyMeasure u = fourier_piecewise(localization_terms(out.data, 1), cone);
    out.residue = jk_residue_exact(u, eta);
    double res = to_double(out.residue) * u.scale();
    out.rhs = a * (order / (static_cast<double>(g.weyl_order) * g.vol_torus)) * std::pow(m2pii, n) * res;
    out.difference = std::abs(out.lhs - out.rhs);
    return out;
}

inline std::vector<FixedPointDatum> sphere_fixed_points() {
    return {{"north", 0, {Rational(1)}, {{1}}, {}}, {"south", 0, {Rational(-1)}, {{-1}}, {}}};
}

}  // namespace equiloc
