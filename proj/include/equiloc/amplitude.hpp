#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "equiloc/core/errors.hpp"
#include "equiloc/core/polynomial.hpp"
#include "equiloc/core/smooth_step.hpp"

namespace equiloc {

inline constexpr int kDefaultDerivativeCap = 12;

enum class RadialKind { bump, cut };

inline double radial_factor_value(RadialKind kind, double u, double inner, double outer, int order) {
    double beta = order == 0 ? radial_profile(u, inner, outer) : radial_profile_derivatives(u, inner, outer, order)[order];
    if (kind == RadialKind::bump) return beta;
    return order == 0 ? 1.0 - beta : -beta;
}

/// u-derivative of order `order` of a radial profile in u = sum_{i in block} v_i^2.
/// bump: beta(u), 1 inside `inner`, 0 outside `outer`; cut: 1 - beta(u).
struct RadialFactor {
    RadialKind kind = RadialKind::bump;
    std::vector<int> block;
    Rational inner = 1;
    Rational outer = 2;
    int order = 0;

    auto key() const { return std::tie(kind, block, inner, outer, order); }
    bool operator<(const RadialFactor& o) const { return key() < o.key(); }
    bool operator==(const RadialFactor& o) const { return key() == o.key(); }

    /// Value at squared radius u.
    double value(double u) const { return radial_factor_value(kind, u, to_double(inner), to_double(outer), order); }

    /// Zero for |v_block| < lower_radius().
    double lower_radius() const {
        if (kind == RadialKind::cut || order > 0) return to_double(inner);
        return 0.0;
    }
};

/// P(v) * exp(v^T S v) * prod factors(v).
struct AmplitudeTerm {
    Polynomial poly;
    RationalMatrix quad;
    std::vector<RadialFactor> factors;
};

struct SupportBox {
    std::vector<double> point_radius;  // |v_i| <= point_radius[i]
    std::vector<double> lie_radius;
    std::vector<double> complex_radius;  // |z_j| <= complex_radius[j] when the point space is C^n
    double point_min_radius = 0;  // amplitude vanishes for |p| below this

    double point_outer() const {
        double s = 0;
        for (double r : point_radius) s += r * r;
        return std::sqrt(s);
    }
};

inline std::vector<std::string> variable_names(int point_dim, int lie_dim) {
    std::vector<std::string> names;
    if (point_dim % 2 == 0) {
        for (int j = 1; j <= point_dim / 2; ++j) {
            names.push_back("x" + std::to_string(j));
            names.push_back("y" + std::to_string(j));
        }
    } else {
        for (int j = 1; j <= point_dim; ++j) names.push_back("p" + std::to_string(j));
    }
    for (int k = 1; k <= lie_dim; ++k) names.push_back("X" + std::to_string(k));
    return names;
}

/// Sum of AmplitudeTerms over point variables (first point_dim) and Lie variables (next lie_dim).
class AmplitudeExpr {
public:
    AmplitudeExpr() = default;
    AmplitudeExpr(int point_dim, int lie_dim) : point_dim_(point_dim), lie_dim_(lie_dim) {}

    static AmplitudeExpr constant(int point_dim, int lie_dim, const Rational& c) {
        AmplitudeExpr a(point_dim, lie_dim);
        a.add_term({Polynomial::constant(a.nvars(), c), a.zero_form(), {}});
        return a;
    }

    static AmplitudeExpr variable(int point_dim, int lie_dim, int index) {
        AmplitudeExpr a(point_dim, lie_dim);
        a.add_term({Polynomial::variable(a.nvars(), index), a.zero_form(), {}});
        return a;
    }

    /// exp(-rate * sum_{i in block} v_i^2)
    static AmplitudeExpr gaussian(int point_dim, int lie_dim, const std::vector<int>& block, const Rational& rate) {
        if (rate <= 0) fail(ErrorKind::domain, "gaussian rate must be positive");
        AmplitudeExpr a(point_dim, lie_dim);
        RationalMatrix s = a.zero_form();
        for (int i : block) s.at(i).at(i) -= rate;
        a.add_term({Polynomial::constant(a.nvars(), 1), s, {}});
        return a;
    }

    static AmplitudeExpr radial(int point_dim, int lie_dim, RadialKind kind, std::vector<int> block,
                                const Rational& inner, const Rational& outer) {
        if (!(inner > 0 && inner < outer)) fail(ErrorKind::domain, "radial factor needs 0 < inner < outer");
        if (block.empty()) fail(ErrorKind::shape, "radial factor needs a nonempty block");
        std::sort(block.begin(), block.end());
        block.erase(std::unique(block.begin(), block.end()), block.end());
        AmplitudeExpr a(point_dim, lie_dim);
        a.add_term({Polynomial::constant(a.nvars(), 1), a.zero_form(), {{kind, block, inner, outer, 0}}});
        return a;
    }

    int point_dim() const { return point_dim_; }
    int lie_dim() const { return lie_dim_; }
    int nvars() const { return point_dim_ + lie_dim_; }
    const std::vector<AmplitudeTerm>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    RationalMatrix zero_form() const { return RationalMatrix(nvars(), RationalVector(nvars(), Rational(0))); }

    /// Adds a term, merging with an existing term of the same exponential and factor structure.
    void add_term(AmplitudeTerm t) {
        if (t.poly.nvars() != nvars() || static_cast<int>(t.quad.size()) != nvars())
            fail(ErrorKind::shape, "amplitude term arity mismatch");
        std::sort(t.factors.begin(), t.factors.end());
        for (auto& existing : terms_) {
            if (existing.quad == t.quad && existing.factors == t.factors) {
                existing.poly += t.poly;
                prune();
                return;
            }
        }
        if (!t.poly.is_zero()) terms_.push_back(std::move(t));
    }

    AmplitudeExpr operator+(const AmplitudeExpr& o) const {
        check_layout(o);
        AmplitudeExpr r = *this;
        for (const auto& t : o.terms_) r.add_term(t);
        return r;
    }
    AmplitudeExpr operator-(const AmplitudeExpr& o) const { return *this + o * Rational(-1); }
    AmplitudeExpr operator*(const Rational& c) const {
        AmplitudeExpr r(point_dim_, lie_dim_);
        for (const auto& t : terms_) r.add_term({t.poly * c, t.quad, t.factors});
        return r;
    }
    AmplitudeExpr operator*(const AmplitudeExpr& o) const {
        check_layout(o);
        AmplitudeExpr r(point_dim_, lie_dim_);
        for (const auto& a : terms_)
            for (const auto& b : o.terms_) {
                RationalMatrix s = a.quad;
                for (int i = 0; i < nvars(); ++i)
                    for (int j = 0; j < nvars(); ++j) s[i][j] += b.quad[i][j];
                auto f = a.factors;
                f.insert(f.end(), b.factors.begin(), b.factors.end());
                r.add_term({a.poly * b.poly, s, f});
            }
        return r;
    }
    bool operator==(const AmplitudeExpr& o) const {
        if (point_dim_ != o.point_dim_ || lie_dim_ != o.lie_dim_ || terms_.size() != o.terms_.size()) return false;
        for (const auto& t : terms_) {
            bool found = false;
            for (const auto& u : o.terms_)
                if (t.quad == u.quad && t.factors == u.factors) found = t.poly == u.poly;
            if (!found) return false;
        }
        return true;
    }

    /// Constant value if the expression has no variable dependence.
    std::optional<Rational> constant_value() const {
        Rational c = 0;
        for (const auto& t : terms_) {
            if (!t.factors.empty() || t.poly.total_degree() > 0) return std::nullopt;
            for (const auto& row : t.quad)
                for (const auto& x : row)
                    if (x != 0) return std::nullopt;
            c += t.poly.coefficient(Exponents(nvars(), 0));
        }
        return c;
    }

    /// d/dv_i, exact.
    AmplitudeExpr derivative(int i) const {
        if (i < 0 || i >= nvars()) fail(ErrorKind::shape, "derivative index out of range");
        AmplitudeExpr r(point_dim_, lie_dim_);
        for (const auto& t : terms_) {
            Polynomial dp = t.poly.derivative(i);
            RationalVector row(nvars(), Rational(0));
            for (int j = 0; j < nvars(); ++j) row[j] = 2 * t.quad[i][j];
            dp += t.poly * Polynomial::linear(row);
            r.add_term({dp, t.quad, t.factors});
            for (std::size_t f = 0; f < t.factors.size(); ++f) {
                const auto& blk = t.factors[f].block;
                if (!std::binary_search(blk.begin(), blk.end(), i)) continue;
                auto factors = t.factors;
                factors[f].order += 1;
                r.add_term({t.poly * Polynomial::variable(nvars(), i) * Rational(2), t.quad, factors});
            }
        }
        return r;
    }

    /// Sets the listed variables to zero and drops them.
    AmplitudeExpr restrict_to_zero(const std::vector<int>& removed) const {
        std::vector<bool> gone(nvars(), false);
        for (int i : removed) gone.at(i) = true;
        std::vector<int> newindex(nvars(), -1);
        int np = 0, nl = 0;
        for (int i = 0; i < nvars(); ++i) {
            if (gone[i]) continue;
            if (i < point_dim_) newindex[i] = np++;
            else newindex[i] = nl++;
        }
        for (int i = point_dim_; i < nvars(); ++i)
            if (newindex[i] >= 0) newindex[i] += np;
        AmplitudeExpr r(np, nl);
        for (const auto& t : terms_) {
            RationalMatrix s = r.zero_form();
            for (int i = 0; i < nvars(); ++i)
                for (int j = 0; j < nvars(); ++j)
                    if (newindex[i] >= 0 && newindex[j] >= 0) s[newindex[i]][newindex[j]] = t.quad[i][j];
            Polynomial p = t.poly.restrict_to_zero(removed);
            std::vector<RadialFactor> factors;
            for (auto f : t.factors) {
                std::vector<int> kept;
                for (int i : f.block)
                    if (newindex[i] >= 0) kept.push_back(newindex[i]);
                if (kept.empty()) {
                    double v = f.value(0.0);
                    if (v == 0) p = Polynomial(r.nvars());
                    else if (v != 1) fail(ErrorKind::capability, "radial factor has a non-rational value at the origin");
                } else {
                    f.block = kept;
                    factors.push_back(f);
                }
            }
            if (!p.is_zero()) r.add_term({p, s, factors});
        }
        return r;
    }

    double evaluate(const std::vector<double>& v) const {
        if (static_cast<int>(v.size()) != nvars()) fail(ErrorKind::shape, "evaluation point has wrong dimension");
        double total = 0;
        for (const auto& t : terms_) {
            double q = 0;
            for (int i = 0; i < nvars(); ++i)
                for (int j = 0; j < nvars(); ++j)
                    if (t.quad[i][j] != 0) q += to_double(t.quad[i][j]) * v[i] * v[j];
            double f = t.poly.evaluate(v) * std::exp(q);
            for (const auto& fac : t.factors) {
                double u = 0;
                for (int i : fac.block) u += v[i] * v[i];
                f *= fac.value(u);
            }
            total += f;
        }
        return total;
    }

    double evaluate(const std::vector<double>& p, const std::vector<double>& X) const {
        std::vector<double> v = p;
        v.insert(v.end(), X.begin(), X.end());
        return evaluate(v);
    }

    /// Quadratic forms must be negative semidefinite.
    void validate() const {
        for (const auto& t : terms_) {
            Eigen::MatrixXd s(nvars(), nvars());
            for (int i = 0; i < nvars(); ++i)
                for (int j = 0; j < nvars(); ++j) s(i, j) = to_double(t.quad[i][j]);
            if (!s.isApprox(s.transpose())) fail(ErrorKind::domain, "quadratic form is not symmetric");
            if (nvars() == 0) continue;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
            if (es.eigenvalues().maxCoeff() > 1e-12 * (1 + s.norm()))
                fail(ErrorKind::domain, "quadratic form is not negative semidefinite");
        }
    }

    SupportBox support_box() const;

    std::string to_string() const {
        auto names = variable_names(point_dim_, lie_dim_);
        if (terms_.empty()) return "0";
        std::string out;
        for (const auto& t : terms_) {
            if (!out.empty()) out += " + ";
            out += "(" + t.poly.to_string(names) + ")";
            for (int i = 0; i < nvars(); ++i)
                for (int j = i; j < nvars(); ++j) {
                    Rational c = i == j ? t.quad[i][i] : 2 * t.quad[i][j];
                    if (c == 0) continue;
                    out += "*exp(" + equiloc::to_string(c) + "*" + names[i] + "*" + names[j] + ")";
                }
            for (const auto& f : t.factors) {
                out += f.kind == RadialKind::bump ? "*bump" : "*cut";
                if (f.order) out += "'" + std::to_string(f.order);
                out += "({";
                for (std::size_t k = 0; k < f.block.size(); ++k) out += (k ? "," : "") + names[f.block[k]];
                out += "}," + equiloc::to_string(f.inner) + "," + equiloc::to_string(f.outer) + ")";
            }
        }
        return out;
    }

private:
    void check_layout(const AmplitudeExpr& o) const {
        if (o.point_dim_ != point_dim_ || o.lie_dim_ != lie_dim_) fail(ErrorKind::shape, "amplitude layout mismatch");
    }
    void prune() {
        terms_.erase(std::remove_if(terms_.begin(), terms_.end(), [](const AmplitudeTerm& t) { return t.poly.is_zero(); }),
                     terms_.end());
    }

    int point_dim_ = 0;
    int lie_dim_ = 0;
    std::vector<AmplitudeTerm> terms_;
};

inline AmplitudeExpr operator*(const Rational& c, const AmplitudeExpr& a) { return a * c; }

inline SupportBox AmplitudeExpr::support_box() const {
    validate();
    int n = nvars();
    std::vector<double> radius(n, 0.0);
    int ncomplex = point_dim_ % 2 == 0 ? point_dim_ / 2 : 0;
    std::vector<double> zradius(ncomplex, 0.0);
    double min_radius = std::numeric_limits<double>::infinity();
    for (const auto& t : terms_) {
        std::vector<double> bound(n, std::numeric_limits<double>::infinity());
        double term_min = 0;
        double factor_sup = 1;
        for (const auto& f : t.factors) {
            if (f.kind == RadialKind::bump && f.order == 0)
                for (int i : f.block) bound[i] = std::min(bound[i], to_double(f.outer));
            if (f.order > 0)
                for (int i : f.block) bound[i] = std::min(bound[i], to_double(f.outer));
            bool point_block = std::all_of(f.block.begin(), f.block.end(), [&](int i) { return i < point_dim_; });
            if (point_block && static_cast<int>(f.block.size()) == point_dim_)
                term_min = std::max(term_min, f.lower_radius());
            if (f.order > 0) {
                double m = 0;
                double in = to_double(f.inner), out = to_double(f.outer);
                for (int k = 0; k <= 200; ++k) {
                    double r = in + (out - in) * k / 200.0;
                    m = std::max(m, std::abs(f.value(r * r)));
                }
                factor_sup *= 2 * m;
            }
        }
        min_radius = std::min(min_radius, term_min);
        std::vector<int> free_vars, bounded;
        for (int i = 0; i < n; ++i) (std::isinf(bound[i]) ? free_vars : bounded).push_back(i);
        double rb = 0;
        for (int i : bounded) rb += bound[i] * bound[i];
        rb = std::sqrt(rb);
        double decay = 0, cross = 0, fixed = 0;
        if (!free_vars.empty()) {
            int m = static_cast<int>(free_vars.size());
            Eigen::MatrixXd suu(m, m);
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) suu(a, b) = to_double(t.quad[free_vars[a]][free_vars[b]]);
            decay = -Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(suu).eigenvalues().maxCoeff();
            if (!(decay > 1e-12)) fail(ErrorKind::domain, "amplitude term has unbounded support");
            Eigen::MatrixXd sub(m, bounded.size());
            for (int a = 0; a < m; ++a)
                for (std::size_t b = 0; b < bounded.size(); ++b) sub(a, b) = to_double(t.quad[free_vars[a]][bounded[b]]);
            cross = bounded.empty() ? 0.0 : sub.norm();
        }
        for (int a : bounded)
            for (int b : bounded) fixed += std::abs(to_double(t.quad[a][b]));
        fixed *= rb * rb;
        double coef = t.poly.l1_norm() * factor_sup;
        int deg = std::max(0, t.poly.total_degree());
        double rho = 0;
        if (!free_vars.empty()) {
            auto log_bound = [&](double s) {
                return std::log(coef) + deg * std::log(1 + std::hypot(s, rb)) - decay * s * s + 2 * cross * rb * s + fixed;
            };
            double target = std::log(1e-16 * std::max(coef, 1e-300));
            double s = 1;
            while (log_bound(s) > target || s < 2 * cross * rb / decay) s *= 1.05;
            rho = s;
        }
        std::vector<double> axis(n);
        for (int i = 0; i < n; ++i) {
            axis[i] = std::isinf(bound[i]) ? rho : bound[i];
            radius[i] = std::max(radius[i], axis[i]);
        }
        for (int j = 0; j < ncomplex; ++j) {
            double zr = std::hypot(axis[2 * j], axis[2 * j + 1]);
            if (std::isinf(bound[2 * j]) && std::isinf(bound[2 * j + 1])) zr = rho;
            for (const auto& f : t.factors) {
                if (f.kind == RadialKind::cut && f.order == 0) continue;
                if (std::binary_search(f.block.begin(), f.block.end(), 2 * j) &&
                    std::binary_search(f.block.begin(), f.block.end(), 2 * j + 1))
                    zr = std::min(zr, to_double(f.outer));
            }
            zradius[j] = std::max(zradius[j], zr);
        }
    }
    SupportBox box;
    box.point_radius.assign(radius.begin(), radius.begin() + point_dim_);
    box.lie_radius.assign(radius.begin() + point_dim_, radius.end());
    box.complex_radius = zradius;
    box.point_min_radius = terms_.empty() ? 0.0 : min_radius;
    return box;
}

/// Partial derivative with multi-index `alpha`; total order limited by `cap`.
inline AmplitudeExpr differentiate(const AmplitudeExpr& a, const std::vector<int>& alpha,
                                   int cap = kDefaultDerivativeCap) {
    if (static_cast<int>(alpha.size()) != a.nvars()) fail(ErrorKind::shape, "multi-index has wrong length");
    int order = 0;
    for (int k : alpha) {
        if (k < 0) fail(ErrorKind::domain, "negative multi-index entry");
        order += k;
    }
    if (order > cap) fail(ErrorKind::capability, "derivative order " + std::to_string(order) + " exceeds cap");
    AmplitudeExpr r = a;
    for (int i = 0; i < a.nvars(); ++i)
        for (int k = 0; k < alpha[i]; ++k) r = r.derivative(i);
    return r;
}

/// <d_B, d_xi>^k a restricted to B = xi = 0, as an amplitude in the remaining variables.
inline AmplitudeExpr mixed_pairing_derivative(const AmplitudeExpr& a, const std::vector<int>& b_vars,
                                              const std::vector<int>& xi_vars, int k,
                                              int cap = kDefaultDerivativeCap) {
    if (b_vars.size() != xi_vars.size()) fail(ErrorKind::shape, "paired variable blocks differ in size");
    if (k < 0) fail(ErrorKind::domain, "negative pairing power");
    if (2 * k > cap) fail(ErrorKind::capability, "pairing power exceeds derivative cap");
    AmplitudeExpr r = a;
    for (int step = 0; step < k; ++step) {
        AmplitudeExpr next(a.point_dim(), a.lie_dim());
        for (std::size_t j = 0; j < b_vars.size(); ++j) next = next + r.derivative(b_vars[j]).derivative(xi_vars[j]);
        r = next;
    }
    std::vector<int> removed = b_vars;
    removed.insert(removed.end(), xi_vars.begin(), xi_vars.end());
    return r.restrict_to_zero(removed);
}

/// Complex coordinates j for which every term is invariant under rotating (x_j, y_j).
inline std::vector<bool> rotation_invariant_coordinates(const AmplitudeExpr& a) {
    int n = a.point_dim() / 2;
    std::vector<bool> inv(n, a.point_dim() % 2 == 0);
    for (int j = 0; j < n && inv[j]; ++j) {
        int x = 2 * j, y = 2 * j + 1;
        for (const auto& t : a.terms()) {
            const auto& s = t.quad;
            bool ok = s[x][x] == s[y][y] && s[x][y] == 0;
            for (int k = 0; k < a.nvars() && ok; ++k)
                if (k != x && k != y && (s[x][k] != 0 || s[y][k] != 0)) ok = false;
            for (const auto& f : t.factors) {
                bool hx = std::binary_search(f.block.begin(), f.block.end(), x);
                bool hy = std::binary_search(f.block.begin(), f.block.end(), y);
                if (hx != hy) ok = false;
            }
            Polynomial vy = Polynomial::variable(a.nvars(), y), vx = Polynomial::variable(a.nvars(), x);
            if (ok && !(vy * t.poly.derivative(x) - vx * t.poly.derivative(y)).is_zero()) ok = false;
            if (!ok) {
                inv[j] = false;
                break;
            }
        }
    }
    return inv;
}

/// Double-precision evaluator for hot loops.
class CompiledAmplitude {
public:
    CompiledAmplitude() = default;
    explicit CompiledAmplitude(const AmplitudeExpr& a) : nvars_(a.nvars()), max_exp_(a.nvars(), 0) {
        for (const auto& t : a.terms()) {
            Term c;
            c.poly = CompiledPolynomial(t.poly);
            for (int i = 0; i < nvars_; ++i) {
                max_exp_[i] = std::max(max_exp_[i], c.poly.max_exponent(i));
                for (int j = i; j < nvars_; ++j) {
                    Rational q = i == j ? t.quad[i][i] : t.quad[i][j] + t.quad[j][i];
                    if (q != 0) c.quad.push_back({i, j, to_double(q)});
                }
            }
            for (const auto& f : t.factors)
                c.factors.push_back({f.kind, f.block, to_double(f.inner), to_double(f.outer), f.order});
            terms_.push_back(std::move(c));
        }
    }

    int nvars() const { return nvars_; }
    bool empty() const { return terms_.empty(); }

    double operator()(const double* v) const {
        thread_local std::vector<std::vector<double>> powers;
        powers.resize(nvars_);
        for (int i = 0; i < nvars_; ++i) {
            powers[i].resize(max_exp_[i] + 1);
            powers[i][0] = 1;
            for (int k = 1; k <= max_exp_[i]; ++k) powers[i][k] = powers[i][k - 1] * v[i];
        }
        double total = 0;
        for (const auto& t : terms_) {
            double f = 1;
            for (const auto& fac : t.factors) {
                double u = 0;
                for (int i : fac.block) u += v[i] * v[i];
                f *= radial_factor_value(fac.kind, u, fac.inner, fac.outer, fac.order);
                if (f == 0) break;
            }
            if (f == 0) continue;
            double q = 0;
            for (const auto& [i, j, c] : t.quad) q += c * v[i] * v[j];
            total += f * std::exp(q) * t.poly.evaluate_with_powers(powers);
        }
        return total;
    }

    double operator()(const std::vector<double>& v) const { return (*this)(v.data()); }

private:
    struct Factor {
        RadialKind kind;
        std::vector<int> block;
        double inner, outer;
        int order;
    };
    struct Term {
        CompiledPolynomial poly;
        std::vector<std::tuple<int, int, double>> quad;
        std::vector<Factor> factors;
    };
    int nvars_ = 0;
    std::vector<int> max_exp_;
    std::vector<Term> terms_;
};

}  // namespace equiloc
