#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "equiloc/amplitude.hpp"
#include "equiloc/core/quadrature.hpp"
#include "equiloc/level_set.hpp"
#include "equiloc/symplectic.hpp"

namespace equiloc {

enum class QuadratureRule { tensor, adaptive };

/// separable: closed p-structure per real axis at fixed X; radial: per-coordinate rotation invariance; full: 2n + r tensor.
enum class QuadraturePath { automatic, separable, radial, full };

struct QuadratureSpec {
    std::vector<long long> nodes;  // empty: from the guard; one entry: all axes; else point axes then Lie axes
    QuadratureRule rule = QuadratureRule::tensor;
    double adaptive_tol = 1e-9;
    double guard = 6;  // minimum nodes per period on every axis
    long long min_nodes = 160;
    double max_evaluations = 4e9;
    QuadraturePath path = QuadraturePath::automatic;
};

struct QuadratureOutcome {
    Complex value;
    std::string rule;
    long long nodes = 0;
};

namespace detail {

struct AxisPlan {
    std::string name;
    double lo = 0, hi = 0;
    double periods = 0;
    long long nodes = 0;
    int explicit_index = -1;  // entry of QuadratureSpec::nodes governing this axis
};

inline void assign_nodes(std::vector<AxisPlan>& axes, const QuadratureSpec& q, double mu) {
    for (auto& ax : axes) {
        long long n;
        if (q.nodes.empty()) {
            n = std::max<long long>(q.min_nodes, static_cast<long long>(std::ceil(q.guard * ax.periods)));
        } else {
            std::size_t idx = q.nodes.size() == 1 ? 0 : static_cast<std::size_t>(ax.explicit_index);
            if (idx >= q.nodes.size()) fail(ErrorKind::shape, "quad.nodes has no entry for axis " + ax.name);
            n = q.nodes[idx];
            if (n < q.guard * ax.periods)
                fail(ErrorKind::resolution, "axis " + ax.name + ": " + std::to_string(n) + " nodes for " +
                                                std::to_string(ax.periods) + " phase periods at mu = " +
                                                std::to_string(mu) + " (guard " + std::to_string(q.guard) +
                                                " nodes per period)");
        }
        ax.nodes = static_cast<long long>(panels_for(n)) * kPanelPoints;
    }
}

inline std::vector<Rule1D> build_rules(const std::vector<AxisPlan>& axes, long long multiplier) {
    std::vector<Rule1D> rules;
    for (const auto& ax : axes) rules.push_back(composite_gauss(ax.lo, ax.hi, panels_for(ax.nodes * multiplier)));
    return rules;
}

inline long long total_nodes(const std::vector<Rule1D>& rules) {
    long long t = 1;
    for (const auto& r : rules) t *= static_cast<long long>(r.size());
    return t;
}

/// Sum over the tensor grid of weight * f(point); blocks are fixed by the grid so the result is deterministic.
inline Complex tensor_sum(const std::vector<Rule1D>& rules, const std::function<Complex(const double*)>& f) {
    long long total = total_nodes(rules);
    if (total == 0) return 0.0;
    std::size_t dim = rules.size();
    long long nblocks = std::min<long long>(total, 4096);
    std::vector<Complex> partial(nblocks);
    parallel_for(static_cast<std::size_t>(nblocks), [&](std::size_t b) {
        long long start = total * static_cast<long long>(b) / nblocks;
        long long stop = total * static_cast<long long>(b + 1) / nblocks;
        std::vector<long long> idx(dim);
        long long rem = start;
        for (std::size_t d = dim; d-- > 0;) {
            idx[d] = rem % static_cast<long long>(rules[d].size());
            rem /= static_cast<long long>(rules[d].size());
        }
        std::vector<double> point(dim);
        Complex sum = 0, comp = 0;
        for (long long k = start; k < stop; ++k) {
            double w = 1;
            for (std::size_t d = 0; d < dim; ++d) {
                point[d] = rules[d].nodes[idx[d]];
                w *= rules[d].weights[idx[d]];
            }
            Complex term = w * f(point.data());
            Complex y = term - comp;
            Complex t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            for (std::size_t d = dim; d-- > 0;) {
                if (++idx[d] < static_cast<long long>(rules[d].size())) break;
                idx[d] = 0;
            }
        }
        partial[b] = sum;
    });
    return pairwise_sum(partial);
}

inline bool separable_layout(const AmplitudeExpr& a) {
    int np = a.point_dim();
    for (const auto& t : a.terms()) {
        for (int i = 0; i < np; ++i)
            for (int j = 0; j < np; ++j)
                if (i != j && t.quad[i][j] != 0) return false;
        for (const auto& f : t.factors)
            for (int i : f.block)
                if (i < np) return false;
    }
    return true;
}

inline Complex lie_phase(const std::vector<double>& eta, const double* X, double mu) {
    double s = 0;
    for (std::size_t k = 0; k < eta.size(); ++k) s += eta[k] * X[k];
    return std::polar(1.0, -s / mu);
}

}  // namespace detail

/// Brute-force quadrature of I_eta(mu) = integral of exp(i (J(p) - eta)(X) / mu) a(p, X) dp dX.
inline QuadratureOutcome brute_force_I(const LinearHamiltonianModel& model, const AmplitudeExpr& a, double mu,
                                       const QuadratureSpec& q = {}, std::vector<double> eta = {}) {
    if (!(mu > 0)) fail(ErrorKind::domain, "mu must be positive");
    if (a.point_dim() != model.real_dim() || a.lie_dim() != model.torus_rank)
        fail(ErrorKind::shape, "amplitude layout does not match the model");
    int n = model.complex_dim, r = model.torus_rank, np = model.real_dim();
    if (eta.empty()) eta.assign(r, 0.0);
    if (static_cast<int>(eta.size()) != r) fail(ErrorKind::shape, "eta has wrong dimension");
    if (a.is_zero()) return {0.0, "zero", 0};
    SupportBox box = a.support_box();
    auto names = variable_names(np, r);

    QuadraturePath path = q.path;
    bool radial_ok = true;
    for (bool b : rotation_invariant_coordinates(a)) radial_ok = radial_ok && b;
    if (path == QuadraturePath::automatic)
        path = detail::separable_layout(a) ? QuadraturePath::separable
                                           : (radial_ok ? QuadraturePath::radial : QuadraturePath::full);
    if (path == QuadraturePath::separable && !detail::separable_layout(a))
        fail(ErrorKind::capability, "amplitude is not separable per real axis");
    if (path == QuadraturePath::radial && !radial_ok)
        fail(ErrorKind::capability, "amplitude is not invariant under coordinate rotations");

    std::vector<double> coeff_bound(n, 0.0);  // max |w_j . X| over the Lie box
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < r; ++k) coeff_bound[j] += std::abs(static_cast<double>(model.weights[j][k])) * box.lie_radius[k];
    std::vector<double> s_upper(n);
    for (int j = 0; j < n; ++j) s_upper[j] = 0.5 * box.complex_radius[j] * box.complex_radius[j];

    std::vector<detail::AxisPlan> axes;
    if (path == QuadraturePath::radial) {
        for (int j = 0; j < n; ++j)
            axes.push_back({"s" + std::to_string(j + 1), 0.0, s_upper[j], s_upper[j] * coeff_bound[j] / (2 * M_PI * mu), 0, 2 * j});
    } else {
        for (int i = 0; i < np; ++i) {
            double rho = box.point_radius[i];
            axes.push_back({names[i], -rho, rho, 2 * rho * rho * coeff_bound[i / 2] / (2 * M_PI * mu), 0, i});
        }
    }
    for (int k = 0; k < r; ++k) {
        double jmax = std::abs(eta[k]);
        for (int j = 0; j < n; ++j) jmax += std::abs(static_cast<double>(model.weights[j][k])) * s_upper[j];
        double R = box.lie_radius[k];
        axes.push_back({names[np + k], -R, R, 2 * R * jmax / (2 * M_PI * mu), 0, np + k});
    }
    detail::assign_nodes(axes, q, mu);

    std::string path_name = path == QuadraturePath::separable ? "separable" : (path == QuadraturePath::radial ? "radial" : "full");
    double nterms = static_cast<double>(a.terms().size());

    std::function<Complex(long long, long long&)> compute;
    if (path == QuadraturePath::separable) {
        struct TermData {
            std::vector<std::pair<std::vector<int>, double>> monomials;
            std::vector<int> maxdeg;
            std::vector<double> diag;                      // S_ii on point axes
            std::vector<std::vector<double>> cross;        // S_{i, X_k}
            std::vector<std::tuple<int, int, double>> lie;  // X^T S_XX X entries
            std::vector<std::tuple<RadialKind, std::vector<int>, double, double, int>> factors;
        };
        std::vector<TermData> terms;
        for (const auto& t : a.terms()) {
            TermData d;
            d.maxdeg.assign(np, 0);
            for (const auto& [e, c] : t.poly.terms()) {
                d.monomials.push_back({e, to_double(c)});
                for (int i = 0; i < np; ++i) d.maxdeg[i] = std::max(d.maxdeg[i], e[i]);
            }
            for (int i = 0; i < np; ++i) {
                d.diag.push_back(to_double(t.quad[i][i]));
                std::vector<double> row(r);
                for (int k = 0; k < r; ++k) row[k] = to_double(t.quad[i][np + k] + t.quad[np + k][i]);
                d.cross.push_back(row);
            }
            for (int k = 0; k < r; ++k)
                for (int l = 0; l < r; ++l)
                    if (t.quad[np + k][np + l] != 0) d.lie.push_back({k, l, to_double(t.quad[np + k][np + l])});
            for (const auto& f : t.factors) {
                std::vector<int> blk;
                for (int i : f.block) blk.push_back(i - np);
                d.factors.push_back({f.kind, blk, to_double(f.inner), to_double(f.outer), f.order});
            }
            terms.push_back(std::move(d));
        }
        compute = [&, terms](long long mult, long long& count) -> Complex {
            std::vector<Rule1D> rules = detail::build_rules(axes, mult);
            std::vector<Rule1D> lie_rules(rules.begin() + np, rules.end());
            long long nx = detail::total_nodes(lie_rules);
            long long per_x = 0;
            for (int i = 0; i < np; ++i) per_x += static_cast<long long>(rules[i].size());
            count = nx * per_x;
            if (static_cast<double>(count) * nterms > q.max_evaluations)
                fail(ErrorKind::resolution, "quadrature cost exceeds quad budget at mu = " + std::to_string(mu));
            // weight * exp(alpha x^2) and x^2 per (term, axis) when the axis has no cross term with X
            std::vector<std::vector<std::pair<std::vector<double>, std::vector<double>>>> fixed(terms.size());
            for (std::size_t t = 0; t < terms.size(); ++t) {
                fixed[t].resize(np);
                for (int i = 0; i < np; ++i) {
                    if (std::any_of(terms[t].cross[i].begin(), terms[t].cross[i].end(), [](double c) { return c != 0; })) continue;
                    const Rule1D& rl = rules[i];
                    std::vector<std::pair<double, double>> nodes;
                    for (std::size_t k = 0; k < rl.size(); ++k) {
                        double x = rl.nodes[k];
                        nodes.push_back({x * x, rl.weights[k] * std::exp(terms[t].diag[i] * x * x)});
                    }
                    // mirror nodes of a symmetric rule share x^2
                    std::sort(nodes.begin(), nodes.end());
                    auto& [wexp, x2] = fixed[t][i];
                    for (const auto& [sq, w] : nodes) {
                        if (!x2.empty() && std::abs(sq - x2.back()) <= 1e-14 * sq) {
                            wexp.back() += w;
                        } else {
                            x2.push_back(sq);
                            wexp.push_back(w);
                        }
                    }
                }
            }
            return detail::tensor_sum(lie_rules, [&](const double* X) -> Complex {
                std::map<std::tuple<int, double, double, double>, std::vector<Complex>> cache;
                auto moments = [&](int axis, double alpha, double beta, double phi, int deg,
                                   const std::pair<std::vector<double>, std::vector<double>>* pre) -> const std::vector<Complex>& {
                    int rule_id = axis;
                    for (int i = 0; i < axis; ++i)
                        if (axes[i].lo == axes[axis].lo && axes[i].hi == axes[axis].hi && rules[i].size() == rules[axis].size()) {
                            rule_id = i;
                            break;
                        }
                    auto key = std::make_tuple(rule_id, alpha, beta, phi);
                    auto it = cache.find(key);
                    if (it != cache.end() && static_cast<int>(it->second.size()) > deg) return it->second;
                    std::vector<Complex> m(deg + 1, 0.0);
                    const Rule1D& rl = rules[rule_id];
                    if (pre && beta == 0 && deg == 0) {
                        const auto& [wexp, x2] = *pre;
                        double re = 0, im = 0;
                        for (std::size_t k = 0; k < wexp.size(); ++k) {
                            double a = phi * x2[k];
                            re += wexp[k] * std::cos(a);
                            im += wexp[k] * std::sin(a);
                        }
                        m[0] = Complex(re, im);
                        return cache[key] = m;
                    }
                    for (std::size_t k = 0; k < rl.size(); ++k) {
                        double x = rl.nodes[k];
                        Complex e = rl.weights[k] * std::exp(alpha * x * x + beta * x) * std::polar(1.0, phi * x * x);
                        for (int p = 0; p <= deg; ++p) {
                            m[p] += e;
                            e *= x;
                        }
                    }
                    return cache[key] = m;
                };
                Complex total = 0;
                for (std::size_t t = 0; t < terms.size(); ++t) {
                    const auto& d = terms[t];
                    double base = 0;
                    for (const auto& [k, l, c] : d.lie) base += c * X[k] * X[l];
                    double fac = std::exp(base);
                    for (const auto& [kind, blk, in, out, order] : d.factors) {
                        double u = 0;
                        for (int i : blk) u += X[i] * X[i];
                        fac *= radial_factor_value(kind, u, in, out, order);
                    }
                    if (fac == 0) continue;
                    std::vector<const std::vector<Complex>*> mom(np);
                    for (int i = 0; i < np; ++i) {
                        double beta = 0;
                        for (int k = 0; k < r; ++k) beta += d.cross[i][k] * X[k];
                        double c = 0;
                        for (int k = 0; k < r; ++k) c += static_cast<double>(model.weights[i / 2][k]) * X[k];
                        double phi = -c / (2 * mu);
                        const auto* pre = fixed[t][i].first.empty() ? nullptr : &fixed[t][i];
                        mom[i] = &moments(i, d.diag[i], beta, phi, d.maxdeg[i], pre);
                    }
                    Complex sum = 0;
                    for (const auto& [e, c] : d.monomials) {
                        Complex m = c;
                        for (int k = 0; k < r; ++k)
                            for (int p = 0; p < e[np + k]; ++p) m *= X[k];
                        for (int i = 0; i < np; ++i) m *= (*mom[i])[e[i]];
                        sum += m;
                    }
                    total += fac * sum;
                }
                return total * detail::lie_phase(eta, X, mu);
            });
        };
    } else if (path == QuadraturePath::radial) {
        CompiledAmplitude eval(a);
        compute = [&, eval](long long mult, long long& count) -> Complex {
            std::vector<Rule1D> rules = detail::build_rules(axes, mult);
            count = detail::total_nodes(rules);
            if (static_cast<double>(count) * nterms > q.max_evaluations)
                fail(ErrorKind::resolution, "quadrature cost exceeds quad budget at mu = " + std::to_string(mu));
            Complex s = detail::tensor_sum(rules, [&](const double* u) -> Complex {
                thread_local std::vector<double> v;
                v.assign(np + r, 0.0);
                double phase = 0;
                for (int j = 0; j < n; ++j) {
                    v[2 * j] = std::sqrt(2 * u[j]);
                    double c = 0;
                    for (int k = 0; k < r; ++k) c += static_cast<double>(model.weights[j][k]) * u[n + k];
                    phase -= u[j] * c;
                }
                for (int k = 0; k < r; ++k) {
                    v[np + k] = u[n + k];
                    phase -= eta[k] * u[n + k];
                }
                double val = eval(v.data());
                if (val == 0) return 0.0;
                return val * std::polar(1.0, phase / mu);
            });
            return std::pow(2 * M_PI, n) * s;
        };
    } else {
        CompiledAmplitude eval(a);
        compute = [&, eval](long long mult, long long& count) -> Complex {
            std::vector<Rule1D> rules = detail::build_rules(axes, mult);
            count = detail::total_nodes(rules);
            if (static_cast<double>(count) * nterms > q.max_evaluations)
                fail(ErrorKind::resolution, "quadrature cost exceeds quad budget at mu = " + std::to_string(mu));
            return detail::tensor_sum(rules, [&](const double* v) -> Complex {
                double val = eval(v);
                if (val == 0) return 0.0;
                double phase = 0;
                for (int j = 0; j < n; ++j) {
                    double c = 0;
                    for (int k = 0; k < r; ++k) c += static_cast<double>(model.weights[j][k]) * v[np + k];
                    phase -= 0.5 * c * (v[2 * j] * v[2 * j] + v[2 * j + 1] * v[2 * j + 1]);
                }
                for (int k = 0; k < r; ++k) phase -= eta[k] * v[np + k];
                return val * std::polar(1.0, phase / mu);
            });
        };
    }

    long long count = 0;
    if (q.rule == QuadratureRule::tensor) {
        Complex v = compute(1, count);
        return {v, path_name + "-tensor", count};
    }
    Complex prev = compute(1, count);
    for (long long mult = 2; mult <= 64; mult *= 2) {
        Complex next = compute(mult, count);
        if (std::abs(next - prev) <= q.adaptive_tol * std::max(std::abs(next), 1e-300)) return {next, path_name + "-adaptive", count};
        prev = next;
    }
    fail(ErrorKind::resolution, "adaptive refinement did not reach the target at mu = " + std::to_string(mu));
}

namespace detail {

inline Complex nested_complex(const std::function<Complex(const std::vector<double>&)>& f,
                              const std::vector<std::vector<double>>& breaks, double tol) {
    int r = static_cast<int>(breaks.size());
    std::vector<double> X(r);
    std::function<Complex(int)> level = [&](int k) -> Complex {
        Complex total = 0;
        for (std::size_t b = 0; b + 1 < breaks[k].size(); ++b)
            total += adaptive_integrate_complex(
                [&, k](double t) {
                    X[k] = t;
                    return k + 1 == r ? f(X) : level(k + 1);
                },
                breaks[k][b], breaks[k][b + 1], tol, 200);
        return total;
    };
    return level(0);
}

}  // namespace detail

/// Closed form over C^n for a = sum exp(-sum_j b_j |z_j|^2) g(X), leaving an r-dimensional X integral.
inline Complex gaussian_exact_I(const LinearHamiltonianModel& model, const AmplitudeExpr& a, double mu,
                                std::vector<double> eta = {}, double tol = 1e-12) {
    if (!(mu > 0)) fail(ErrorKind::domain, "mu must be positive");
    int n = model.complex_dim, r = model.torus_rank, np = model.real_dim();
    if (a.point_dim() != np || a.lie_dim() != r) fail(ErrorKind::shape, "amplitude layout does not match the model");
    if (eta.empty()) eta.assign(r, 0.0);
    if (a.is_zero()) return 0.0;
    struct TermData {
        std::vector<double> rate;
        AmplitudeExpr lie_part;
    };
    std::vector<TermData> terms;
    std::vector<std::vector<double>> breaks(r);
    for (const auto& t : a.terms()) {
        TermData d;
        for (int i = 0; i < np; ++i)
            if (t.poly.depends_on(i)) fail(ErrorKind::capability, "polynomial factor depends on the point");
        for (int j = 0; j < n; ++j) {
            int x = 2 * j, y = 2 * j + 1;
            if (t.quad[x][x] != t.quad[y][y] || !(t.quad[x][x] < 0))
                fail(ErrorKind::capability, "point Gaussian is not radial with positive rate in every coordinate");
            for (int k = 0; k < np + r; ++k) {
                if (k != x && (t.quad[x][k] != 0 || t.quad[k][x] != 0)) fail(ErrorKind::capability, "point Gaussian is not diagonal");
                if (k != y && (t.quad[y][k] != 0 || t.quad[k][y] != 0)) fail(ErrorKind::capability, "point Gaussian is not diagonal");
            }
            d.rate.push_back(-to_double(t.quad[x][x]));
        }
        AmplitudeExpr single(np, r);
        AmplitudeTerm lt{t.poly, single.zero_form(), {}};
        for (int k = 0; k < r; ++k)
            for (int l = 0; l < r; ++l) lt.quad[np + k][np + l] = t.quad[np + k][np + l];
        for (const auto& f : t.factors) {
            for (int i : f.block)
                if (i < np) fail(ErrorKind::capability, "radial factor involves the point");
            lt.factors.push_back(f);
            if (f.block.size() == 1) {
                for (double rad : {to_double(f.inner), to_double(f.outer)}) {
                    breaks[f.block[0] - np].push_back(rad);
                    breaks[f.block[0] - np].push_back(-rad);
                }
            }
        }
        single.add_term(lt);
        std::vector<int> points;
        for (int i = 0; i < np; ++i) points.push_back(i);
        d.lie_part = single.restrict_to_zero(points);
        terms.push_back(std::move(d));
    }
    SupportBox box = a.support_box();
    for (int k = 0; k < r; ++k) {
        double R = box.lie_radius[k];
        breaks[k].push_back(-R);
        breaks[k].push_back(R);
        breaks[k].push_back(0.0);
        std::sort(breaks[k].begin(), breaks[k].end());
        std::vector<double> kept;
        for (double b : breaks[k])
            if (b >= -R && b <= R && (kept.empty() || b > kept.back())) kept.push_back(b);
        breaks[k] = kept;
    }
    std::vector<CompiledAmplitude> lie_eval;
    for (const auto& d : terms) lie_eval.emplace_back(d.lie_part);
    auto f = [&](const std::vector<double>& X) -> Complex {
        Complex total = 0;
        for (std::size_t t = 0; t < terms.size(); ++t) {
            double g = lie_eval[t](X.data());
            if (g == 0) continue;
            Complex prod = g;
            for (int j = 0; j < n; ++j)
                prod *= M_PI / Complex(terms[t].rate[j], model.pairing(j, X) / (2 * mu));
            total += prod;
        }
        return total * detail::lie_phase(eta, X.data(), mu);
    };
    return detail::nested_complex(f, breaks, tol);
}

/// Coefficients and partial sums of the expansion of the integral of exp(i <xi, B> / nu) a(B, xi) dB dxi.
struct ExpansionResult {
    int prefactor_power = 0;            // m
    std::vector<double> coefficients;   // c_k = <d_B, d_xi>^k a(0), k = 0..2K-2
    double remainder_constant = 0;
    int remainder_power = 0;
    std::vector<double> nus;
    std::vector<Complex> partial_sums;

    Complex partial_sum(double nu) const {
        Complex s = 0, term = 1;
        for (std::size_t k = 0; k < coefficients.size(); ++k) {
            if (k > 0) term *= Complex(0, nu) / static_cast<double>(k);
            s += term * coefficients[k];
        }
        return std::pow(2 * M_PI * nu, prefactor_power) * s;
    }

    double remainder_bound(double nu) const { return remainder_constant * std::pow(nu, remainder_power); }
};

/// B = the point variables, xi = the Lie variables of `a`; both of dimension m.
inline ExpansionResult inner_sp_expansion(const AmplitudeExpr& a, const std::vector<double>& nus, int K,
                                          int cap = kDefaultDerivativeCap) {
    int m = a.point_dim();
    if (a.lie_dim() != m) fail(ErrorKind::shape, "paired blocks differ in dimension");
    if (K < 1) fail(ErrorKind::domain, "K must be positive");
    if (4 * K - 4 > cap) fail(ErrorKind::capability, "K = " + std::to_string(K) + " needs derivatives beyond the cap");
    std::vector<int> bvars, xivars;
    for (int i = 0; i < m; ++i) {
        bvars.push_back(i);
        xivars.push_back(m + i);
    }
    ExpansionResult res;
    res.prefactor_power = m;
    for (int k = 0; k <= 2 * K - 2; ++k) {
        auto c = mixed_pairing_derivative(a, bvars, xivars, k, cap).constant_value();
        res.coefficients.push_back(c ? to_double(*c) : 0.0);
    }
    // supremum norms of derivatives on a 9-point probe grid, safety factor 2
    int order = std::min(2 * K + m + 1, cap);
    int nv = a.nvars();
    SupportBox box = a.support_box();
    std::vector<double> radius = box.point_radius;
    radius.insert(radius.end(), box.lie_radius.begin(), box.lie_radius.end());
    long long probes = 1;
    for (int i = 0; i < nv; ++i) probes *= 9;
    double sup_total = 0;
    std::function<void(const AmplitudeExpr&, int, int)> walk = [&](const AmplitudeExpr& d, int first, int depth) {
        CompiledAmplitude eval(d);
        double sup = 0;
        std::vector<double> v(nv);
        for (long long idx = 0; idx < probes; ++idx) {
            long long rem = idx;
            for (int i = 0; i < nv; ++i) {
                v[i] = -radius[i] + 2 * radius[i] * static_cast<double>(rem % 9) / 8.0;
                rem /= 9;
            }
            sup = std::max(sup, std::abs(eval(v)));
        }
        sup_total += sup;
        if (depth == order) return;
        for (int i = first; i < nv; ++i) walk(d.derivative(i), i, depth + 1);
    };
    walk(a, 0, 0);
    res.remainder_power = m + 2 * K - 1;
    res.remainder_constant = 2 * std::pow(2 * M_PI, m) * sup_total / to_double(factorial(2 * K - 1));
    res.nus = nus;
    for (double nu : nus) res.partial_sums.push_back(res.partial_sum(nu));
    return res;
}

/// Leading coefficient Q_0 of I_eta(mu) / (2 pi mu)^r at a regular value eta.
inline double leading_term_regular(const LinearHamiltonianModel& model, const AmplitudeExpr& a, const RationalVector& eta,
                                   const LevelSetOptions& opt = {}) {
    if (static_cast<int>(eta.size()) != model.torus_rank) fail(ErrorKind::shape, "eta has wrong dimension");
    if (!is_regular_value(model, eta)) fail(ErrorKind::precondition, "eta is a singular value of the momentum map");
    return level_set_integral(model, a, to_double(eta), opt);
}

}  // namespace equiloc
