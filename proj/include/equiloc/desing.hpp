#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "equiloc/amplitude.hpp"
#include "equiloc/fit.hpp"
#include "equiloc/level_set.hpp"
#include "equiloc/oscillatory.hpp"
#include "equiloc/symplectic.hpp"

namespace equiloc {

/// Littlewood-Paley shells: phi = 1 on [0, inner], 0 on [outer, inf); sigma(r) = phi(r/2) - phi(r).
struct DyadicPartition {
    Rational inner{1, 4};
    Rational outer{1, 2};

    double profile(double r) const { return radial_profile(r * r, to_double(inner), to_double(outer)); }
    double shell(double r) const { return profile(r / 2) - profile(r); }
    static double scale(int l) { return std::ldexp(1.0, -l); }
};

/// Nonzero shell weights sigma(2^l |w|) at a point w with 0 < |w| <= 2 * inner.
inline std::map<int, double> dyadic_weights(const DyadicPartition& part, const std::vector<double>& w) {
    double r = 0;
    for (double x : w) r += x * x;
    r = std::sqrt(r);
    if (r == 0) fail(ErrorKind::domain, "shell weights are undefined at the center");
    if (r > 2 * to_double(part.inner) * (1 + 1e-15))
        fail(ErrorKind::precondition, "point lies outside the ball covered by the shells");
    std::map<int, double> out;
    int center = static_cast<int>(std::floor(std::log2(to_double(part.inner) / r)));
    for (int l = std::max(0, center - 2); l <= center + 4; ++l) {
        double s = part.shell(std::ldexp(r, l));
        if (s != 0) out[l] = s;
    }
    return out;
}

namespace detail {

inline RadialFactor scaled_factor(RadialFactor f, const Rational& tau) {
    f.inner /= tau;
    f.outer /= tau;
    return f;
}

}  // namespace detail

/// Shell cutoff chi(w) = sigma(|w|) on the point variables `w_vars`.
inline AmplitudeExpr shell_cutoff(int point_dim, int lie_dim, const std::vector<int>& w_vars, const DyadicPartition& part) {
    return AmplitudeExpr::radial(point_dim, lie_dim, RadialKind::bump, w_vars, 2 * part.inner, 2 * part.outer) -
           AmplitudeExpr::radial(point_dim, lie_dim, RadialKind::bump, w_vars, part.inner, part.outer);
}

/// a(tau_l w, A) * chi(w), with w the point variables listed in `w_vars`.
inline AmplitudeExpr rescale_amplitude(const AmplitudeExpr& a, const std::vector<int>& w_vars, int l,
                                       const DyadicPartition& part = {}) {
    if (l < 0) fail(ErrorKind::domain, "shell index must be nonnegative");
    std::vector<bool> in_w(a.nvars(), false);
    for (int i : w_vars) {
        if (i < 0 || i >= a.point_dim()) fail(ErrorKind::shape, "shell variables must be point variables");
        in_w[i] = true;
    }
    Rational tau = rational_pow(Rational(1, 2), l);
    RationalVector factor(a.nvars(), Rational(1));
    for (int i : w_vars) factor[i] = tau;
    AmplitudeExpr out(a.point_dim(), a.lie_dim());
    for (const auto& t : a.terms()) {
        AmplitudeTerm s;
        s.poly = t.poly.scale_variables(factor);
        s.quad = t.quad;
        for (int i = 0; i < a.nvars(); ++i)
            for (int j = 0; j < a.nvars(); ++j) s.quad[i][j] *= factor[i] * factor[j];
        Rational coef = 1;
        for (const auto& f : t.factors) {
            int hits = 0;
            for (int i : f.block) hits += in_w[i] ? 1 : 0;
            if (hits == 0) {
                s.factors.push_back(f);
            } else if (hits == static_cast<int>(f.block.size())) {
                s.factors.push_back(detail::scaled_factor(f, tau));
                coef *= rational_pow(tau, -2 * f.order);
            } else {
                fail(ErrorKind::capability, "radial factor straddles the rescaled block");
            }
        }
        s.poly = s.poly * coef;
        out.add_term(s);
    }
    return out * shell_cutoff(a.point_dim(), a.lie_dim(), w_vars, part);
}

inline AmplitudeExpr rescale_amplitude(const AmplitudeExpr& a, int l, const DyadicPartition& part = {}) {
    std::vector<int> all(a.point_dim());
    for (int i = 0; i < a.point_dim(); ++i) all[i] = i;
    return rescale_amplitude(a, all, l, part);
}

struct StratumRecord {
    std::string label;
    std::vector<int> support;  // largest coordinate support realizing the class
    int algebra_dim = 0;
    std::optional<long long> finite_order;
    int dimension = 0;  // in the reduced space
    int gap = 0;
    bool regular = false;
    BigMatrix lattice;  // HNF of the weights on the support
};

struct StrataCatalog {
    std::vector<StratumRecord> strata;
    int regular = 0;
    int lambda_a = 0;       // longest chain from the regular class with every gap equal to 2
    int lambda_tuple = 0;   // longest count of gap-2 links along any chain
    int chain_bound = 0;    // longest chain of classes
    bool definitions_differ() const { return lambda_a != lambda_tuple; }
};

namespace detail {

inline std::string support_label(const std::vector<int>& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i] + 1);
    return out + "}";
}

/// Some t > 0 (entrywise) with -sum_{j in S} t_j w_j = eta.
inline bool level_meets_support(const LinearHamiltonianModel& model, const std::vector<int>& support, const RationalVector& eta) {
    int r = model.torus_rank;
    bool zero = std::all_of(eta.begin(), eta.end(), [](const Rational& x) { return x == 0; });
    if (support.empty()) return zero;
    int m = static_cast<int>(support.size());
    // t = (1 + u) / (1 + v) with u, v >= 0:  A u - v eta = eta - A 1, A = -W_S^T
    RationalMatrix a(r, RationalVector(m + 1, Rational(0)));
    RationalVector b(r);
    for (int k = 0; k < r; ++k) {
        Rational row_sum = 0;
        for (int c = 0; c < m; ++c) {
            a[k][c] = -Rational(model.weights[support[c]][k]);
            row_sum += a[k][c];
        }
        a[k][m] = -eta[k];
        b[k] = eta[k] - row_sum;
    }
    return nonnegative_solution(a, b, m + 1).has_value();
}

}  // namespace detail

/**
 * Isotropy classes meeting J^{-1}(eta) inside the support, their reduced dimensions and gaps.
 * The support enters only through whether it reaches the origin.
 */
inline StrataCatalog strata_catalog(const LinearHamiltonianModel& model, const SupportBox& support,
                                    RationalVector eta = {}) {
    int n = model.complex_dim, r = model.torus_rank;
    if (eta.empty()) eta.assign(r, Rational(0));
    if (static_cast<int>(eta.size()) != r) fail(ErrorKind::shape, "level covector has wrong dimension");
    if (n > 20) fail(ErrorKind::unsupported_model, "too many coordinates for support enumeration");
    bool origin_in_support = support.point_min_radius <= 0;
    std::vector<std::vector<int>> feasible;
    std::vector<int> union_support;
    std::set<int> union_set;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> s;
        for (int j = 0; j < n; ++j)
            if (mask & (1u << j)) s.push_back(j);
        if (s.empty() && !origin_in_support) continue;
        if (!detail::level_meets_support(model, s, eta)) continue;
        feasible.push_back(s);
        union_set.insert(s.begin(), s.end());
    }
    StrataCatalog cat;
    if (feasible.empty()) return cat;
    union_support.assign(union_set.begin(), union_set.end());

    auto lattice_of = [&](const std::vector<int>& s) {
        return hermite_normal_form(to_big(weight_rows(model, s)), r);
    };
    std::map<BigMatrix, int> index;
    for (const auto& s : feasible) {
        BigMatrix h = lattice_of(s);
        int rk = static_cast<int>(h.size());
        int dim = 2 * static_cast<int>(s.size()) - 2 * rk;
        auto it = index.find(h);
        if (it == index.end()) {
            StratumRecord rec;
            IsotropyDatum iso = isotropy_of_support(model, s);
            rec.support = s;
            rec.algebra_dim = iso.algebra_dim;
            rec.finite_order = iso.finite_order;
            rec.dimension = dim;
            rec.lattice = h;
            index[h] = static_cast<int>(cat.strata.size());
            cat.strata.push_back(rec);
        } else {
            auto& rec = cat.strata[it->second];
            if (dim > rec.dimension || (dim == rec.dimension && s.size() > rec.support.size())) {
                rec.dimension = std::max(rec.dimension, dim);
                rec.support = s;
            }
        }
    }
    cat.regular = index.at(lattice_of(union_support));
    const auto& reg = cat.strata[cat.regular];
    if (reg.algebra_dim != 0)
        fail(ErrorKind::unsupported_model, "generic stabilizer on the level set is positive-dimensional");
    int nclass = static_cast<int>(cat.strata.size());
    for (auto& rec : cat.strata) {
        rec.regular = (&rec == &cat.strata[cat.regular]);
        rec.gap = cat.strata[cat.regular].dimension - rec.dimension;
        std::string iso = rec.algebra_dim == 0 ? "finite(" + std::to_string(rec.finite_order.value_or(1)) + ")"
                                               : "torus^" + std::to_string(rec.algebra_dim);
        rec.label = detail::support_label(rec.support) + ":" + iso;
    }
    // more singular = strictly smaller weight lattice = strictly larger isotropy group
    auto more_singular = [&](int a, int b) {
        const auto& la = cat.strata[a].lattice;
        const auto& lb = cat.strata[b].lattice;
        return la != lb && lattice_subset(la, lb);
    };
    std::vector<int> order(nclass);
    for (int i = 0; i < nclass; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return cat.strata[a].dimension > cat.strata[b].dimension; });
    std::vector<int> strict(nclass, -1), tuple(nclass, -1), any(nclass, -1);
    strict[cat.regular] = tuple[cat.regular] = any[cat.regular] = 0;
    for (int b : order)
        for (int a : order) {
            if (any[a] < 0 || !more_singular(b, a)) continue;
            bool gap2 = cat.strata[a].dimension - cat.strata[b].dimension == 2;
            any[b] = std::max(any[b], any[a] + 1);
            tuple[b] = std::max(tuple[b], tuple[a] + (gap2 ? 1 : 0));
            if (strict[a] >= 0 && gap2) strict[b] = std::max(strict[b], strict[a] + 1);
        }
    for (int i = 0; i < nclass; ++i) {
        cat.lambda_a = std::max(cat.lambda_a, strict[i]);
        cat.lambda_tuple = std::max(cat.lambda_tuple, tuple[i]);
        cat.chain_bound = std::max(cat.chain_bound, any[i]);
    }
    return cat;
}

inline StrataCatalog strata_catalog(const LinearHamiltonianModel& model, const AmplitudeExpr& a, RationalVector eta = {}) {
    return strata_catalog(model, a.support_box(), std::move(eta));
}

struct DesingNode {
    int depth = 0;
    std::vector<std::string> chain;       // isotropy classes from the root
    int orbit_dim = 0;                    // dimension of the complement of the stabilizer algebra
    std::vector<int> w_coords;            // complex coordinates blown up (indices of the root model)
    std::vector<int> fixed_coords;        // coordinates fixed by the stabilizer
    IntMatrix stabilizer;                 // integer basis of the stabilizer algebra in root coordinates
    int shell_count = 0;                  // shells l = 0..shell_count-1 kept before the trivial bound
    std::optional<AmplitudeExpr> amplitude;  // shell-0 amplitude for first-level nodes
    std::vector<DesingNode> children;

    int tree_depth() const {
        int d = depth;
        for (const auto& c : children) d = std::max(d, c.tree_depth());
        return d;
    }
};

inline std::string dump_tree(const DesingNode& node) {
    std::ostringstream out;
    std::function<void(const DesingNode&)> walk = [&](const DesingNode& n) {
        out << std::string(2 * n.depth, ' ') << "depth " << n.depth << " chain ";
        for (std::size_t i = 0; i < n.chain.size(); ++i) out << (i ? " < " : "") << n.chain[i];
        out << " orbit_dim " << n.orbit_dim << " W " << detail::support_label(n.w_coords) << " V "
            << detail::support_label(n.fixed_coords) << " shells " << n.shell_count
            << (n.children.empty() ? " leaf" : "") << "\n";
        for (const auto& c : n.children) walk(c);
    };
    walk(node);
    return out.str();
}

namespace detail {

inline IntMatrix compose_generators(const IntMatrix& outer, const IntMatrix& local) {
    // local generators are coefficient vectors in the span of `outer`
    IntMatrix out;
    for (const auto& g : local) {
        std::vector<long long> v(outer.empty() ? 0 : outer[0].size(), 0);
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t k = 0; k < v.size(); ++k) v[k] += g[i] * outer[i][k];
        out.push_back(v);
    }
    return out;
}

}  // namespace detail

/**
 * Orbit-type recursion. At each node the most singular positive-dimensional classes are blown up:
 * the child is the stabilizer torus acting on the coordinates it moves, with the center removed.
 */
inline DesingNode build_desing_tree(const LinearHamiltonianModel& model, const SupportBox& support,
                                    const RationalVector& eta, int depth_cap, double mu_min = 0.01) {
    int shells = std::max(1, static_cast<int>(std::floor(0.5 * std::log2(10.0 / mu_min))) + 1);
    int r = model.torus_rank;
    IntMatrix identity(r, std::vector<long long>(r, 0));
    for (int k = 0; k < r; ++k) identity[k][k] = 1;
    std::vector<int> all(model.complex_dim);
    for (int j = 0; j < model.complex_dim; ++j) all[j] = j;

    std::function<void(DesingNode&, const LinearHamiltonianModel&, const std::vector<int>&, const IntMatrix&, const SupportBox&,
                       const RationalVector&)>
        expand = [&](DesingNode& node, const LinearHamiltonianModel& local, const std::vector<int>& coords,
                     const IntMatrix& gens, const SupportBox& box, const RationalVector& level) {
            if (node.depth > depth_cap)
                fail(ErrorKind::consistency, "desingularization did not terminate within depth " + std::to_string(depth_cap));
            StrataCatalog cat = strata_catalog(local, box, level);
            std::vector<int> singular;
            for (int i = 0; i < static_cast<int>(cat.strata.size()); ++i)
                if (cat.strata[i].algebra_dim > 0) singular.push_back(i);
            for (int c : singular) {
                bool maximal = true;
                for (int d : singular)
                    if (d != c && cat.strata[d].lattice != cat.strata[c].lattice &&
                        lattice_subset(cat.strata[d].lattice, cat.strata[c].lattice))
                        maximal = false;
                if (!maximal) continue;
                const auto& rec = cat.strata[c];
                RationalMatrix rows = to_rational(weight_rows(local, rec.support));
                std::vector<RationalVector> kernel =
                    rows.empty() ? std::vector<RationalVector>{} : nullspace(rows, local.torus_rank);
                IntMatrix local_gens;
                if (rows.empty()) {
                    local_gens.assign(local.torus_rank, std::vector<long long>(local.torus_rank, 0));
                    for (int k = 0; k < local.torus_rank; ++k) local_gens[k][k] = 1;
                } else {
                    for (const auto& v : kernel) local_gens.push_back(primitive_integer(v));
                }
                LinearHamiltonianModel acting = restrict_model(local, std::vector<int>(all.begin(), all.begin() + local.complex_dim), local_gens);
                std::vector<int> moved, fixed;
                for (int j = 0; j < local.complex_dim; ++j) {
                    bool zero = std::all_of(acting.weights[j].begin(), acting.weights[j].end(), [](long long x) { return x == 0; });
                    (zero ? fixed : moved).push_back(j);
                }
                DesingNode child;
                child.depth = node.depth + 1;
                child.chain = node.chain;
                std::vector<int> root_support;
                for (int j : rec.support) root_support.push_back(coords[j]);
                child.chain.push_back(detail::support_label(root_support) + rec.label.substr(rec.label.find(':')));
                child.stabilizer = detail::compose_generators(gens, local_gens);
                child.orbit_dim = r - static_cast<int>(child.stabilizer.size());
                for (int j : moved) child.w_coords.push_back(coords[j]);
                for (int j : fixed) child.fixed_coords.push_back(coords[j]);
                child.shell_count = shells;
                LinearHamiltonianModel next = restrict_model(local, moved, local_gens);
                std::vector<int> next_coords;
                for (int j : moved) next_coords.push_back(coords[j]);
                SupportBox annulus;
                annulus.point_min_radius = to_double(DyadicPartition{}.inner);
                expand(child, next, next_coords, child.stabilizer, annulus, RationalVector(next.torus_rank, Rational(0)));
                node.children.push_back(std::move(child));
            }
        };

    DesingNode root;
    root.chain.push_back("regular");
    root.orbit_dim = r;
    root.w_coords = all;
    expand(root, model, all, identity, support, eta);
    return root;
}

/// Leading coefficient L0: integral of a(p, 0) over the level set of J with the delta measure.
inline double leading_term_L0(const LinearHamiltonianModel& model, const AmplitudeExpr& a, RationalVector eta = {},
                              const LevelSetOptions& opt = {}) {
    if (eta.empty()) eta.assign(model.torus_rank, Rational(0));
    if (a.is_zero()) return 0.0;
    strata_catalog(model, a.support_box(), eta);
    return level_set_integral(model, a, to_double(eta), opt);
}

struct ShellSum {
    double value = 0;
    std::vector<double> shells;  // scaled contribution of shell l
    double core = 0;             // part of a outside the shells
};

/**
 * L0 assembled from the dyadic shells around the origin: the core a * (1 - phi(|w|/2)) plus
 * tau_l^{dim W - 2r} times L0 of each rescaled shell amplitude.
 */
inline ShellSum leading_term_L0_shells(const LinearHamiltonianModel& model, const AmplitudeExpr& a,
                                       const DyadicPartition& part = {}, int max_shells = 80,
                                       const LevelSetOptions& opt = {}) {
    int r = model.torus_rank;
    strata_catalog(model, a.support_box());
    std::vector<int> w_vars;
    for (int j = 0; j < model.complex_dim; ++j) {
        bool zero = std::all_of(model.weights[j].begin(), model.weights[j].end(), [](long long x) { return x == 0; });
        if (!zero) {
            w_vars.push_back(2 * j);
            w_vars.push_back(2 * j + 1);
        }
    }
    int dim_w = static_cast<int>(w_vars.size());
    std::vector<double> zero(r, 0.0);
    ShellSum out;
    AmplitudeExpr core = a * AmplitudeExpr::radial(a.point_dim(), a.lie_dim(), RadialKind::cut, w_vars, 2 * part.inner, 2 * part.outer);
    out.core = core.is_zero() ? 0.0 : level_set_integral(model, core, zero, opt);
    double total = out.core;
    for (int l = 0; l < max_shells; ++l) {
        AmplitudeExpr shell = rescale_amplitude(a, w_vars, l, part);
        double v = std::pow(DyadicPartition::scale(l), dim_w - 2 * r) * level_set_integral(model, shell, zero, opt);
        out.shells.push_back(v);
        total += v;
        if (dim_w > 2 * r && l > 4 && std::abs(v) <= 1e-17 * std::max(1.0, std::abs(total))) break;
    }
    out.value = total;
    return out;
}

inline double homogeneity_check(const LinearHamiltonianModel& model, const RealVector& w, const RealVector& lie, double c) {
    RealVector cw(w);
    for (double& x : cw) x *= c;
    return std::abs(momentum_value(model, cw, lie) - c * c * momentum_value(model, w, lie));
}

struct RecoveryResult {
    Complex direct;
    Complex truncated;
    std::vector<Complex> shells;  // tau_l^{dim W} I^{0,l}(mu tau_l^{-2})
    double relative_error = 0;
};

/// Truncated shell sum of the unscaled integral for an amplitude supported in |w| <= 2 * inner.
inline RecoveryResult recovery_identity(const LinearHamiltonianModel& model, const AmplitudeExpr& a, double mu, int shells,
                                        const QuadratureSpec& q = {}, const DyadicPartition& part = {}) {
    for (const auto& t : a.terms()) {
        double reach = std::numeric_limits<double>::infinity();
        for (const auto& f : t.factors)
            if (f.kind == RadialKind::bump && f.order == 0 && static_cast<int>(f.block.size()) == model.real_dim())
                reach = std::min(reach, to_double(f.outer));
        if (reach > 2 * to_double(part.inner) + 1e-15)
            fail(ErrorKind::precondition, "amplitude support is not covered by the shells");
    }
    std::vector<int> w_vars(model.real_dim());
    for (int i = 0; i < model.real_dim(); ++i) w_vars[i] = i;
    RecoveryResult out;
    out.direct = brute_force_I(model, a, mu, q).value;
    std::vector<Complex> parts;
    for (int l = 0; l <= shells; ++l) {
        AmplitudeExpr al = rescale_amplitude(a, w_vars, l, part);
        double tau = DyadicPartition::scale(l);
        Complex v = std::pow(tau, model.real_dim()) * brute_force_I(model, al, mu / (tau * tau), q).value;
        out.shells.push_back(v);
        parts.push_back(v);
    }
    out.truncated = pairwise_sum(parts);
    out.relative_error = std::abs(out.truncated - out.direct) / std::abs(out.direct);
    return out;
}

struct AsymptoticRow {
    double mu = 0;
    Complex value;
    double predicted = 0;
    double residual = 0;
};

struct AsymptoticResult {
    int kappa = 0;
    double L0 = 0;
    int lambda_a = 0;
    int chain_bound = 0;
    int tree_depth = 0;
    bool lambda_flag = false;
    std::string oracle;
    std::vector<AsymptoticRow> table;
    OrderFit plain;
    OrderFit with_log;
    std::string tree;
};

/// Oracle I_eta(mu): the closed form for Gaussian amplitudes, otherwise tensor quadrature.
inline std::pair<Complex, std::string> oracle_I(const LinearHamiltonianModel& model, const AmplitudeExpr& a, double mu,
                                                const std::vector<double>& eta, const QuadratureSpec& q) {
    try {
        return {gaussian_exact_I(model, a, mu, eta), "gaussian-exact"};
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::capability) throw;
    }
    auto out = brute_force_I(model, a, mu, q, eta);
    return {out.value, out.rule};
}

inline AsymptoticResult desingularize(const LinearHamiltonianModel& model, const AmplitudeExpr& a, const std::vector<double>& mus,
                                      int depth_cap, RationalVector eta = {}, const QuadratureSpec& q = {}) {
    int r = model.torus_rank;
    if (eta.empty()) eta.assign(r, Rational(0));
    if (mus.empty()) fail(ErrorKind::data, "empty mu grid");
    SupportBox box = a.support_box();
    StrataCatalog cat = strata_catalog(model, box, eta);
    AsymptoticResult res;
    res.kappa = r - (cat.strata.empty() ? 0 : cat.strata[cat.regular].algebra_dim);
    res.lambda_a = cat.lambda_a;
    res.lambda_flag = cat.definitions_differ();
    res.chain_bound = cat.chain_bound;
    double mu_min = *std::min_element(mus.begin(), mus.end());
    DesingNode tree = build_desing_tree(model, box, eta, depth_cap, mu_min);
    res.tree_depth = tree.tree_depth();
    if (res.tree_depth > cat.chain_bound + 1)
        fail(ErrorKind::consistency, "desingularization tree deeper than the chain bound");
    res.tree = dump_tree(tree);
    std::vector<double> eta_d = to_double(eta);
    res.L0 = leading_term_L0(model, a, eta);
    for (double mu : mus) {
        auto [value, rule] = oracle_I(model, a, mu, eta_d, q);
        res.oracle = rule;
        AsymptoticRow row;
        row.mu = mu;
        row.value = value;
        row.predicted = std::pow(2 * M_PI * mu, res.kappa) * res.L0;
        row.residual = std::abs(value - row.predicted);
        res.table.push_back(row);
    }
    if (res.table.size() >= 4) {
        std::vector<double> m, rs;
        for (const auto& row : res.table) {
            m.push_back(row.mu);
            rs.push_back(row.residual);
        }
        res.plain = fit_order(m, rs, false);
        bool small = std::all_of(m.begin(), m.end(), [](double x) { return x < 1; });
        if (small && res.table.size() >= 5) res.with_log = fit_order(m, rs, true);
    }
    return res;
}

}  // namespace equiloc
