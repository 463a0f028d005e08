#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "equiloc/amplitude.hpp"
#include "equiloc/core/quadrature.hpp"
#include "equiloc/symplectic.hpp"

namespace equiloc {

/// Linear inequalities sum_i coeff[i] * s_i <= rhs.
struct HalfSpace {
    std::vector<double> coeff;
    double rhs;
};

/// Fourier-Motzkin projections: levels[k] constrains s_0..s_k only.
inline std::vector<std::vector<HalfSpace>> projection_levels(std::vector<HalfSpace> system, int dim) {
    std::vector<std::vector<HalfSpace>> levels(dim);
    for (int k = dim - 1; k >= 0; --k) {
        levels[k] = system;
        if (k == 0) break;
        std::vector<HalfSpace> pos, neg, next;
        for (const auto& h : system) {
            double c = h.coeff[k];
            if (c > 1e-15) pos.push_back(h);
            else if (c < -1e-15) neg.push_back(h);
            else next.push_back(h);
        }
        for (const auto& p : pos)
            for (const auto& q : neg) {
                double a = -q.coeff[k], b = p.coeff[k];
                HalfSpace h{std::vector<double>(dim, 0.0), a * p.rhs + b * q.rhs};
                bool trivial = true;
                for (int i = 0; i < k; ++i) {
                    h.coeff[i] = a * p.coeff[i] + b * q.coeff[i];
                    if (std::abs(h.coeff[i]) > 1e-15) trivial = false;
                }
                if (trivial) {
                    if (h.rhs < -1e-12) return std::vector<std::vector<HalfSpace>>(dim);
                    continue;
                }
                next.push_back(h);
            }
        system = next;
    }
    return levels;
}

/// Interval for s_k given s_0..s_{k-1}, from a projection level; empty when lo >= hi.
inline std::pair<double, double> level_bounds(const std::vector<HalfSpace>& level, int k, const double* prefix) {
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    for (const auto& h : level) {
        double rest = h.rhs;
        for (int i = 0; i < k; ++i) rest -= h.coeff[i] * prefix[i];
        double c = h.coeff[k];
        if (c > 1e-15) hi = std::min(hi, rest / c);
        else if (c < -1e-15) lo = std::max(lo, rest / c);
        else if (rest < -1e-12) return {0.0, 0.0};
    }
    return {lo, hi};
}

struct LevelSetOptions {
    double tolerance = 1e-10;
    int max_intervals = 60;
    int angle_points = 32;
};

/// Coordinates of a level set of J in the squared radii s_j = |z_j|^2 / 2:
/// s_basis = offset + map * s_free, valid for s >= 0 inside the support.
struct LevelSetChart {
    std::vector<int> basis;
    std::vector<int> free;
    std::vector<double> offset;
    std::vector<std::vector<double>> map;  // basis x free
    double jacobian = 1;                   // 1 / |det W_basis|
    std::vector<double> upper;             // s_j <= upper[j]
    std::vector<std::vector<HalfSpace>> levels;
    bool empty = false;
};

inline LevelSetChart level_set_chart(const LinearHamiltonianModel& model, const std::vector<double>& eta,
                                     const std::vector<double>& upper, const std::vector<HalfSpace>& region = {}) {
    int n = model.complex_dim, r = model.torus_rank;
    if (static_cast<int>(eta.size()) != r) fail(ErrorKind::shape, "level covector has wrong dimension");
    RationalMatrix w = to_rational(model.weights);
    if (rank(w, r) < r) fail(ErrorKind::unsupported_model, "weights do not span the dual Lie algebra (positive-dimensional generic stabilizer)");
    LevelSetChart chart;
    chart.upper = upper;
    Rational best = 0;
    std::vector<int> pick(r);
    std::function<void(int, int)> choose = [&](int start, int depth) {
        if (depth == r) {
            RationalMatrix sub;
            for (int j : pick) sub.push_back(w[j]);
            Rational d = abs(determinant(sub));
            if (d > best) {
                best = d;
                chart.basis = pick;
            }
            return;
        }
        for (int j = start; j < n; ++j) {
            pick[depth] = j;
            choose(j + 1, depth + 1);
        }
    };
    choose(0, 0);
    RationalMatrix wb;
    for (int j : chart.basis) wb.push_back(w[j]);
    for (int j = 0; j < n; ++j)
        if (std::find(chart.basis.begin(), chart.basis.end(), j) == chart.basis.end()) chart.free.push_back(j);
    // J(s) = -W^T s = eta  =>  s_B = -W_B^{-T} (eta + W_F^T s_F)
    RationalMatrix m = transpose(inverse(wb), r);
    chart.jacobian = 1.0 / to_double(best);
    int f = static_cast<int>(chart.free.size());
    chart.offset.assign(r, 0.0);
    chart.map.assign(r, std::vector<double>(f, 0.0));
    for (int a = 0; a < r; ++a) {
        for (int k = 0; k < r; ++k) chart.offset[a] -= to_double(m[a][k]) * eta[k];
        for (int b = 0; b < f; ++b) {
            Rational c = 0;
            for (int k = 0; k < r; ++k) c += m[a][k] * w[chart.free[b]][k];
            chart.map[a][b] = -to_double(c);
        }
    }
    if (f == 0) {
        for (int a = 0; a < r; ++a) {
            double sb = chart.offset[a];
            if (sb < -1e-14 || sb > upper[chart.basis[a]]) chart.empty = true;
        }
        for (const auto& h : region) {
            double v = 0;
            for (int a = 0; a < r; ++a) v += h.coeff[chart.basis[a]] * chart.offset[a];
            if (v > h.rhs + 1e-14) chart.empty = true;
        }
        return chart;
    }
    std::vector<HalfSpace> sys;
    for (int b = 0; b < f; ++b) {
        HalfSpace lo{std::vector<double>(f, 0.0), 0.0}, hi{std::vector<double>(f, 0.0), upper[chart.free[b]]};
        lo.coeff[b] = -1;
        hi.coeff[b] = 1;
        sys.push_back(lo);
        sys.push_back(hi);
    }
    for (int a = 0; a < r; ++a) {
        HalfSpace lo{std::vector<double>(f), chart.offset[a]}, hi{std::vector<double>(f), upper[chart.basis[a]] - chart.offset[a]};
        for (int b = 0; b < f; ++b) {
            lo.coeff[b] = -chart.map[a][b];
            hi.coeff[b] = chart.map[a][b];
        }
        sys.push_back(lo);
        sys.push_back(hi);
    }
    for (const auto& h : region) {
        if (static_cast<int>(h.coeff.size()) != n) fail(ErrorKind::shape, "region constraint has wrong dimension");
        HalfSpace g{std::vector<double>(f, 0.0), h.rhs};
        for (int b = 0; b < f; ++b) g.coeff[b] = h.coeff[chart.free[b]];
        for (int a = 0; a < r; ++a) {
            g.rhs -= h.coeff[chart.basis[a]] * chart.offset[a];
            for (int b = 0; b < f; ++b) g.coeff[b] += h.coeff[chart.basis[a]] * chart.map[a][b];
        }
        sys.push_back(g);
    }
    chart.levels = projection_levels(sys, f);
    chart.empty = chart.levels[0].empty();
    return chart;
}

/**
 * Integral of a(p, 0) against the delta measure of J(p) = eta over C^n:
 * the leading coefficient of I_eta(mu) / (2 pi mu)^r when eta is a regular value.
 */
inline double level_set_integral(const LinearHamiltonianModel& model, const AmplitudeExpr& a,
                                 const std::vector<double>& eta, const std::vector<double>& upper,
                                 const std::vector<HalfSpace>& region, const LevelSetOptions& opt = {}) {
    if (a.point_dim() != model.real_dim() || a.lie_dim() != model.torus_rank)
        fail(ErrorKind::shape, "amplitude layout does not match the model");
    if (a.is_zero()) return 0.0;
    int n = model.complex_dim, r = model.torus_rank;
    LevelSetChart chart = level_set_chart(model, eta, upper, region);
    if (chart.empty) return 0.0;
    std::vector<int> zero_lie;
    for (int k = 0; k < r; ++k) zero_lie.push_back(model.real_dim() + k);
    AmplitudeExpr a0 = a.restrict_to_zero(zero_lie);
    CompiledAmplitude eval(a0);
    std::vector<bool> invariant = rotation_invariant_coordinates(a0);
    std::vector<int> rotating;
    for (int j = 0; j < n; ++j)
        if (!invariant[j]) rotating.push_back(j);
    int na = opt.angle_points;
    long long angle_count = 1;
    for (std::size_t k = 0; k < rotating.size(); ++k) angle_count *= na;
    double angle_weight = std::pow(2 * M_PI, n);

    auto integrand = [&](const std::vector<double>& s) {
        std::vector<double> radius(n), v(2 * n, 0.0);
        for (int j = 0; j < n; ++j) radius[j] = std::sqrt(2 * std::max(0.0, s[j]));
        double sum = 0;
        for (long long idx = 0; idx < angle_count; ++idx) {
            for (int j = 0; j < n; ++j) {
                v[2 * j] = radius[j];
                v[2 * j + 1] = 0;
            }
            long long rem = idx;
            for (int j : rotating) {
                double th = 2 * M_PI * static_cast<double>(rem % na) / na;
                rem /= na;
                v[2 * j] = radius[j] * std::cos(th);
                v[2 * j + 1] = radius[j] * std::sin(th);
            }
            sum += eval(v);
        }
        return angle_weight * sum / static_cast<double>(angle_count);
    };

    int f = static_cast<int>(chart.free.size());
    auto full_point = [&](const std::vector<double>& sf) {
        std::vector<double> s(n, 0.0);
        for (int b = 0; b < f; ++b) s[chart.free[b]] = sf[b];
        for (std::size_t a2 = 0; a2 < chart.basis.size(); ++a2) {
            double v = chart.offset[a2];
            for (int b = 0; b < f; ++b) v += chart.map[a2][b] * sf[b];
            s[chart.basis[a2]] = v;
        }
        return s;
    };
    if (f == 0) return chart.jacobian * integrand(full_point({}));

    std::vector<double> sf(f);
    std::function<double(int)> nested = [&](int k) -> double {
        auto [lo, hi] = level_bounds(chart.levels[k], k, sf.data());
        if (!(hi > lo)) return 0.0;
        std::vector<double> cuts{lo, hi};
        if (k + 1 < f) {
            // the next level's active bound switches where two of its constraints meet
            std::vector<std::pair<double, double>> lines;  // s_{k+1} bound = intercept + slope * s_k
            for (const auto& h : chart.levels[k + 1]) {
                double c = h.coeff[k + 1];
                if (std::abs(c) <= 1e-15) continue;
                double rest = h.rhs;
                for (int i = 0; i < k; ++i) rest -= h.coeff[i] * sf[i];
                lines.push_back({rest / c, -h.coeff[k] / c});
            }
            for (std::size_t i = 0; i < lines.size(); ++i)
                for (std::size_t j = i + 1; j < lines.size(); ++j) {
                    double ds = lines[i].second - lines[j].second;
                    if (std::abs(ds) <= 1e-15) continue;
                    double t = (lines[j].first - lines[i].first) / ds;
                    if (t > lo && t < hi) cuts.push_back(t);
                }
        }
        std::sort(cuts.begin(), cuts.end());
        double total = 0;
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            if (!(cuts[c + 1] > cuts[c])) continue;
            total += adaptive_integrate(
                [&, k](double t) {
                    sf[k] = t;
                    if (k + 1 == f) return integrand(full_point(sf));
                    return nested(k + 1);
                },
                cuts[c], cuts[c + 1], opt.tolerance, opt.max_intervals);
        }
        return total;
    };
    return chart.jacobian * nested(0);
}

inline double level_set_integral(const LinearHamiltonianModel& model, const AmplitudeExpr& a,
                                 const std::vector<double>& eta, const LevelSetOptions& opt = {}) {
    if (a.is_zero()) return 0.0;
    SupportBox box = a.support_box();
    std::vector<double> upper(model.complex_dim);
    for (int j = 0; j < model.complex_dim; ++j) upper[j] = 0.5 * box.complex_radius[j] * box.complex_radius[j];
    return level_set_integral(model, a, eta, upper, {}, opt);
}

/// True when no point of J^{-1}(eta) has a positive-dimensional stabilizer.
inline bool is_regular_value(const LinearHamiltonianModel& model, const RationalVector& eta) {
    int n = model.complex_dim, r = model.torus_rank;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> support;
        for (int j = 0; j < n; ++j)
            if (mask & (1u << j)) support.push_back(j);
        IntMatrix rows = weight_rows(model, support);
        if (!rows.empty() && rank(rows, r) == r) continue;
        // eta = -sum_{j in S} t_j w_j with t >= 0
        RationalMatrix a(r, RationalVector(support.size(), Rational(0)));
        for (int k = 0; k < r; ++k)
            for (std::size_t c = 0; c < support.size(); ++c) a[k][c] = -Rational(model.weights[support[c]][k]);
        if (support.empty()) {
            bool zero = std::all_of(eta.begin(), eta.end(), [](const Rational& x) { return x == 0; });
            if (zero) return false;
            continue;
        }
        if (nonnegative_solution(a, eta, static_cast<int>(support.size()))) return false;
    }
    return true;
}

}  // namespace equiloc
