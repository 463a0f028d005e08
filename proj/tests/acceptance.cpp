// Acceptance gate: one PASS/FAIL line per criterion, each with its runtime budget.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "equiloc.hpp"

using namespace equiloc;

namespace {

struct Outcome {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << " [failed: " << what << "]";
        }
    }
};

LinearHamiltonianModel model_of(const IntMatrix& w) { return LinearHamiltonianModel::from_weights(w); }

std::vector<IntMatrix> corpus_models() {
    return {{{1}, {-1}},
            {{1}, {-1}, {1}, {-1}},
            {{2}, {-1}},
            {{1, 0}, {-1, 0}, {0, 1}, {0, -1}},
            {{1, 0}, {0, 1}, {-1, -1}},
            {{1, 2}, {-1, 1}, {0, -1}}};
}

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(lo * std::pow(hi / lo, double(i) / (count - 1)));
    return out;
}

ConeLambda ray(std::initializer_list<long long> r) {
    RationalVector v;
    for (long long x : r) v.push_back(Rational(x));
    return ConeLambda{{v}};
}

void criterion_1(Outcome& o) {
    auto a = parse_amplitude("gauss({p1, X1}, 1/2)", 1, 1);
    auto nus = log_grid(0.02, 0.2, 8);
    auto e = inner_sp_expansion(a, nus, 2);
    std::vector<double> err;
    for (std::size_t i = 0; i < nus.size(); ++i) {
        double exact = 2 * M_PI * nus[i] / std::sqrt(1 + nus[i] * nus[i]);
        double partial = 2 * M_PI * nus[i] * (1 - nus[i] * nus[i] / 2);
        o.require(std::abs(e.partial_sums[i] - partial) <= 1e-14 * partial, "partial sum is 2 pi nu (1 - nu^2/2)");
        err.push_back(std::abs(e.partial_sums[i] - exact));
    }
    double slope = fit_order(nus, err, false).alpha;
    o.detail << "slope=" << slope;
    o.require(std::abs(slope - 5) <= 0.15, "slope 5 +- 0.15");
}

void criterion_2(Outcome& o) {
    auto m = model_of({{1}, {-1}});
    // g = exp(-X^2/2): I/(2 pi mu) = pi^2 e^{b^2} erfc(b) with b = sqrt(2) mu
    auto a = parse_amplitude("gauss(p) * gauss(X, 1/2)", 4, 1);
    double mu = 0.01;
    Complex v = gaussian_exact_I(m, a, mu);
    double dev = std::abs(v / (2 * M_PI * mu) - M_PI * M_PI) / (M_PI * M_PI);
    o.detail << "relative deviation=" << dev;
    o.require(dev <= 0.02, "|I/(2 pi mu) - pi^2| <= 0.02 pi^2");
    double worst = 0;
    for (double m2 : {0.2, 0.1, 0.05}) {
        Complex g = gaussian_exact_I(m, a, m2);
        Complex b = brute_force_I(m, a, m2).value;
        worst = std::max(worst, std::abs(b - g) / std::abs(g));
    }
    o.detail << " brute-vs-exact=" << worst;
    o.require(worst <= 1e-5, "brute force agrees with the closed form to 1e-5");
}

void criterion_3(Outcome& o) {
    auto mus = log_grid(0.01, 0.2, 5);
    auto pair = desingularize(model_of({{1}, {-1}}), parse_amplitude("gauss(p) * bump(X, 1, 2)", 4, 1), mus, 8);
    o.detail << "alpha(1,-1)=" << pair.plain.alpha;
    o.require(pair.plain.alpha >= 1.8 && pair.plain.alpha <= 2.2, "alpha in [1.8, 2.2]");
    auto twice = desingularize(model_of({{1}, {-1}, {1}, {-1}}), parse_amplitude("gauss(p) * bump(X, 1, 2)", 8, 1), mus, 8);
    o.detail << " lambda_a(1,-1,1,-1)=" << twice.lambda_a << " beta=" << twice.with_log.beta;
    o.require(twice.lambda_a == 0, "lambda_a = 0");
    o.require(std::abs(twice.with_log.beta) <= 0.5, "|beta| <= 0.5");
}

void criterion_4(Outcome& o) {
    auto pair = model_of({{1}, {-1}});
    auto box = parse_amplitude("bump(p, 1, 2) * bump(X, 1, 2)", 4, 1).support_box();
    int singular = build_desing_tree(pair, box, {Rational(0)}, 8).tree_depth();
    int regular = build_desing_tree(pair, box, {Rational(1, 2)}, 8).tree_depth();
    o.detail << "depth(1,-1)=" << singular << " depth(eta=1/2)=" << regular;
    o.require(singular == 1 && regular == 0, "tree depths 1 and 0");
    for (const auto& w : corpus_models()) {
        auto m = model_of(w);
        auto b = parse_amplitude("bump(p, 1, 2) * bump(X, 1, 2)", m.real_dim(), m.torus_rank).support_box();
        RationalVector eta(m.torus_rank, Rational(0));
        auto cat = strata_catalog(m, b, eta);
        int depth = build_desing_tree(m, b, eta, cat.chain_bound + 1).tree_depth();
        o.require(depth <= cat.chain_bound + 1, "termination within the chain bound");
    }
    DyadicPartition part;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> logr(std::log(1e-8), std::log(0.5)), dir(-1, 1);
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
        double s = 0;
        for (auto [l, v] : dyadic_weights(part, w)) s += v;
        worst = std::max(worst, std::abs(s - 1));
    }
    o.detail << " partition deviation=" << worst;
    o.require(worst <= 1e-12, "partition of unity to 1e-12");
}

void criterion_5(Outcome& o) {
    auto data = sphere_fixed_points();
    auto terms = localization_terms(data, 1);
    bool symbolic = terms.size() == 2;
    for (const auto& t : terms) {
        symbolic = symbolic && t.denominators.size() == 1 && t.denominators[0].second == 1 &&
                   t.denominators[0].first[0] == (t.exponent[0] > 0 ? 1 : -1) && abs(t.exponent[0]) == 1 &&
                   t.numerator == Polynomial::constant(1, 1);
    }
    o.require(symbolic, "terms e^{iY}/(iY) + e^{-iY}/(-iY)");
    auto u = dh_measure(data, ray({1}));
    o.require(u.serialize() == "# measure rank 1 two_pi_power 1\ninterval -1 1 coeffs 1\n", "measure 2 pi 1_[-1,1]");
    SphereModel s;
    double worst = 0;
    for (int i = 1; i <= 20; ++i) {
        double Y = 0.37 * i;
        Complex local = localization_sum(data, 1, {Y});
        o.require(std::abs(local - 2 * std::sin(Y) / Y) <= 1e-14, "sum equals 2 sin Y / Y");
        Complex numeric = s.equivariant_integral(Y);
        worst = std::max(worst, std::abs(numeric - Complex(0, -2 * M_PI) * local) / (1 + std::abs(local)));
    }
    o.detail << "surface oracle deviation=" << worst;
    o.require(worst <= 1e-5, "surface integral within 1e-5");
}

void criterion_6(Outcome& o) {
    auto s = dh_measure(sphere_fixed_points(), ray({1}));
    for (const Rational& e : {Rational(1, 2), Rational(-1, 2)}) {
        o.require(jk_residue_exact(s, {e}) == 1 && s.two_pi_power == 1, "S^2 residue 2 pi");
    }
    std::vector<FixedPointDatum> square;
    for (int a : {1, -1})
        for (int b : {1, -1}) square.push_back({"p", 0, {Rational(a), Rational(b)}, {{a, 0}, {0, b}}, {}});
    struct Example {
        std::string name;
        std::vector<FixedPointDatum> data;
        std::vector<ConeLambda> cones;
        std::vector<RationalVector> etas;  // at least two per chamber
    };
    std::vector<Example> examples{
        {"S2", sphere_fixed_points(), {ray({1}), ray({-1})}, {{Rational(1, 2)}, {Rational(3)}, {Rational(-1, 3)}, {Rational(-2)}}},
        {"S2xS2", square, {ray({1, 2}), ray({-2, 1}), ray({-1, -3})},
         {{Rational(1), Rational(2)}, {Rational(3), Rational(1)}, {Rational(-1), Rational(1, 2)}}},
        {"cut(1,-1)", cut_fixed_points(model_of({{1}, {-1}}), 1), {ray({1}), ray({-1})}, {{Rational(1)}, {Rational(5)}, {Rational(-1)}}},
        {"cut(1,2,-1)", cut_fixed_points(model_of({{1}, {2}, {-1}}), 1), {ray({1}), ray({-1})}, {{Rational(1)}, {Rational(-3)}}},
        {"cut(m2)", cut_fixed_points(model_of({{1, 0}, {0, 1}, {-1, -1}}), 1), {ray({1, 2}), ray({2, 1}), ray({-1, -3})},
         {{Rational(1, 3), Rational(1, 5)}, {Rational(1), Rational(-1)}, {Rational(2), Rational(-1)}}},
    };
    for (const auto& ex : examples) {
        std::vector<Rational> ref;
        for (std::size_t c = 0; c < ex.cones.size(); ++c) {
            auto u = dh_measure(ex.data, ex.cones[c]);
            for (std::size_t k = 0; k < ex.etas.size(); ++k) {
                Rational r = jk_residue_exact(u, ex.etas[k]);
                if (c == 0) ref.push_back(r);
                else o.require(r == ref[k], ex.name + " residue independent of the cone");
            }
        }
        o.detail << ex.name << "=" << to_string(ref.front()) << " ";
    }
    // chamber independence: rays inside the chamber of eta = (1/3, 1/5) give the same residue
    auto m2 = dh_measure(examples.back().data, examples.back().cones.front());
    for (const RationalVector& eta : {RationalVector{Rational(1), Rational(1, 2)}, RationalVector{Rational(7), Rational(2)}})
        o.require(jk_residue_exact(m2, eta) == Rational(1, 3), "chamber independence");
    auto pair = model_of({{1}, {-1}});
    for (const auto& cone : {ray({1}), ray({-1})}) {
        ResidueCheck c = residue_formula_check(pair, 1, 1, cone, {Rational(1)});
        double rel = c.difference / std::abs(c.lhs);
        o.detail << "residue check rel=" << rel << " ";
        o.require(rel <= 1e-6, "residue formula lhs vs rhs 1e-6");
    }
}

void criterion_7(Outcome& o) {
    double v = weyl_lie_algebra_integral(CompactGroupData::su2(), [](const std::vector<double>& x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
    });
    double rel = std::abs(v - std::pow(M_PI, 1.5)) / std::pow(M_PI, 1.5);
    o.detail << "relative error=" << rel;
    o.require(rel <= 1e-6, "Weyl formula within 1e-6");
}

void criterion_8(Outcome& o) {
    for (const auto& w : corpus_models()) {
        auto m = model_of(w);
        for (const auto& c : structural_checks(m, 11, 100)) {
            o.require(c.pass(), c.name);
            o.require(!c.skipped || c.name.find("Hessian") != std::string::npos, c.name + " ran");
        }
    }
    // the central-difference residual scales as h^2 once J has a cubic term
    auto m = model_of({{1}, {-1}});
    RealVector v{0.0, 0.3, -0.2, 0.1}, X{1.0};
    auto cubic = [&](const RealVector& q) {
        RealVector J = momentum_map(m, q);
        J[0] += q[0] * q[0] * q[0];
        return J;
    };
    double ratio = momentum_defect(m, v, X, 1e-2, cubic) / momentum_defect(m, v, X, 5e-3, cubic);
    o.detail << "halving h divides the residual by " << ratio;
    o.require(std::abs(ratio - 4) <= 0.05, "O(h^2) residual");
    int hessian_points = 0;
    for (const auto& c : structural_checks(model_of({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}), 11, 100))
        if (c.name.find("Hessian") != std::string::npos) hessian_points = c.samples;
    o.detail << " hessian points=" << hessian_points;
    o.require(hessian_points == 100, "Hessian on 100 points");
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        std::string name;
        double budget;  // seconds
        std::function<void(Outcome&)> run;
    };
    std::vector<Criterion> criteria{
        {1, "inner stationary phase order", 1, criterion_1},
        {2, "singular leading term", 30, criterion_2},
        {3, "remainder order", 120, criterion_3},
        {4, "desingularization structure", 10, criterion_4},
        {5, "localization on S^2", 10, criterion_5},
        {6, "residues", 30, criterion_6},
        {7, "Weyl integration", 5, criterion_7},
        {8, "structural identities", 30, criterion_8},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        auto start = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.budget) o.require(false, "runtime budget");
        std::printf("%s criterion %d (%s): %s (%.2f s of %.0f s)\n", o.ok ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.str().c_str(),
                    secs, c.budget);
        if (!o.ok) ++failures;
    }
    std::fflush(stdout);
    return failures == 0 ? 0 : 1;
}
