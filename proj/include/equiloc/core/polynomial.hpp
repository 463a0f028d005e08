#pragma once

#include <algorithm>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "equiloc/core/rational.hpp"

namespace equiloc {

using Exponents = std::vector<int>;

/// Multivariate polynomial with exact rational coefficients.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(int nvars) : nvars_(nvars) {}

    static Polynomial constant(int nvars, const Rational& c) {
        Polynomial p(nvars);
        p.add_term(Exponents(nvars, 0), c);
        return p;
    }
    static Polynomial variable(int nvars, int index) {
        Polynomial p(nvars);
        Exponents e(nvars, 0);
        e.at(index) = 1;
        p.add_term(e, 1);
        return p;
    }
    static Polynomial linear(const RationalVector& coeffs) {
        int n = static_cast<int>(coeffs.size());
        Polynomial p(n);
        for (int i = 0; i < n; ++i) {
            Exponents e(n, 0);
            e[i] = 1;
            p.add_term(e, coeffs[i]);
        }
        return p;
    }

    int nvars() const { return nvars_; }
    const std::map<Exponents, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const Exponents& e, const Rational& c) {
        if (static_cast<int>(e.size()) != nvars_) fail(ErrorKind::shape, "monomial arity mismatch");
        if (c == 0) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_.emplace(e, c);
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Rational coefficient(const Exponents& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    int total_degree() const {
        int d = -1;
        for (const auto& [e, c] : terms_) {
            int s = 0;
            for (int k : e) s += k;
            d = std::max(d, s);
        }
        return d;
    }

    int degree_in(int var) const {
        int d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, e[var]);
        return d;
    }

    bool depends_on(int var) const {
        for (const auto& [e, c] : terms_)
            if (e[var] > 0) return true;
        return false;
    }

    Polynomial operator+(const Polynomial& o) const {
        Polynomial r = *this;
        r += o;
        return r;
    }
    Polynomial& operator+=(const Polynomial& o) {
        check_arity(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    Polynomial operator-(const Polynomial& o) const {
        Polynomial r = *this;
        check_arity(o);
        for (const auto& [e, c] : o.terms_) r.add_term(e, -c);
        return r;
    }
    Polynomial operator-() const { return *this * Rational(-1); }
    Polynomial operator*(const Rational& s) const {
        Polynomial r(nvars_);
        if (s == 0) return r;
        for (const auto& [e, c] : terms_) r.terms_.emplace(e, c * s);
        return r;
    }
    Polynomial operator*(const Polynomial& o) const {
        check_arity(o);
        Polynomial r(nvars_);
        Exponents e(nvars_);
        for (const auto& [e1, c1] : terms_)
            for (const auto& [e2, c2] : o.terms_) {
                for (int i = 0; i < nvars_; ++i) e[i] = e1[i] + e2[i];
                r.add_term(e, c1 * c2);
            }
        return r;
    }
    bool operator==(const Polynomial& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }
    bool operator<(const Polynomial& o) const {
        if (nvars_ != o.nvars_) return nvars_ < o.nvars_;
        return terms_ < o.terms_;
    }

    Polynomial pow(int k) const {
        Polynomial r = constant(nvars_, 1);
        for (int i = 0; i < k; ++i) r = r * *this;
        return r;
    }

    Polynomial derivative(int var) const {
        Polynomial r(nvars_);
        for (const auto& [e, c] : terms_) {
            if (e[var] == 0) continue;
            Exponents f = e;
            f[var] -= 1;
            r.add_term(f, c * e[var]);
        }
        return r;
    }

    /// Sets the listed variables to zero and removes them; remaining variables keep their order.
    Polynomial restrict_to_zero(const std::vector<int>& removed) const {
        std::vector<bool> gone(nvars_, false);
        for (int i : removed) gone.at(i) = true;
        int keep = 0;
        for (bool g : gone) keep += g ? 0 : 1;
        Polynomial r(keep);
        for (const auto& [e, c] : terms_) {
            bool vanishes = false;
            Exponents f;
            f.reserve(keep);
            for (int i = 0; i < nvars_; ++i) {
                if (gone[i]) {
                    if (e[i] > 0) vanishes = true;
                } else {
                    f.push_back(e[i]);
                }
            }
            if (!vanishes) r.add_term(f, c);
        }
        return r;
    }

    /// Substitutes v_i -> factor_i * v_i.
    Polynomial scale_variables(const RationalVector& factor) const {
        if (static_cast<int>(factor.size()) != nvars_) fail(ErrorKind::shape, "scale arity mismatch");
        Polynomial r(nvars_);
        for (const auto& [e, c] : terms_) {
            Rational s = c;
            for (int i = 0; i < nvars_; ++i) s *= rational_pow(factor[i], e[i]);
            r.add_term(e, s);
        }
        return r;
    }

    /// Substitutes v_i -> images[i]; all images share one arity.
    Polynomial compose(const std::vector<Polynomial>& images) const {
        if (static_cast<int>(images.size()) != nvars_) fail(ErrorKind::shape, "compose arity mismatch");
        int m = images.empty() ? 0 : images[0].nvars();
        std::vector<std::vector<Polynomial>> powers(nvars_);
        Polynomial r(m);
        for (const auto& [e, c] : terms_) {
            Polynomial mono = constant(m, c);
            for (int i = 0; i < nvars_; ++i) {
                if (e[i] == 0) continue;
                auto& pw = powers[i];
                if (pw.empty()) pw.push_back(constant(m, 1));
                while (static_cast<int>(pw.size()) <= e[i]) pw.push_back(pw.back() * images[i]);
                mono = mono * pw[e[i]];
            }
            r += mono;
        }
        return r;
    }

    /// Reorders/embeds variables: new variable map[i] receives old variable i.
    Polynomial embed(int new_nvars, const std::vector<int>& map) const {
        Polynomial r(new_nvars);
        for (const auto& [e, c] : terms_) {
            Exponents f(new_nvars, 0);
            for (int i = 0; i < nvars_; ++i) f.at(map[i]) += e[i];
            r.add_term(f, c);
        }
        return r;
    }

    double evaluate(const std::vector<double>& x) const {
        double s = 0;
        for (const auto& [e, c] : terms_) {
            double m = to_double(c);
            for (int i = 0; i < nvars_; ++i)
                for (int k = 0; k < e[i]; ++k) m *= x[i];
            s += m;
        }
        return s;
    }

    Rational evaluate(const RationalVector& x) const {
        Rational s = 0;
        for (const auto& [e, c] : terms_) {
            Rational m = c;
            for (int i = 0; i < nvars_; ++i) m *= rational_pow(x[i], e[i]);
            s += m;
        }
        return s;
    }

    std::complex<double> evaluate(const std::vector<std::complex<double>>& x) const {
        std::complex<double> s = 0;
        for (const auto& [e, c] : terms_) {
            std::complex<double> m = to_double(c);
            for (int i = 0; i < nvars_; ++i)
                for (int k = 0; k < e[i]; ++k) m *= x[i];
            s += m;
        }
        return s;
    }

    double l1_norm() const {
        double s = 0;
        for (const auto& [e, c] : terms_) s += std::abs(to_double(c));
        return s;
    }

    std::string to_string(const std::vector<std::string>& names) const {
        if (terms_.empty()) return "0";
        std::string out;
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            const auto& [e, c] = *it;
            std::string coef = equiloc::to_string(c);
            if (!out.empty()) out += c < 0 ? " - " : " + ";
            else if (c < 0) out += "-";
            if (c < 0) coef = equiloc::to_string(-c);
            bool constant_term = std::all_of(e.begin(), e.end(), [](int k) { return k == 0; });
            std::string mono;
            for (int i = 0; i < nvars_; ++i) {
                if (e[i] == 0) continue;
                if (!mono.empty()) mono += "*";
                mono += names.at(i);
                if (e[i] > 1) mono += "^" + std::to_string(e[i]);
            }
            if (constant_term) out += coef;
            else if (coef == "1") out += mono;
            else out += coef + "*" + mono;
        }
        return out;
    }

private:
    void check_arity(const Polynomial& o) const {
        if (o.nvars_ != nvars_) fail(ErrorKind::shape, "polynomial arity mismatch");
    }

    int nvars_ = 0;
    std::map<Exponents, Rational> terms_;
};

/// Double-precision snapshot of a Polynomial for hot evaluation loops.
class CompiledPolynomial {
public:
    CompiledPolynomial() = default;
    explicit CompiledPolynomial(const Polynomial& p) : nvars_(p.nvars()), max_exp_(p.nvars(), 0) {
        for (const auto& [e, c] : p.terms()) {
            coef_.push_back(to_double(c));
            for (int i = 0; i < nvars_; ++i) {
                exps_.push_back(e[i]);
                max_exp_[i] = std::max(max_exp_[i], e[i]);
            }
        }
    }

    int nvars() const { return nvars_; }
    bool empty() const { return coef_.empty(); }

    /// `powers[i][k]` must hold x_i^k for k up to max_exponent(i).
    double evaluate_with_powers(const std::vector<std::vector<double>>& powers) const {
        double s = 0;
        std::size_t nt = coef_.size();
        for (std::size_t t = 0; t < nt; ++t) {
            double m = coef_[t];
            const int* e = &exps_[t * nvars_];
            for (int i = 0; i < nvars_; ++i)
                if (e[i]) m *= powers[i][e[i]];
            s += m;
        }
        return s;
    }

    double evaluate(const std::vector<double>& x) const {
        std::vector<std::vector<double>> powers(nvars_);
        for (int i = 0; i < nvars_; ++i) {
            powers[i].resize(max_exp_[i] + 1);
            powers[i][0] = 1;
            for (int k = 1; k <= max_exp_[i]; ++k) powers[i][k] = powers[i][k - 1] * x[i];
        }
        return evaluate_with_powers(powers);
    }

    int max_exponent(int i) const { return max_exp_[i]; }

private:
    int nvars_ = 0;
    std::vector<double> coef_;
    std::vector<int> exps_;
    std::vector<int> max_exp_;
};

}  // namespace equiloc
