#pragma once

#include <cmath>
#include <vector>

namespace equiloc {

/// Truncated Taylor series c_0 + c_1 d + ... + c_N d^N.
class Jet {
public:
    explicit Jet(int order, double value = 0.0) : c_(order + 1, 0.0) { c_[0] = value; }

    static Jet variable(int order, double value) {
        Jet j(order, value);
        if (order >= 1) j.c_[1] = 1.0;
        return j;
    }

    int order() const { return static_cast<int>(c_.size()) - 1; }
    double operator[](int k) const { return c_[k]; }
    double& operator[](int k) { return c_[k]; }

    Jet operator+(const Jet& o) const {
        Jet r = *this;
        for (std::size_t k = 0; k < c_.size(); ++k) r.c_[k] += o.c_[k];
        return r;
    }
    Jet operator-(const Jet& o) const {
        Jet r = *this;
        for (std::size_t k = 0; k < c_.size(); ++k) r.c_[k] -= o.c_[k];
        return r;
    }
    Jet operator*(double s) const {
        Jet r = *this;
        for (double& x : r.c_) x *= s;
        return r;
    }
    Jet operator+(double s) const {
        Jet r = *this;
        r.c_[0] += s;
        return r;
    }
    Jet operator*(const Jet& o) const {
        int n = order();
        Jet r(n);
        for (int k = 0; k <= n; ++k) {
            double s = 0;
            for (int j = 0; j <= k; ++j) s += c_[j] * o.c_[k - j];
            r.c_[k] = s;
        }
        return r;
    }
    Jet operator/(const Jet& o) const {
        int n = order();
        Jet q(n);
        for (int k = 0; k <= n; ++k) {
            double s = c_[k];
            for (int j = 1; j <= k; ++j) s -= o.c_[j] * q.c_[k - j];
            q.c_[k] = s / o.c_[0];
        }
        return q;
    }

    friend Jet exp(const Jet& a) {
        int n = a.order();
        Jet e(n);
        e.c_[0] = std::exp(a.c_[0]);
        for (int k = 1; k <= n; ++k) {
            double s = 0;
            for (int j = 1; j <= k; ++j) s += j * a.c_[j] * e.c_[k - j];
            e.c_[k] = s / k;
        }
        return e;
    }

    friend Jet sqrt(const Jet& a) {
        int n = a.order();
        Jet s(n);
        s.c_[0] = std::sqrt(a.c_[0]);
        for (int k = 1; k <= n; ++k) {
            double t = a.c_[k];
            for (int j = 1; j < k; ++j) t -= s.c_[j] * s.c_[k - j];
            s.c_[k] = t / (2 * s.c_[0]);
        }
        return s;
    }

private:
    std::vector<double> c_;
};

/// Smooth step: 1 for t <= 0, 0 for t >= 1, C-infinity and monotone in between.
inline double smooth_step(double t) {
    if (t <= 0) return 1.0;
    if (t >= 1) return 0.0;
    double a = std::exp(-1.0 / t);
    double b = std::exp(-1.0 / (1.0 - t));
    return b / (a + b);
}

/// Radial cutoff in the squared radius u = |x|^2: 1 for |x| <= inner, 0 for |x| >= outer.
inline double radial_profile(double u, double inner, double outer) {
    double r = std::sqrt(std::max(u, 0.0));
    return smooth_step((r - inner) / (outer - inner));
}

/// d^k/du^k of radial_profile at u, for k = 0..order.
inline std::vector<double> radial_profile_derivatives(double u, double inner, double outer, int order) {
    std::vector<double> out(order + 1, 0.0);
    double r = std::sqrt(std::max(u, 0.0));
    double t0 = (r - inner) / (outer - inner);
    if (t0 <= 0) {
        out[0] = 1.0;
        return out;
    }
    if (t0 >= 1) return out;
    // exp(-1/x) underflows below x ~ 1/745; the factor is then flat to double precision
    constexpr double flat = 1.0 / 700.0;
    Jet t = (sqrt(Jet::variable(order, u)) + (-inner)) * (1.0 / (outer - inner));
    Jet one(order, 1.0);
    Jet a(order), b(order);
    if (t0 > flat) a = exp((one / t) * -1.0);
    if (1.0 - t0 > flat) b = exp((one / (one - t)) * -1.0);
    if (t0 <= flat) {
        out[0] = 1.0;
        return out;
    }
    if (1.0 - t0 <= flat) return out;
    Jet step = b / (a + b);
    double fact = 1.0;
    for (int k = 0; k <= order; ++k) {
        if (k > 0) fact *= k;
        out[k] = step[k] * fact;
    }
    return out;
}

}  // namespace equiloc
