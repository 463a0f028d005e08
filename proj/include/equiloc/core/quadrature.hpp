#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

namespace equiloc {

using Complex = std::complex<double>;

/// Gauss-Legendre points per composite panel.
inline constexpr int kPanelPoints = 20;

struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t size() const { return nodes.size(); }
};

/// Composite Gauss-Legendre rule on [a, b] with `panels` equal panels of kPanelPoints each.
inline Rule1D composite_gauss(double a, double b, int panels) {
    using gauss = boost::math::quadrature::gauss<double, kPanelPoints>;
    const auto& x = gauss::abscissa();
    const auto& w = gauss::weights();
    Rule1D rule;
    rule.nodes.reserve(static_cast<std::size_t>(panels) * kPanelPoints);
    rule.weights.reserve(rule.nodes.capacity());
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double mid = a + (p + 0.5) * h;
        double half = 0.5 * h;
        for (std::size_t i = x.size(); i-- > 0;) {
            rule.nodes.push_back(mid - half * x[i]);
            rule.weights.push_back(half * w[i]);
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] == 0) continue;
            rule.nodes.push_back(mid + half * x[i]);
            rule.weights.push_back(half * w[i]);
        }
    }
    return rule;
}

/// Panels needed for at least `nodes` points.
inline int panels_for(long long nodes) {
    return static_cast<int>(std::max<long long>(1, (nodes + kPanelPoints - 1) / kPanelPoints));
}

template <class T>
T pairwise_sum(const T* data, std::size_t n) {
    if (n == 0) return T{};
    if (n <= 8) {
        T s = data[0];
        for (std::size_t i = 1; i < n; ++i) s += data[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(data, h) + pairwise_sum(data + h, n - h);
}

template <class T>
T pairwise_sum(const std::vector<T>& v) {
    return pairwise_sum(v.data(), v.size());
}

/// Runs body(i) for i in [0, n) on a fixed worker pool; results must be written to disjoint slots.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 16u));
    if (n < 2 || workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += workers) body(i);
        });
    for (auto& th : pool) th.join();
}

/// Globally adaptive 15/31-point Gauss-Kronrod on a finite [a, b]: the panel with the largest error
/// estimate is bisected until the total error is below max(abs_tol, rel_tol * |integral|).
inline double adaptive_integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-12,
                                 int max_intervals = 400, double abs_tol = 0.0) {
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    struct Panel {
        double lo, hi, value, error;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    auto panel = [&](double lo, double hi) {
        double err = 0;
        double v = gk::integrate(f, lo, hi, 0, 0.0, &err);
        return Panel{lo, hi, v, err};
    };
    if (a == b) return 0.0;
    std::vector<Panel> heap{panel(a, b)};
    double value = heap[0].value, error = heap[0].error;
    while (error > std::max(abs_tol, rel_tol * std::abs(value)) && static_cast<int>(heap.size()) < max_intervals) {
        std::pop_heap(heap.begin(), heap.end());
        Panel worst = heap.back();
        heap.pop_back();
        double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end());
            break;
        }
        for (const Panel& p : {panel(worst.lo, mid), panel(mid, worst.hi)}) {
            heap.push_back(p);
            std::push_heap(heap.begin(), heap.end());
        }
        value = 0;
        error = 0;
        std::vector<double> parts;
        for (const auto& p : heap) {
            parts.push_back(p.value);
            error += p.error;
        }
        std::sort(parts.begin(), parts.end());
        value = pairwise_sum(parts);
    }
    return value;
}

inline Complex adaptive_integrate_complex(const std::function<Complex(double)>& f, double a, double b,
                                          double rel_tol = 1e-12, int max_intervals = 400, double abs_tol = 0.0) {
    double re = adaptive_integrate([&](double x) { return f(x).real(); }, a, b, rel_tol, max_intervals, abs_tol);
    double im = adaptive_integrate([&](double x) { return f(x).imag(); }, a, b, rel_tol, max_intervals, abs_tol);
    return {re, im};
}

}  // namespace equiloc
