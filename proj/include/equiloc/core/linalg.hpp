#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "equiloc/core/rational.hpp"

namespace equiloc {

using IntMatrix = std::vector<std::vector<long long>>;
using BigMatrix = std::vector<std::vector<BigInt>>;

inline RationalMatrix to_rational(const IntMatrix& m) {
    RationalMatrix r(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (long long x : m[i]) r[i].push_back(Rational(x));
    return r;
}

inline BigMatrix to_big(const IntMatrix& m) {
    BigMatrix r(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (long long x : m[i]) r[i].push_back(BigInt(x));
    return r;
}

/// Reduced row echelon form in place; returns pivot columns.
inline std::vector<int> row_reduce(RationalMatrix& a, int ncols) {
    std::vector<int> pivots;
    int row = 0;
    int nrows = static_cast<int>(a.size());
    for (int col = 0; col < ncols && row < nrows; ++col) {
        int p = -1;
        for (int i = row; i < nrows; ++i)
            if (a[i][col] != 0) {
                p = i;
                break;
            }
        if (p < 0) continue;
        std::swap(a[p], a[row]);
        Rational inv = Rational(1) / a[row][col];
        for (int j = 0; j < ncols; ++j) a[row][j] *= inv;
        for (int i = 0; i < nrows; ++i) {
            if (i == row || a[i][col] == 0) continue;
            Rational f = a[i][col];
            for (int j = 0; j < ncols; ++j) a[i][j] -= f * a[row][j];
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

inline int rank(RationalMatrix a, int ncols) { return static_cast<int>(row_reduce(a, ncols).size()); }

inline int rank(const IntMatrix& a, int ncols) { return rank(to_rational(a), ncols); }

/// Basis of {x : A x = 0} for A with `ncols` columns.
inline std::vector<RationalVector> nullspace(RationalMatrix a, int ncols) {
    auto pivots = row_reduce(a, ncols);
    std::vector<bool> is_pivot(ncols, false);
    for (int c : pivots) is_pivot[c] = true;
    std::vector<RationalVector> basis;
    for (int free = 0; free < ncols; ++free) {
        if (is_pivot[free]) continue;
        RationalVector v(ncols, Rational(0));
        v[free] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a[r][free];
        basis.push_back(v);
    }
    return basis;
}

/// Scales a rational vector to the primitive integer vector with the same direction.
inline std::vector<long long> primitive_integer(const RationalVector& v) {
    BigInt l = 1;
    for (const auto& q : v) {
        BigInt d = boost::multiprecision::denominator(q);
        l = l / boost::multiprecision::gcd(l, d) * d;
    }
    std::vector<BigInt> ints;
    BigInt g = 0;
    for (const auto& q : v) {
        BigInt x = boost::multiprecision::numerator(q) * (l / boost::multiprecision::denominator(q));
        ints.push_back(x);
        g = boost::multiprecision::gcd(g, x);
    }
    std::vector<long long> out;
    for (auto& x : ints) out.push_back(g == 0 ? 0 : static_cast<long long>(x / g));
    return out;
}

inline bool rowspace_contains(const RationalMatrix& rows, const RationalVector& v, int ncols) {
    RationalMatrix a = rows;
    int r0 = rank(a, ncols);
    a.push_back(v);
    return rank(a, ncols) == r0;
}

inline Rational determinant(RationalMatrix a) {
    int n = static_cast<int>(a.size());
    Rational det = 1;
    for (int col = 0; col < n; ++col) {
        int p = -1;
        for (int i = col; i < n; ++i)
            if (a[i][col] != 0) {
                p = i;
                break;
            }
        if (p < 0) return 0;
        if (p != col) {
            std::swap(a[p], a[col]);
            det = -det;
        }
        det *= a[col][col];
        for (int i = col + 1; i < n; ++i) {
            Rational f = a[i][col] / a[col][col];
            for (int j = col; j < n; ++j) a[i][j] -= f * a[col][j];
        }
    }
    return det;
}

inline RationalMatrix inverse(const RationalMatrix& a) {
    int n = static_cast<int>(a.size());
    RationalMatrix aug(n, RationalVector(2 * n, Rational(0)));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) aug[i][j] = a[i][j];
        aug[i][n + i] = 1;
    }
    auto pivots = row_reduce(aug, 2 * n);
    if (static_cast<int>(pivots.size()) < n || pivots[n - 1] != n - 1)
        fail(ErrorKind::domain, "singular matrix");
    RationalMatrix inv(n, RationalVector(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) inv[i][j] = aug[i][n + j];
    return inv;
}

inline RationalMatrix transpose(const RationalMatrix& a, int ncols) {
    RationalMatrix t(ncols, RationalVector(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int j = 0; j < ncols; ++j) t[j][i] = a[i][j];
    return t;
}

inline RationalVector mat_vec(const RationalMatrix& a, const RationalVector& x) {
    RationalVector y(a.size(), Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
    return y;
}

/// Canonical Hermite normal form (row style) of the lattice spanned by `rows` in Z^dim.
inline BigMatrix hermite_normal_form(BigMatrix a, int dim) {
    int m = static_cast<int>(a.size());
    int k = 0;
    auto floor_div = [](const BigInt& x, const BigInt& y) {
        BigInt q = x / y;
        if ((x % y != 0) && ((x < 0) != (y < 0))) q -= 1;
        return q;
    };
    for (int col = 0; col < dim && k < m; ++col) {
        while (true) {
            int best = -1;
            for (int i = k; i < m; ++i)
                if (a[i][col] != 0 && (best < 0 || abs(a[i][col]) < abs(a[best][col]))) best = i;
            if (best < 0) break;
            std::swap(a[best], a[k]);
            bool done = true;
            for (int i = k + 1; i < m; ++i) {
                if (a[i][col] == 0) continue;
                BigInt q = a[i][col] / a[k][col];
                for (int j = 0; j < dim; ++j) a[i][j] -= q * a[k][j];
                if (a[i][col] != 0) done = false;
            }
            if (done) break;
        }
        if (a[k][col] == 0) continue;
        if (a[k][col] < 0)
            for (int j = 0; j < dim; ++j) a[k][j] = -a[k][j];
        for (int i = 0; i < k; ++i) {
            BigInt q = floor_div(a[i][col], a[k][col]);
            if (q != 0)
                for (int j = 0; j < dim; ++j) a[i][j] -= q * a[k][j];
        }
        ++k;
    }
    a.resize(k);
    return a;
}

inline bool lattice_contains(const BigMatrix& hnf, std::vector<BigInt> v) {
    int dim = static_cast<int>(v.size());
    for (const auto& row : hnf) {
        int col = 0;
        while (col < dim && row[col] == 0) ++col;
        if (col == dim) continue;
        if (v[col] % row[col] != 0) return false;
        BigInt q = v[col] / row[col];
        for (int j = 0; j < dim; ++j) v[j] -= q * row[j];
    }
    return std::all_of(v.begin(), v.end(), [](const BigInt& x) { return x == 0; });
}

/// True when every generator of `sub` lies in the lattice with HNF `super_hnf`.
inline bool lattice_subset(const BigMatrix& sub, const BigMatrix& super_hnf) {
    for (const auto& row : sub)
        if (!lattice_contains(super_hnf, row)) return false;
    return true;
}

/// Nonzero Smith invariant factors of an integer matrix.
inline std::vector<BigInt> smith_invariants(BigMatrix a, int ncols) {
    int m = static_cast<int>(a.size());
    int n = ncols;
    std::vector<BigInt> diag;
    for (int t = 0; t < std::min(m, n); ++t) {
        int pi = -1, pj = -1;
        for (int i = t; i < m; ++i)
            for (int j = t; j < n; ++j)
                if (a[i][j] != 0 && (pi < 0 || abs(a[i][j]) < abs(a[pi][pj]))) {
                    pi = i;
                    pj = j;
                }
        if (pi < 0) break;
        std::swap(a[pi], a[t]);
        for (int i = 0; i < m; ++i) std::swap(a[i][pj], a[i][t]);
        while (true) {
            bool clean = true;
            for (int i = t + 1; i < m; ++i) {
                if (a[i][t] == 0) continue;
                BigInt q = a[i][t] / a[t][t];
                for (int j = t; j < n; ++j) a[i][j] -= q * a[t][j];
                if (a[i][t] != 0) {
                    clean = false;
                    std::swap(a[i], a[t]);
                }
            }
            for (int j = t + 1; j < n; ++j) {
                if (a[t][j] == 0) continue;
                BigInt q = a[t][j] / a[t][t];
                for (int i = t; i < m; ++i) a[i][j] -= q * a[i][t];
                if (a[t][j] != 0) {
                    clean = false;
                    for (int i = 0; i < m; ++i) std::swap(a[i][j], a[i][t]);
                }
            }
            if (!clean) continue;
            int bad = -1;
            for (int i = t + 1; i < m && bad < 0; ++i)
                for (int j = t + 1; j < n; ++j)
                    if (a[i][j] % a[t][t] != 0) {
                        bad = i;
                        break;
                    }
            if (bad < 0) break;
            for (int j = t; j < n; ++j) a[t][j] += a[bad][j];
        }
        diag.push_back(abs(a[t][t]));
    }
    return diag;
}

/// Exact phase-one simplex: some x >= 0 with A x = b, or nothing.
inline std::optional<RationalVector> nonnegative_solution(const RationalMatrix& a, const RationalVector& b, int ncols) {
    int m = static_cast<int>(a.size());
    if (m == 0) return RationalVector(ncols, Rational(0));
    int total = ncols + m;
    RationalMatrix t(m, RationalVector(total + 1, Rational(0)));
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) {
        Rational s = b[i] < 0 ? -1 : 1;
        for (int j = 0; j < ncols; ++j) t[i][j] = s * a[i][j];
        t[i][ncols + i] = 1;
        t[i][total] = s * b[i];
        basis[i] = ncols + i;
    }
    // reduced costs of the auxiliary objective: minimize the sum of artificials
    RationalVector cost(total + 1, Rational(0));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j <= total; ++j)
            if (j < ncols || j == total) cost[j] -= t[i][j];
    while (true) {
        int enter = -1;
        for (int j = 0; j < total; ++j)
            if (cost[j] < 0) {
                enter = j;
                break;
            }
        if (enter < 0) break;
        int leave = -1;
        Rational best;
        for (int i = 0; i < m; ++i) {
            if (t[i][enter] <= 0) continue;
            Rational ratio = t[i][total] / t[i][enter];
            if (leave < 0 || ratio < best || (ratio == best && basis[i] < basis[leave])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave < 0) break;
        Rational piv = t[leave][enter];
        for (auto& x : t[leave]) x /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == leave || t[i][enter] == 0) continue;
            Rational f = t[i][enter];
            for (int j = 0; j <= total; ++j) t[i][j] -= f * t[leave][j];
        }
        Rational f = cost[enter];
        for (int j = 0; j <= total; ++j) cost[j] -= f * t[leave][j];
        basis[leave] = enter;
    }
    if (cost[total] != 0) return std::nullopt;
    RationalVector x(ncols, Rational(0));
    for (int i = 0; i < m; ++i)
        if (basis[i] < ncols) x[basis[i]] = t[i][total];
    for (int i = 0; i < m; ++i) {
        Rational s = 0;
        for (int j = 0; j < ncols; ++j) s += a[i][j] * x[j];
        if (s != b[i]) return std::nullopt;
    }
    return x;
}

}  // namespace equiloc
