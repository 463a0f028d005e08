#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <string>
#include <vector>

#include "equiloc/core/errors.hpp"

namespace equiloc {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;
using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<std::vector<Rational>>;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline std::vector<double> to_double(const RationalVector& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
    return out;
}

/// "p/q", or "p" when the denominator is 1.
inline std::string to_string(const Rational& q) {
    BigInt num = boost::multiprecision::numerator(q);
    BigInt den = boost::multiprecision::denominator(q);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

/// Accepts "p", "p/q", and finite decimals such as "-0.25" or "1.5e-3" (converted exactly).
inline Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) fail(ErrorKind::parse, "empty rational literal");
    auto slash = s.find('/');
    try {
        if (slash != std::string::npos) {
            BigInt num(s.substr(0, slash));
            BigInt den(s.substr(slash + 1));
            if (den == 0) fail(ErrorKind::parse, "zero denominator in '" + text + "'");
            return Rational(num, den);
        }
        bool negative = false;
        std::size_t pos = 0;
        if (s[pos] == '+' || s[pos] == '-') {
            negative = s[pos] == '-';
            ++pos;
        }
        std::string digits;
        int scale = 0;
        bool seen_point = false;
        for (; pos < s.size() && s[pos] != 'e' && s[pos] != 'E'; ++pos) {
            char c = s[pos];
            if (c == '.') {
                if (seen_point) fail(ErrorKind::parse, "bad number '" + text + "'");
                seen_point = true;
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                digits += c;
                if (seen_point) --scale;
            } else {
                fail(ErrorKind::parse, "bad number '" + text + "'");
            }
        }
        if (digits.empty()) fail(ErrorKind::parse, "bad number '" + text + "'");
        if (pos < s.size()) scale += std::stoi(s.substr(pos + 1));
        Rational value{BigInt(digits)};
        BigInt ten_pow = 1;
        for (int k = 0; k < std::abs(scale); ++k) ten_pow *= 10;
        if (scale > 0) value *= Rational(ten_pow);
        if (scale < 0) value /= Rational(ten_pow);
        return negative ? Rational(-value) : value;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        fail(ErrorKind::parse, "bad number '" + text + "'");
    }
}

inline Rational rational_pow(const Rational& base, int exponent) {
    Rational result = 1;
    Rational b = exponent >= 0 ? base : Rational(1) / base;
    for (int k = 0; k < std::abs(exponent); ++k) result *= b;
    return result;
}

inline Rational factorial(int n) {
    Rational f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

inline int sign(const Rational& q) { return q > 0 ? 1 : (q < 0 ? -1 : 0); }

}  // namespace equiloc
