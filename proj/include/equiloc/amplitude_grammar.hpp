#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "equiloc/amplitude.hpp"

namespace equiloc {

/**
 * Amplitude mini-language.
 *
 *   expr   := ['+'|'-'] term (('+'|'-') term)*
 *   term   := power (('*'|'/') power)*          division by constants only
 *   power  := atom ['^' integer]
 *   atom   := number | variable | '(' expr ')' | call
 *   call   := gauss(block [, rate]) | bump(block, r1, r2) | cut(block, r1, r2) | poly(expr)
 *   block  := p | X | z<j> | '{' variable (',' variable)* '}'
 *
 * Variables are x1, y1, ..., xn, yn for the point and X1, ..., Xr for the Lie algebra.
 * gauss(B, b) = exp(-b |v_B|^2); bump is 1 for |v_B| <= r1 and 0 for |v_B| >= r2; cut = 1 - bump.
 * The empty string is the zero amplitude.
 */
class AmplitudeParser {
public:
    AmplitudeParser(std::string text, int point_dim, int lie_dim)
        : text_(std::move(text)), point_dim_(point_dim), lie_dim_(lie_dim), names_(variable_names(point_dim, lie_dim)) {}

    AmplitudeExpr parse() {
        skip();
        if (pos_ == text_.size()) return AmplitudeExpr(point_dim_, lie_dim_);
        AmplitudeExpr a = expr();
        skip();
        if (pos_ != text_.size()) error("unexpected '" + std::string(1, text_[pos_]) + "'");
        a.validate();
        return a;
    }

private:
    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorKind::parse, "amplitude column " + std::to_string(pos_ + 1) + ": " + what);
    }

    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) error(std::string("expected '") + c + "'");
    }

    std::string identifier() {
        skip();
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
        return text_.substr(start, pos_ - start);
    }

    AmplitudeExpr expr() {
        AmplitudeExpr a(point_dim_, lie_dim_);
        bool negate = false;
        if (accept('-')) negate = true;
        else accept('+');
        a = term();
        if (negate) a = a * Rational(-1);
        while (true) {
            if (accept('+')) a = a + term();
            else if (accept('-')) a = a - term();
            else return a;
        }
    }

    AmplitudeExpr term() {
        AmplitudeExpr a = power();
        while (true) {
            if (accept('*')) {
                a = a * power();
            } else if (accept('/')) {
                std::size_t at = pos_;
                auto c = power().constant_value();
                if (!c || *c == 0) {
                    pos_ = at;
                    error("division by a non-constant or zero expression");
                }
                a = a * (Rational(1) / *c);
            } else {
                return a;
            }
        }
    }

    AmplitudeExpr power() {
        AmplitudeExpr base = atom();
        if (!accept('^')) return base;
        skip();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) error("expected an integer exponent");
        int k = std::stoi(text_.substr(start, pos_ - start));
        AmplitudeExpr r = AmplitudeExpr::constant(point_dim_, lie_dim_, 1);
        for (int i = 0; i < k; ++i) r = r * base;
        return r;
    }

    AmplitudeExpr atom() {
        skip();
        if (pos_ >= text_.size()) error("unexpected end of input");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            AmplitudeExpr a = expr();
            expect(')');
            return a;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                    ((text_[pos_] == 'e' || text_[pos_] == 'E') && pos_ + 1 < text_.size()) ||
                    ((text_[pos_] == '-' || text_[pos_] == '+') && pos_ > start &&
                     (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
                ++pos_;
            return AmplitudeExpr::constant(point_dim_, lie_dim_, parse_rational(text_.substr(start, pos_ - start)));
        }
        std::size_t at = pos_;
        std::string name = identifier();
        if (name.empty()) error("unexpected '" + std::string(1, c) + "'");
        if (name == "gauss" || name == "bump" || name == "cut" || name == "poly") return call(name);
        for (int i = 0; i < static_cast<int>(names_.size()); ++i)
            if (names_[i] == name) return AmplitudeExpr::variable(point_dim_, lie_dim_, i);
        pos_ = at;
        error("unknown identifier '" + name + "'");
    }

    Rational constant_argument() {
        std::size_t at = pos_;
        auto c = expr().constant_value();
        if (!c) {
            pos_ = at;
            error("expected a constant");
        }
        return *c;
    }

    std::vector<int> block() {
        skip();
        std::vector<int> b;
        if (accept('{')) {
            do {
                std::size_t at = pos_;
                std::string name = identifier();
                auto it = std::find(names_.begin(), names_.end(), name);
                if (it == names_.end()) {
                    pos_ = at;
                    error("unknown variable '" + name + "' in block");
                }
                b.push_back(static_cast<int>(it - names_.begin()));
            } while (accept(','));
            expect('}');
            return b;
        }
        std::size_t at = pos_;
        std::string name = identifier();
        if (name == "p") {
            for (int i = 0; i < point_dim_; ++i) b.push_back(i);
        } else if (name == "X") {
            for (int i = 0; i < lie_dim_; ++i) b.push_back(point_dim_ + i);
        } else if (name.size() > 1 && name[0] == 'z' &&
                   std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(ch); })) {
            int j = std::stoi(name.substr(1));
            if (j < 1 || 2 * j > point_dim_) {
                pos_ = at;
                error("coordinate block '" + name + "' out of range");
            }
            b = {2 * j - 2, 2 * j - 1};
        } else {
            pos_ = at;
            error("expected a block (p, X, z<j> or {vars})");
        }
        if (b.empty()) {
            pos_ = at;
            error("empty block");
        }
        return b;
    }

    AmplitudeExpr call(const std::string& name) {
        expect('(');
        if (name == "poly") {
            AmplitudeExpr a = expr();
            expect(')');
            return a;
        }
        std::size_t at = pos_;
        std::vector<int> b = block();
        AmplitudeExpr r(point_dim_, lie_dim_);
        if (name == "gauss") {
            Rational rate = 1;
            if (accept(',')) rate = constant_argument();
            if (rate <= 0) {
                pos_ = at;
                error("gauss rate must be positive");
            }
            r = AmplitudeExpr::gaussian(point_dim_, lie_dim_, b, rate);
        } else {
            expect(',');
            Rational inner = constant_argument();
            expect(',');
            Rational outer = constant_argument();
            if (!(inner > 0 && inner < outer)) {
                pos_ = at;
                error("radii must satisfy 0 < r1 < r2");
            }
            r = AmplitudeExpr::radial(point_dim_, lie_dim_, name == "bump" ? RadialKind::bump : RadialKind::cut, b,
                                      inner, outer);
        }
        expect(')');
        return r;
    }

    std::string text_;
    std::size_t pos_ = 0;
    int point_dim_;
    int lie_dim_;
    std::vector<std::string> names_;
};

inline AmplitudeExpr parse_amplitude(const std::string& text, int point_dim, int lie_dim) {
    return AmplitudeParser(text, point_dim, lie_dim).parse();
}

}  // namespace equiloc
