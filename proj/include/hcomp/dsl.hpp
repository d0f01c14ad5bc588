#pragma once

#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "hcomp/dirichlet.hpp"
#include "hcomp/error.hpp"
#include "hcomp/symbols.hpp"

namespace hcomp {

inline constexpr std::size_t kMaxSymbolText = 64 * 1024;

namespace detail {

enum class Tok { Int, Real, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t line, col;
};

inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t line = 1, col = 1, i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            advance(1);
            continue;
        }
        const std::size_t l0 = line, c0 = col;
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            bool real = false;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && src[j] == '.') {
                real = true;
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    real = true;
                    j = k;
                    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                }
            }
            out.push_back({real ? Tok::Real : Tok::Int, std::string(src.substr(i, j - i)), l0, c0});
            advance(j - i);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isalpha(static_cast<unsigned char>(src[j]))) ++j;
            out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), l0, c0});
            advance(j - i);
            continue;
        }
        Tok k;
        switch (c) {
            case '+': k = Tok::Plus; break;
            case '-': k = Tok::Minus; break;
            case '*': k = Tok::Star; break;
            case '/': k = Tok::Slash; break;
            case '^': k = Tok::Caret; break;
            case '(': k = Tok::LParen; break;
            case ')': k = Tok::RParen; break;
            default: throw ParseError(std::string("unexpected character '") + c + "'", l0, c0);
        }
        out.push_back({k, std::string(1, c), l0, c0});
        advance(1);
    }
    out.push_back({Tok::End, "", line, col});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

    Symbol parse_symbol() {
        std::int64_t c0 = 0;
        DirichletPolynomial psi;
        bool first = true;
        while (true) {
            double sign = 1.0;
            if (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
                sign = peek().kind == Tok::Minus ? -1.0 : 1.0;
                next();
            } else if (!first) {
                break;
            }
            first = false;
            if (const auto k = s_term()) {
                if (sign < 0) throw ParseError("characteristic must be a nonnegative integer", last_.line, last_.col);
                c0 += *k;
                if (c0 > 1'000'000) throw ParseError("characteristic too large", last_.line, last_.col);
                continue;
            }
            auto v = term();
            psi = sign < 0 ? sub(psi, v) : add(psi, v);
        }
        if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
        return Symbol(static_cast<int>(c0), psi);
    }

private:
    const Token& peek(std::size_t ahead = 0) const { return t_[std::min(pos_ + ahead, t_.size() - 1)]; }
    const Token& next() {
        last_ = t_[pos_];
        if (pos_ + 1 < t_.size()) ++pos_;
        return last_;
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().line, peek().col); }
    void expect(Tok k, const char* what) {
        if (peek().kind != k) fail(std::string("expected ") + what);
        next();
    }

    static bool term_end(Tok k) { return k == Tok::Plus || k == Tok::Minus || k == Tok::End; }

    // A top-level "s" or "k*s" term; returns k.
    std::optional<std::int64_t> s_term() {
        if (peek().kind == Tok::Ident && peek().text == "s" && term_end(peek(1).kind)) {
            next();
            return 1;
        }
        if (peek().kind == Tok::Int && peek(1).kind == Tok::Star && peek(2).kind == Tok::Ident && peek(2).text == "s" &&
            term_end(peek(3).kind)) {
            const auto k = parse_u64(peek());
            next();
            next();
            next();
            if (k > 1'000'000) throw ParseError("characteristic too large", last_.line, last_.col);
            return static_cast<std::int64_t>(k);
        }
        if (peek().kind == Tok::Real && peek(1).kind == Tok::Star && peek(2).kind == Tok::Ident && peek(2).text == "s")
            fail("characteristic must be a nonnegative integer");
        return std::nullopt;
    }

    static u64 parse_u64(const Token& tok) {
        u64 v = 0;
        const auto* b = tok.text.data();
        const auto [p, ec] = std::from_chars(b, b + tok.text.size(), v);
        if (ec != std::errc{} || p != b + tok.text.size() || v > kMaxFactorInput)
            throw ParseError("integer literal out of range", tok.line, tok.col);
        return v;
    }

    static double parse_real(const Token& tok) {
        double v = 0.0;
        const auto* b = tok.text.data();
        const auto [p, ec] = std::from_chars(b, b + tok.text.size(), v);
        if (ec != std::errc{} || p != b + tok.text.size() || !std::isfinite(v))
            throw ParseError("invalid number", tok.line, tok.col);
        return v;
    }

    static bool is_constant_poly(const DirichletPolynomial& f) {
        for (const auto& [n, c] : f.coeffs())
            if (n != 1) return false;
        return true;
    }

    DirichletPolynomial term() {
        auto v = unary();
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            const bool div = peek().kind == Tok::Slash;
            const Token op = next();
            auto rhs = unary();
            if (div) {
                if (!is_constant_poly(rhs)) throw ParseError("division only by constants", op.line, op.col);
                const cplx c = rhs.coeff(1);
                if (c == cplx{}) throw ParseError("division by zero", op.line, op.col);
                // Coefficientwise quotient keeps a/b literals correctly rounded.
                DirichletPolynomial q(v.truncation());
                for (const auto& [n, a] : v.coeffs())
                    q.add_to(n, c.imag() == 0.0 ? cplx(a.real() / c.real(), a.imag() / c.real()) : a / c);
                v = q;
            } else {
                v = multiply(v, rhs);
            }
        }
        return v;
    }

    DirichletPolynomial unary() {
        if (peek().kind == Tok::Minus) {
            next();
            return scale(unary(), -1.0);
        }
        if (peek().kind == Tok::Plus) {
            next();
            return unary();
        }
        return power();
    }

    DirichletPolynomial power() {
        const Token base_tok = peek();
        const std::size_t start = pos_;
        auto base = atom();
        const bool single_literal = base_tok.kind == Tok::Int && pos_ == start + 1;
        if (peek().kind != Tok::Caret) return base;
        next();
        // n^(-s) or n^-s
        const bool paren = peek().kind == Tok::LParen;
        const std::size_t off = paren ? 1 : 0;
        if (peek(off).kind == Tok::Minus && peek(off + 1).kind == Tok::Ident && peek(off + 1).text == "s") {
            if (!single_literal)
                throw ParseError("only a positive integer literal may be raised to -s", base_tok.line, base_tok.col);
            const u64 n = parse_u64(base_tok);
            if (n == 0) throw ParseError("0^(-s) is undefined", base_tok.line, base_tok.col);
            if (paren) next();
            next();
            next();
            if (paren) expect(Tok::RParen, "')'");
            check_no_chain();
            return DirichletPolynomial::monomial(n, 1.0);
        }
        if (paren) next();
        const Token e = peek();
        if (e.kind != Tok::Int) fail("exponent must be a nonnegative integer or -s");
        next();
        if (paren) expect(Tok::RParen, "')'");
        const u64 k = parse_u64(e);
        if (k > static_cast<u64>(kMaxPower)) throw ParseError("exponent exceeds 16", e.line, e.col);
        check_no_chain();
        return hcomp::power(base, static_cast<int>(k));
    }

    void check_no_chain() {
        if (peek().kind == Tok::Caret) fail("chained '^' is not allowed; use parentheses");
    }

    DirichletPolynomial atom() {
        const Token tok = peek();
        switch (tok.kind) {
            case Tok::Int:
                next();
                return DirichletPolynomial::constant(static_cast<double>(parse_u64(tok)));
            case Tok::Real:
                next();
                return DirichletPolynomial::constant(parse_real(tok));
            case Tok::LParen: {
                next();
                auto v = expr();
                expect(Tok::RParen, "')'");
                return v;
            }
            case Tok::Ident:
                if (tok.text == "i") {
                    next();
                    return DirichletPolynomial::constant(cplx(0.0, 1.0));
                }
                if (tok.text == "log") {
                    next();
                    expect(Tok::LParen, "'(' after log");
                    const Token a = peek();
                    if (a.kind != Tok::Int) fail("log takes a positive integer literal");
                    next();
                    const u64 n = parse_u64(a);
                    if (n == 0) throw ParseError("log takes a positive integer literal", a.line, a.col);
                    expect(Tok::RParen, "')'");
                    return DirichletPolynomial::constant(std::log(static_cast<double>(n)));
                }
                if (tok.text == "s") fail("s may only appear in a top-level term k*s");
                fail("unknown identifier '" + tok.text + "'");
            case Tok::End: fail("unexpected end of input");
            default: fail("unexpected '" + tok.text + "'");
        }
    }

    // Sum inside parentheses; s is not allowed here.
    DirichletPolynomial expr() {
        auto v = term();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            const bool minus = next().kind == Tok::Minus;
            auto rhs = term();
            v = minus ? sub(v, rhs) : add(v, rhs);
        }
        return v;
    }

    std::vector<Token> t_;
    std::size_t pos_ = 0;
    Token last_{Tok::End, "", 1, 1};
};

inline std::string format_real(double x) {
    if (x == 0.0) return "0";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

}  // namespace detail

inline Symbol parse_symbol(std::string_view text) {
    if (text.size() > kMaxSymbolText) throw GuardError("symbol text exceeds 64 KiB");
    detail::Parser p(detail::tokenize(text));
    return p.parse_symbol();
}

// Canonical text: "k*s" first, then the constant, then n^(-s) terms by increasing n.
// parse_symbol(format_symbol(phi)) == phi for the default truncation.
inline std::string format_symbol(const Symbol& phi) {
    std::string out;
    auto emit = [&](bool negative, const std::string& body) {
        if (out.empty())
            out = (negative ? "-" : "") + body;
        else
            out += (negative ? " - " : " + ") + body;
    };
    if (phi.c0 == 1) emit(false, "s");
    if (phi.c0 > 1) emit(false, std::to_string(phi.c0) + "*s");
    for (const auto& [n, c] : phi.psi.coeffs()) {
        const std::string mono = n == 1 ? "" : std::to_string(n) + "^(-s)";
        bool negative = false;
        std::string coef;
        if (c.imag() == 0.0) {
            negative = std::signbit(c.real());
            const double a = std::abs(c.real());
            if (a != 1.0 || n == 1) coef = detail::format_real(a);
        } else {
            const double b = std::abs(c.imag());
            coef = "(" + detail::format_real(c.real()) + (std::signbit(c.imag()) ? " - " : " + ") +
                   detail::format_real(b) + "*i)";
        }
        if (n == 1)
            emit(negative, coef);
        else
            emit(negative, coef.empty() ? mono : coef + "*" + mono);
    }
    if (out.empty()) out = "0";
    return out;
}

}  // namespace hcomp
