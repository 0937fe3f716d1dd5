// Recursive-descent parser for the expression grammar:
//   sum    := product (('+'|'-') product)*
//   product:= unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := primary ('^' unary)?            (right-associative)
//   primary:= number | ident | ident '(' sum ')' | '(' sum ')'
// Identifiers are [A-Za-z_][A-Za-z0-9_]*; sin, cos, exp, ln are the only
// function names. Integer and decimal literals (optional e-exponent) become
// exact rationals. Whitespace is insignificant.
#pragma once

#include <cctype>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hjdyn/expression.hpp"

namespace hjdyn {

struct ParseError : std::runtime_error {
  std::size_t position;
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at offset " + std::to_string(pos)), position(pos) {}
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr run() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", 0);
    ExprPtr e = sum();
    skip_ws();
    if (pos_ < text_.size())
      throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
    return e;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  bool consume(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprPtr sum() {
    ExprPtr e = product();
    for (;;) {
      const char c = peek();
      if (c == '+') {
        ++pos_;
        e = add(e, product());
      } else if (c == '-') {
        ++pos_;
        e = sub(e, product());
      } else {
        return e;
      }
    }
  }

  ExprPtr product() {
    ExprPtr e = unary_level();
    for (;;) {
      const char c = peek();
      if (c == '*') {
        ++pos_;
        e = mul(e, unary_level());
      } else if (c == '/') {
        ++pos_;
        e = div(e, unary_level());
      } else {
        return e;
      }
    }
  }

  ExprPtr unary_level() {
    if (consume('-')) return neg(unary_level());
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (peek() == '^') {
      ++pos_;
      return pow_(base, unary_level());  // right-associative, sign allowed in exponent
    }
    return base;
  }

  ExprPtr primary() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      ExprPtr e = sum();
      if (!consume(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (c == '\0') throw ParseError("unexpected end of input", pos_);
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  ExprPtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (peek() == '(') {
      UnaryOp op;
      if (name == "sin") op = UnaryOp::Sin;
      else if (name == "cos") op = UnaryOp::Cos;
      else if (name == "exp") op = UnaryOp::Exp;
      else if (name == "ln") op = UnaryOp::Ln;
      else throw ParseError("unknown function '" + name + "'", start);
      ++pos_;  // '('
      ExprPtr arg = sum();
      if (!consume(')')) throw ParseError("expected ')'", pos_);
      return Expr::unary(op, std::move(arg));
    }
    return Expr::symbol(name);
  }

  ExprPtr number() {
    const std::size_t start = pos_;
    std::int64_t mantissa = 0;
    int frac_digits = 0, digits = 0;
    bool overflow = false;
    auto push_digit = [&](char d) {
      if (digits >= 18) { overflow = true; return; }
      mantissa = mantissa * 10 + (d - '0');
      ++digits;
    };
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
      push_digit(text_[pos_++]);
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
        throw ParseError("malformed number", pos_);
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        push_digit(text_[pos_++]);
        ++frac_digits;
      }
    }
    int exponent = 0;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      // Only treat as exponent when followed by digits or a signed digit run.
      std::size_t look = pos_ + 1;
      bool neg_exp = false;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) {
        neg_exp = text_[look] == '-';
        ++look;
      }
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          exponent = exponent * 10 + (text_[pos_] - '0');
          if (exponent > 300) throw ParseError("exponent out of range", pos_);
          ++pos_;
        }
        if (neg_exp) exponent = -exponent;
      }
    }
    if (digits == 0) throw ParseError("malformed number", start);
    if (overflow) {
      const std::string lit(text_.substr(start, pos_ - start));
      return Expr::real(std::stod(lit));
    }
    const int net = exponent - frac_digits;
    Number v(mantissa);
    if (net > 0) {
      if (net > 18) return Expr::real(mantissa * std::pow(10.0, net));
      v = v * Number(10).pow_integer(net);
    } else if (net < 0) {
      if (net < -18) return Expr::real(mantissa * std::pow(10.0, net));
      v = v / Number(10).pow_integer(-net);
    }
    return Expr::constant(v);
  }
};

}  // namespace detail

/// Parses expression text to a tree; throws ParseError with byte offset.
inline ExprPtr parse_expression(std::string_view text) {
  return detail::Parser(text).run();
}

}  // namespace hjdyn
