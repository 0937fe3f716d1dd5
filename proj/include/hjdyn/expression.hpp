// Immutable symbolic expression trees: constants, symbols, elementary
// functions and arithmetic. Every formula in the toolkit lives in this type.
#pragma once

#include <memory>
#include <set>
#include <map>
#include <string>
#include <utility>

#include "hjdyn/numbers.hpp"

namespace hjdyn {

enum class NodeKind { Constant, Symbol, Unary, Binary };
enum class UnaryOp { Neg, Sin, Cos, Exp, Ln };
enum class BinaryOp { Add, Mul, Div, Pow };

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Expr {
 public:
  NodeKind kind;
  UnaryOp uop = UnaryOp::Neg;
  BinaryOp bop = BinaryOp::Add;
  Number value;      // Constant
  std::string name;  // Symbol
  ExprPtr lhs, rhs;  // Unary uses lhs only

  static ExprPtr constant(Number v) {
    auto e = std::make_shared<Expr>();
    e->kind = NodeKind::Constant;
    e->value = std::move(v);
    return e;
  }
  static ExprPtr integer(std::int64_t n) { return constant(Number(n)); }
  static ExprPtr rational(std::int64_t n, std::int64_t d) { return constant(Number(Rational(n, d))); }
  static ExprPtr real(double v) { return constant(Number::real(v)); }
  static ExprPtr symbol(std::string s) {
    auto e = std::make_shared<Expr>();
    e->kind = NodeKind::Symbol;
    e->name = std::move(s);
    return e;
  }
  static ExprPtr unary(UnaryOp op, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = NodeKind::Unary;
    e->uop = op;
    e->lhs = std::move(a);
    return e;
  }
  static ExprPtr binary(BinaryOp op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = NodeKind::Binary;
    e->bop = op;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
  }

  bool is_constant() const { return kind == NodeKind::Constant; }
  bool is_zero_constant() const { return is_constant() && value.is_zero(); }
  bool is_one_constant() const { return is_constant() && value.is_one(); }
  bool is_symbol(const std::string& s) const { return kind == NodeKind::Symbol && name == s; }
};

inline ExprPtr neg(ExprPtr a) { return Expr::unary(UnaryOp::Neg, std::move(a)); }
inline ExprPtr sin_(ExprPtr a) { return Expr::unary(UnaryOp::Sin, std::move(a)); }
inline ExprPtr cos_(ExprPtr a) { return Expr::unary(UnaryOp::Cos, std::move(a)); }
inline ExprPtr exp_(ExprPtr a) { return Expr::unary(UnaryOp::Exp, std::move(a)); }
inline ExprPtr ln_(ExprPtr a) { return Expr::unary(UnaryOp::Ln, std::move(a)); }
inline ExprPtr add(ExprPtr a, ExprPtr b) { return Expr::binary(BinaryOp::Add, std::move(a), std::move(b)); }
inline ExprPtr sub(ExprPtr a, ExprPtr b) { return add(std::move(a), neg(std::move(b))); }
inline ExprPtr mul(ExprPtr a, ExprPtr b) { return Expr::binary(BinaryOp::Mul, std::move(a), std::move(b)); }
inline ExprPtr div(ExprPtr a, ExprPtr b) { return Expr::binary(BinaryOp::Div, std::move(a), std::move(b)); }
inline ExprPtr pow_(ExprPtr a, ExprPtr b) { return Expr::binary(BinaryOp::Pow, std::move(a), std::move(b)); }
inline ExprPtr sym(const std::string& s) { return Expr::symbol(s); }

/// Structural total order; 0 on structural equality. Used for canonical
/// term ordering and as the map key comparison throughout the simplifier.
inline int compare_structural(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return 0;
  const int ka = static_cast<int>(a->kind), kb = static_cast<int>(b->kind);
  if (ka != kb) return ka < kb ? -1 : 1;
  switch (a->kind) {
    case NodeKind::Constant:
      return compare(a->value, b->value);
    case NodeKind::Symbol:
      return a->name.compare(b->name) < 0 ? -1 : (a->name == b->name ? 0 : 1);
    case NodeKind::Unary: {
      const int oa = static_cast<int>(a->uop), ob = static_cast<int>(b->uop);
      if (oa != ob) return oa < ob ? -1 : 1;
      return compare_structural(a->lhs, b->lhs);
    }
    case NodeKind::Binary: {
      const int oa = static_cast<int>(a->bop), ob = static_cast<int>(b->bop);
      if (oa != ob) return oa < ob ? -1 : 1;
      if (int c = compare_structural(a->lhs, b->lhs)) return c;
      return compare_structural(a->rhs, b->rhs);
    }
  }
  return 0;
}

inline bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  return compare_structural(a, b) == 0;
}

inline void collect_symbols(const ExprPtr& e, std::set<std::string>& out) {
  switch (e->kind) {
    case NodeKind::Constant: return;
    case NodeKind::Symbol: out.insert(e->name); return;
    case NodeKind::Unary: collect_symbols(e->lhs, out); return;
    case NodeKind::Binary:
      collect_symbols(e->lhs, out);
      collect_symbols(e->rhs, out);
      return;
  }
}

inline std::set<std::string> symbols_of(const ExprPtr& e) {
  std::set<std::string> s;
  collect_symbols(e, s);
  return s;
}

inline bool contains_symbol(const ExprPtr& e, const std::string& s) {
  switch (e->kind) {
    case NodeKind::Constant: return false;
    case NodeKind::Symbol: return e->name == s;
    case NodeKind::Unary: return contains_symbol(e->lhs, s);
    case NodeKind::Binary: return contains_symbol(e->lhs, s) || contains_symbol(e->rhs, s);
  }
  return false;
}

/// Replaces symbol leaves according to the map; untouched subtrees are shared.
inline ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& repl) {
  switch (e->kind) {
    case NodeKind::Constant:
      return e;
    case NodeKind::Symbol: {
      auto it = repl.find(e->name);
      return it == repl.end() ? e : it->second;
    }
    case NodeKind::Unary: {
      ExprPtr c = substitute(e->lhs, repl);
      return c == e->lhs ? e : Expr::unary(e->uop, std::move(c));
    }
    case NodeKind::Binary: {
      ExprPtr a = substitute(e->lhs, repl);
      ExprPtr b = substitute(e->rhs, repl);
      return (a == e->lhs && b == e->rhs) ? e : Expr::binary(e->bop, std::move(a), std::move(b));
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// Serialization. Precedence: + - (1) < * / (2) < unary minus (3) < ^ (4).
// to_string(parse(s)) is the identity on canonical (simplified) trees.

namespace detail {

inline void print_expr(const ExprPtr& e, std::string& out);

inline void print_child(const ExprPtr& e, std::string& out, int prec_needed) {
  const bool parens = [&] {
    switch (e->kind) {
      case NodeKind::Constant:
        // Negative values and p/q rationals read as compound under * / ^.
        return prec_needed >= 2 &&
               (e->value.negative() || (e->value.exact() && !e->value.is_integer()));
      case NodeKind::Symbol:
        return false;
      case NodeKind::Unary:
        if (e->uop == UnaryOp::Neg) return prec_needed > 3;
        return false;  // function call, self-delimiting
      case NodeKind::Binary:
        switch (e->bop) {
          case BinaryOp::Add: return prec_needed > 1;
          case BinaryOp::Mul:
          case BinaryOp::Div: return prec_needed > 2;
          case BinaryOp::Pow: return prec_needed > 4;
        }
    }
    return false;
  }();
  if (parens) out.push_back('(');
  print_expr(e, out);
  if (parens) out.push_back(')');
}

inline void print_expr(const ExprPtr& e, std::string& out) {
  switch (e->kind) {
    case NodeKind::Constant:
      out += e->value.str();
      return;
    case NodeKind::Symbol:
      out += e->name;
      return;
    case NodeKind::Unary:
      switch (e->uop) {
        case UnaryOp::Neg:
          out.push_back('-');
          print_child(e->lhs, out, 4);  // bind tighter than * but looser than ^
          return;
        case UnaryOp::Sin: out += "sin("; break;
        case UnaryOp::Cos: out += "cos("; break;
        case UnaryOp::Exp: out += "exp("; break;
        case UnaryOp::Ln: out += "ln("; break;
      }
      print_child(e->lhs, out, 0);
      out.push_back(')');
      return;
    case NodeKind::Binary:
      switch (e->bop) {
        case BinaryOp::Add:
          print_child(e->lhs, out, 1);
          if (e->rhs->kind == NodeKind::Unary && e->rhs->uop == UnaryOp::Neg) {
            out += " - ";
            print_child(e->rhs->lhs, out, 2);
          } else if (e->rhs->kind == NodeKind::Constant && e->rhs->value.negative()) {
            out += " - ";
            out += e->rhs->value.negated().str();
          } else {
            out += " + ";
            print_child(e->rhs, out, 2);  // right operand must not be a bare sum
          }
          return;
        case BinaryOp::Mul:
          print_child(e->lhs, out, 2);
          out.push_back('*');
          print_child(e->rhs, out, 3);
          return;
        case BinaryOp::Div:
          print_child(e->lhs, out, 2);
          out.push_back('/');
          print_child(e->rhs, out, 3);
          return;
        case BinaryOp::Pow:
          print_child(e->lhs, out, 5);  // left of ^ parenthesizes nested ^
          out.push_back('^');
          print_child(e->rhs, out, 3);
          return;
      }
  }
}

}  // namespace detail

inline std::string to_string(const ExprPtr& e) {
  std::string out;
  detail::print_expr(e, out);
  return out;
}

}  // namespace hjdyn
