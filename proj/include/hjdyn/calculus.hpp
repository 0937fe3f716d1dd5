// Exact partial differentiation. All symbols other than the differentiation
// variable are treated as independent.
#pragma once

#include "hjdyn/expression.hpp"
#include "hjdyn/simplify.hpp"

namespace hjdyn {

namespace detail {

// Constructors that fold the 0/1 cases differentiation produces in bulk;
// full canonicalization is left to simplify().
inline ExprPtr d_add(ExprPtr a, ExprPtr b) {
  if (a->is_zero_constant()) return b;
  if (b->is_zero_constant()) return a;
  return add(std::move(a), std::move(b));
}

inline ExprPtr d_mul(ExprPtr a, ExprPtr b) {
  if (a->is_zero_constant() || b->is_zero_constant()) return Expr::integer(0);
  if (a->is_one_constant()) return b;
  if (b->is_one_constant()) return a;
  return mul(std::move(a), std::move(b));
}

inline ExprPtr d_neg(ExprPtr a) {
  if (a->is_zero_constant()) return a;
  return neg(std::move(a));
}

}  // namespace detail

/// d e / d s. The derivative of an expression not containing s is zero.
inline ExprPtr differentiate(const ExprPtr& e, const std::string& s) {
  using detail::d_add;
  using detail::d_mul;
  using detail::d_neg;
  switch (e->kind) {
    case NodeKind::Constant:
      return Expr::integer(0);
    case NodeKind::Symbol:
      return e->name == s ? Expr::integer(1) : Expr::integer(0);
    case NodeKind::Unary: {
      const ExprPtr du = differentiate(e->lhs, s);
      switch (e->uop) {
        case UnaryOp::Neg: return d_neg(du);
        case UnaryOp::Sin: return d_mul(cos_(e->lhs), du);
        case UnaryOp::Cos: return d_neg(d_mul(sin_(e->lhs), du));
        case UnaryOp::Exp: return d_mul(exp_(e->lhs), du);
        case UnaryOp::Ln: return du->is_zero_constant() ? du : div(du, e->lhs);
      }
      break;
    }
    case NodeKind::Binary: {
      switch (e->bop) {
        case BinaryOp::Add:
          return d_add(differentiate(e->lhs, s), differentiate(e->rhs, s));
        case BinaryOp::Mul:
          return d_add(d_mul(differentiate(e->lhs, s), e->rhs),
                       d_mul(e->lhs, differentiate(e->rhs, s)));
        case BinaryOp::Div: {
          const ExprPtr da = differentiate(e->lhs, s);
          const ExprPtr db = differentiate(e->rhs, s);
          if (db->is_zero_constant()) return da->is_zero_constant() ? da : div(da, e->rhs);
          return div(d_add(d_mul(da, e->rhs), d_neg(d_mul(e->lhs, db))),
                     pow_(e->rhs, Expr::integer(2)));
        }
        case BinaryOp::Pow: {
          const ExprPtr da = differentiate(e->lhs, s);
          const ExprPtr db = differentiate(e->rhs, s);
          if (db->is_zero_constant()) {
            // d(a^c) = c * a^(c-1) * da
            if (da->is_zero_constant()) return da;
            const ExprPtr em1 = simplify(sub(e->rhs, Expr::integer(1)));
            return d_mul(d_mul(e->rhs, pow_(e->lhs, em1)), da);
          }
          // General rule: a^b * (db*ln(a) + b*da/a)
          const ExprPtr left = d_mul(db, ln_(e->lhs));
          const ExprPtr right = da->is_zero_constant()
                                    ? Expr::integer(0)
                                    : div(d_mul(e->rhs, da), e->lhs);
          return d_mul(e, d_add(left, right));
        }
      }
    }
  }
  return Expr::integer(0);
}

/// Convenience: simplified derivative.
inline ExprPtr derivative(const ExprPtr& e, const std::string& s) {
  return simplify(differentiate(e, s));
}

}  // namespace hjdyn
