// Canonicalizing simplifier. Rewrite set: constant folding, 0/1 identities,
// like-term collection over a canonical ordering, and rational-power
// combination. Expressions are normalized to an exact sum-of-products form
// (monomials of atoms with rational exponents over exact coefficients) and
// rebuilt deterministically, so simplify is idempotent and value-preserving.
//
// Atoms are symbols, elementary-function applications, sums kept opaque
// under non-expandable powers, and powers with symbolic exponents. There are
// no trigonometric or exponential rewrite identities; the stochastic zero
// test covers those.
#pragma once

#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hjdyn/expression.hpp"

namespace hjdyn {

struct SimplifyLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace simp {

constexpr std::int64_t kExpandMaxPow = 6;  // sums raised to ints <= this expand
constexpr std::size_t kExpandMaxBaseTerms = 64;
constexpr std::size_t kMaxTerms = 200000;

inline Rational rat_add(const Rational& a, const Rational& b) {
  Rational out;
  if (!detail::make_rational(static_cast<__int128>(a.num) * b.den +
                                 static_cast<__int128>(b.num) * a.den,
                             static_cast<__int128>(a.den) * b.den, out))
    throw SimplifyLimit("rational exponent overflow");
  return out;
}

inline Rational rat_mul(const Rational& a, const Rational& b) {
  Rational out;
  if (!detail::make_rational(static_cast<__int128>(a.num) * b.num,
                             static_cast<__int128>(a.den) * b.den, out))
    throw SimplifyLimit("rational exponent overflow");
  return out;
}

struct AtomLess {
  bool operator()(const ExprPtr& a, const ExprPtr& b) const {
    return compare_structural(a, b) < 0;
  }
};

/// Product of atoms with rational exponents.
using Monomial = std::map<ExprPtr, Rational, AtomLess>;

/// Exponent-lexicographic order along the atom order: at the first atom whose
/// exponents differ, the higher exponent sorts first. The empty monomial
/// (constant term) therefore sorts last.
struct MonomialLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    auto ia = a.begin(), ib = b.begin();
    AtomLess less;
    const Rational zero(0);
    while (ia != a.end() && ib != b.end()) {
      if (less(ia->first, ib->first)) return zero < ia->second;
      if (less(ib->first, ia->first)) return ib->second < zero;
      if (!(ia->second == ib->second)) return ib->second < ia->second;
      ++ia;
      ++ib;
    }
    if (ia != a.end()) return zero < ia->second;
    if (ib != b.end()) return ib->second < zero;
    return false;
  }
};

/// Sum of monomials with numeric coefficients; empty map is zero.
using Poly = std::map<Monomial, Number, MonomialLess>;

inline bool is_sum_atom(const ExprPtr& e) {
  return e->kind == NodeKind::Binary && e->bop == BinaryOp::Add;
}

Poly normalize(const ExprPtr& e);
ExprPtr rebuild(const Poly& p);
void poly_insert(Poly& p, Monomial mono, Number coeff);

/// Folds constant atoms into the coefficient, drops zero exponents, and
/// reports sum atoms left with small positive integer exponents so the
/// caller can distribute them.
struct MonoNormalized {
  Monomial mono;
  Number coeff;
  std::vector<std::pair<ExprPtr, std::int64_t>> expand;  // sum atoms to distribute
};

inline MonoNormalized normalize_monomial(const Monomial& in, Number coeff) {
  MonoNormalized out;
  out.coeff = coeff;
  // Division by exact zero anywhere collapses the monomial to the canonical
  // 0^-1 marker; evaluation reports it.
  for (const auto& [atom, exp] : in)
    if (atom->is_constant() && atom->value.is_zero() && !exp.is_zero() && exp.num < 0) {
      out.mono.emplace(Expr::integer(0), Rational(-1));
      return out;
    }
  for (const auto& [atom, exp] : in) {
    if (exp.is_zero()) continue;
    if (atom->is_constant()) {
      const Number& v = atom->value;
      if (exp.is_integer()) {
        out.coeff = out.coeff * v.pow_integer(exp.num);
        continue;
      }
      if (v.is_zero()) {  // 0^(positive fraction) = 0
        out.coeff = Number(0);
        continue;
      }
      if (v.is_one()) continue;
      out.mono.emplace(atom, exp);
      continue;
    }
    if (is_sum_atom(atom) && exp.is_integer() && exp.num >= 1 && exp.num <= kExpandMaxPow) {
      out.expand.emplace_back(atom, exp.num);
      continue;
    }
    out.mono.emplace(atom, exp);
  }
  return out;
}

inline void poly_add_inplace(Poly& acc, const Poly& p) {
  for (const auto& [mono, coeff] : p) {
    auto it = acc.find(mono);
    if (it == acc.end()) {
      if (!coeff.is_zero()) acc.emplace(mono, coeff);
    } else {
      it->second = it->second + coeff;
      if (it->second.is_zero()) acc.erase(it);
    }
  }
}

inline Poly poly_neg(const Poly& p) {
  Poly out;
  for (const auto& [mono, coeff] : p) out.emplace(mono, coeff.negated());
  return out;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out;
  if (a.empty() || b.empty()) return out;
  if (a.size() * b.size() > kMaxTerms)
    throw SimplifyLimit("expansion exceeds term limit");
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) {
      Monomial merged = ma;
      for (const auto& [atom, exp] : mb) {
        auto it = merged.find(atom);
        if (it == merged.end()) {
          merged.emplace(atom, exp);
        } else {
          it->second = rat_add(it->second, exp);
          if (it->second.is_zero()) merged.erase(it);
        }
      }
      poly_insert(out, std::move(merged), ca * cb);
      if (out.size() > kMaxTerms) throw SimplifyLimit("expansion exceeds term limit");
    }
  return out;
}

inline Poly poly_pow_int(const Poly& base, std::int64_t k) {
  Poly acc;
  poly_insert(acc, Monomial{}, Number(1));
  for (std::int64_t i = 0; i < k; ++i) acc = poly_mul(acc, base);
  return acc;
}

inline void poly_insert(Poly& p, Monomial mono, Number coeff) {
  if (coeff.is_zero()) return;
  MonoNormalized n = normalize_monomial(mono, coeff);
  if (n.coeff.is_zero()) return;
  if (n.expand.empty()) {
    auto it = p.find(n.mono);
    if (it == p.end()) {
      p.emplace(std::move(n.mono), n.coeff);
    } else {
      it->second = it->second + n.coeff;
      if (it->second.is_zero()) p.erase(it);
    }
    return;
  }
  // Distribute sum atoms that surfaced with small positive integer exponents.
  Poly carrier;
  carrier.emplace(std::move(n.mono), n.coeff);
  for (const auto& [sum_atom, k] : n.expand)
    carrier = poly_mul(carrier, poly_pow_int(normalize(sum_atom), k));
  poly_add_inplace(p, carrier);
}

/// Monomial exponents scaled by a rational; used by the power rules.
/// A fractional power distributes over the factors only when no sign can
/// flip and no magnitude can be lost: the coefficient must be non-negative,
/// even integer powers (squares, whose root is a magnitude rather than the
/// atom) must be absent, and at most one factor may follow its atom's sign.
/// Fractional-exponent factors are non-negative wherever they are defined,
/// so they are always safe. Anything else stays an opaque power.
inline void poly_single_term_pow(const Monomial& mono, const Number& coeff, const Rational& r,
                                 Poly& out) {
  if (!r.is_integer()) {
    bool distributable = !coeff.negative();
    int sign_following = 0;
    for (const auto& [atom, exp] : mono) {
      if (!distributable) break;
      if (atom->is_constant()) {
        if (atom->value.negative()) distributable = false;
        continue;
      }
      if (exp.den == 1) {
        if (exp.num % 2 == 0)
          distributable = false;
        else
          ++sign_following;
      }
    }
    if (sign_following > 1) distributable = false;
    if (!distributable) {
      Poly single;
      single.emplace(mono, coeff);
      poly_insert(out, Monomial{{pow_(rebuild(single), Expr::constant(Number(r))), Rational(1)}},
                  Number(1));
      return;
    }
  }
  Monomial scaled;
  for (const auto& [atom, exp] : mono) scaled.emplace(atom, rat_mul(exp, r));
  Number c(1);
  if (!coeff.is_one()) {
    if (r.is_integer()) {
      c = coeff.pow_integer(r.num);
    } else {
      // Non-integer power of a numeric coefficient stays symbolic.
      auto it = scaled.find(Expr::constant(coeff));
      if (it == scaled.end())
        scaled.emplace(Expr::constant(coeff), r);
      else
        it->second = rat_add(it->second, r);
    }
  }
  poly_insert(out, std::move(scaled), c);
}

inline Poly normalize(const ExprPtr& e) {
  Poly out;
  switch (e->kind) {
    case NodeKind::Constant:
      poly_insert(out, Monomial{}, e->value);
      return out;
    case NodeKind::Symbol:
      poly_insert(out, Monomial{{e, Rational(1)}}, Number(1));
      return out;
    case NodeKind::Unary: {
      if (e->uop == UnaryOp::Neg) return poly_neg(normalize(e->lhs));
      const ExprPtr arg = rebuild(normalize(e->lhs));
      if (arg->is_constant() && arg->value.exact()) {
        const Number& v = arg->value;
        switch (e->uop) {
          case UnaryOp::Sin:
            if (v.is_zero()) return out;  // sin(0) = 0
            break;
          case UnaryOp::Cos:
          case UnaryOp::Exp:
            if (v.is_zero()) {
              poly_insert(out, Monomial{}, Number(1));
              return out;
            }
            break;
          case UnaryOp::Ln:
            if (v.is_one()) return out;  // ln(1) = 0
            break;
          default:
            break;
        }
      }
      poly_insert(out, Monomial{{Expr::unary(e->uop, arg), Rational(1)}}, Number(1));
      return out;
    }
    case NodeKind::Binary:
      switch (e->bop) {
        case BinaryOp::Add: {
          out = normalize(e->lhs);
          poly_add_inplace(out, normalize(e->rhs));
          return out;
        }
        case BinaryOp::Mul:
          return poly_mul(normalize(e->lhs), normalize(e->rhs));
        case BinaryOp::Div: {
          const Poly num = normalize(e->lhs);
          const Poly den = normalize(e->rhs);
          if (den.empty()) {
            // Division by exact zero: preserved, reported at evaluation time.
            const ExprPtr guard = Expr::integer(0);
            Poly res;
            for (const auto& [mono, coeff] : num) {
              Monomial m = mono;
              auto it = m.find(guard);
              if (it == m.end())
                m.emplace(guard, Rational(-1));
              else
                it->second = rat_add(it->second, Rational(-1));
              poly_insert(res, std::move(m), coeff);
            }
            if (num.empty()) poly_insert(res, Monomial{{guard, Rational(-1)}}, Number(1));
            return res;
          }
          if (den.size() == 1) {
            const auto& [dm, dc] = *den.begin();
            Poly inv;
            Monomial m;
            for (const auto& [atom, exp] : dm) {
              Rational r = exp;
              r.num = -r.num;
              m.emplace(atom, r);
            }
            poly_insert(inv, std::move(m), Number(1) / dc);
            return poly_mul(num, inv);
          }
          // Exact multiple: num == q * den for a single-term q.
          // TODO: extend to monomial-times-sum factor extraction so that
          // ratios like (a+b)^2/(a+b) reduce symbolically instead of
          // falling through to the numeric zero tier.
          if (!num.empty()) {
            const auto& [nm, nc] = *num.begin();
            const auto& [dm, dc] = *den.begin();
            Monomial qm = nm;
            bool ok = true;
            for (const auto& [atom, exp] : dm) {
              auto it = qm.find(atom);
              Rational cur = it == qm.end() ? Rational(0) : it->second;
              Rational r = rat_add(cur, Rational(-exp.num, exp.den));
              if (it != qm.end()) qm.erase(it);
              if (!r.is_zero()) {
                if (atom->is_constant() || is_sum_atom(atom)) { ok = false; break; }
                qm.emplace(atom, r);
              }
            }
            if (ok) {
              Poly q;
              poly_insert(q, qm, nc / dc);
              Poly check = poly_mul(den, q);
              if (check == num) return q;
            }
          }
          Poly inv;
          poly_insert(inv, Monomial{{rebuild(den), Rational(-1)}}, Number(1));
          return poly_mul(num, inv);
        }
        case BinaryOp::Pow: {
          const Poly bp = normalize(e->rhs);
          const bool exp_const = bp.empty() || (bp.size() == 1 && bp.begin()->first.empty());
          if (exp_const) {
            const Number r = bp.empty() ? Number(0) : bp.begin()->second;
            if (r.is_zero()) {  // x^0 = 1 (including 0^0 by convention)
              poly_insert(out, Monomial{}, Number(1));
              return out;
            }
            const Poly base = normalize(e->lhs);
            if (r.exact()) {
              const Rational& rr = r.rat();
              if (base.empty()) {
                if (rr.num > 0) return out;  // 0^positive = 0
                poly_insert(out, Monomial{{Expr::integer(0), rr}}, Number(1));
                return out;
              }
              if (base.size() == 1) {
                poly_single_term_pow(base.begin()->first, base.begin()->second, rr, out);
                return out;
              }
              if (rr.is_integer() && rr.num >= 1 && rr.num <= kExpandMaxPow &&
                  base.size() <= kExpandMaxBaseTerms)
                return poly_pow_int(base, rr.num);
              poly_insert(out, Monomial{{rebuild(base), rr}}, Number(1));
              return out;
            }
            // Inexact exponent: fold pure numbers, otherwise opaque power atom.
            const ExprPtr base_c = rebuild(base);
            if (base_c->is_constant()) {
              const double v = std::pow(base_c->value.to_double(), r.to_double());
              if (std::isfinite(v)) {
                poly_insert(out, Monomial{}, Number::real(v));
                return out;
              }
            }
            poly_insert(out,
                        Monomial{{pow_(base_c, Expr::constant(r)), Rational(1)}},
                        Number(1));
            return out;
          }
          const ExprPtr atom = pow_(rebuild(normalize(e->lhs)), rebuild(bp));
          poly_insert(out, Monomial{{atom, Rational(1)}}, Number(1));
          return out;
        }
      }
  }
  return out;
}

// --- canonical rebuild ------------------------------------------------------

inline ExprPtr atom_power(const ExprPtr& atom, const Rational& exp) {
  if (exp.is_one()) return atom;
  return pow_(atom, Expr::constant(Number(exp)));
}

inline ExprPtr mul_chain(const std::vector<ExprPtr>& factors) {
  ExprPtr acc = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) acc = mul(acc, factors[i]);
  return acc;
}

/// One monomial with |coeff|; the sign is applied by the caller. Sum atoms
/// always carry explicit pow form in the numerator: a denominator must
/// re-normalize to a single monomial, which products of sums would not.
inline ExprPtr rebuild_term(const Monomial& mono, const Number& coeff_abs) {
  std::vector<ExprPtr> numer, denom;
  for (const auto& [atom, exp] : mono) {
    if (Rational(0) < exp || is_sum_atom(atom)) {
      numer.push_back(atom_power(atom, exp));
    } else {
      Rational pos = exp;
      pos.num = -pos.num;
      denom.push_back(atom_power(atom, pos));
    }
  }
  if (!coeff_abs.is_one() || numer.empty())
    numer.insert(numer.begin(), Expr::constant(coeff_abs));
  const ExprPtr num_expr = mul_chain(numer);
  if (denom.empty()) return num_expr;
  return div(num_expr, mul_chain(denom));
}

inline ExprPtr rebuild(const Poly& p) {
  if (p.empty()) return Expr::integer(0);
  ExprPtr acc;
  for (const auto& [mono, coeff] : p) {
    const bool negative = coeff.negative();
    const ExprPtr term = rebuild_term(mono, negative ? coeff.negated() : coeff);
    if (!acc)
      acc = negative ? neg(term) : term;
    else
      acc = add(acc, negative ? neg(term) : term);
  }
  return acc;
}

}  // namespace simp

/// Canonical simplification; value-preserving and idempotent.
inline ExprPtr simplify(const ExprPtr& e) { return simp::rebuild(simp::normalize(e)); }

/// True when the expression simplifies to the zero constant.
inline bool simplifies_to_zero(const ExprPtr& e) { return simp::normalize(e).empty(); }

}  // namespace hjdyn
