// Numeric evaluation: a checked tree walker for general use and a slot-based
// compiled form for integrator inner loops.
#pragma once

#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hjdyn/expression.hpp"

namespace hjdyn {

/// Map from symbol name to numeric value.
using Binding = std::map<std::string, double>;

enum class EvalStatus { Ok, UnboundSymbol, DivisionByZero, DomainError };

struct EvalError : std::runtime_error {
  EvalStatus status;
  EvalError(EvalStatus s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

/// Result of a guarded evaluation: carries the status instead of throwing and
/// flags near-singular denominators so samplers can discard the point.
struct EvalOutcome {
  EvalStatus status = EvalStatus::Ok;
  double value = 0.0;
  bool near_singular = false;
  std::string detail;
};

namespace detail {

struct EvalCtx {
  const Binding* binding;
  double near_threshold;  // |denominator| below this flags near_singular
  bool near_singular = false;
};

inline double eval_node(const ExprPtr& e, EvalCtx& ctx) {
  switch (e->kind) {
    case NodeKind::Constant:
      return e->value.to_double();
    case NodeKind::Symbol: {
      auto it = ctx.binding->find(e->name);
      if (it == ctx.binding->end())
        throw EvalError(EvalStatus::UnboundSymbol, "unbound symbol '" + e->name + "'");
      return it->second;
    }
    case NodeKind::Unary: {
      const double a = eval_node(e->lhs, ctx);
      switch (e->uop) {
        case UnaryOp::Neg: return -a;
        case UnaryOp::Sin: return std::sin(a);
        case UnaryOp::Cos: return std::cos(a);
        case UnaryOp::Exp: return std::exp(a);
        case UnaryOp::Ln:
          if (a <= 0.0)
            throw EvalError(EvalStatus::DomainError, "ln of non-positive value");
          if (a < ctx.near_threshold) ctx.near_singular = true;
          return std::log(a);
      }
      break;
    }
    case NodeKind::Binary: {
      const double a = eval_node(e->lhs, ctx);
      const double b = eval_node(e->rhs, ctx);
      switch (e->bop) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div:
          if (b == 0.0) throw EvalError(EvalStatus::DivisionByZero, "division by zero");
          if (std::abs(b) < ctx.near_threshold) ctx.near_singular = true;
          return a / b;
        case BinaryOp::Pow: {
          if (b == std::floor(b)) {
            if (a == 0.0 && b < 0.0)
              throw EvalError(EvalStatus::DivisionByZero, "zero to negative power");
            if (b < 0.0 && std::abs(a) < ctx.near_threshold) ctx.near_singular = true;
            return std::pow(a, b);
          }
          if (a < 0.0)
            throw EvalError(EvalStatus::DomainError, "negative base with non-integer exponent");
          if (a == 0.0 && b < 0.0)
            throw EvalError(EvalStatus::DivisionByZero, "zero to negative power");
          if (b < 0.0 && a < ctx.near_threshold) ctx.near_singular = true;
          return std::pow(a, b);
        }
      }
      break;
    }
  }
  throw EvalError(EvalStatus::DomainError, "malformed expression node");
}

}  // namespace detail

/// Evaluates a closed expression; throws EvalError on unbound symbols,
/// division by zero, domain violations, and overflow to non-finite values.
inline double evaluate(const ExprPtr& e, const Binding& b) {
  detail::EvalCtx ctx{&b, 0.0};
  const double v = detail::eval_node(e, ctx);
  if (!std::isfinite(v))
    throw EvalError(EvalStatus::DomainError, "evaluation produced a non-finite value");
  return v;
}

/// Non-throwing evaluation with near-singularity detection.
inline EvalOutcome evaluate_guarded(const ExprPtr& e, const Binding& b,
                                    double near_threshold = 1e-6) {
  detail::EvalCtx ctx{&b, near_threshold};
  EvalOutcome out;
  try {
    out.value = detail::eval_node(e, ctx);
    out.near_singular = ctx.near_singular;
    if (!std::isfinite(out.value)) {
      out.status = EvalStatus::DomainError;
      out.detail = "non-finite result";
    }
  } catch (const EvalError& err) {
    out.status = err.status;
    out.detail = err.what();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Compiled evaluation

/// Fixed, ordered list of symbol names mapping symbols to env slots.
class SymbolTable {
 public:
  SymbolTable() = default;
  explicit SymbolTable(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i) index_[names_[i]] = static_cast<int>(i);
  }
  int index_of(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
};

/// Postfix program over an environment vector; one stack per evaluation.
class CompiledExpr {
 public:
  CompiledExpr() = default;

  static CompiledExpr compile(const ExprPtr& e, const SymbolTable& table) {
    CompiledExpr c;
    c.emit(e, table);
    c.stack_.resize(c.depth_);
    return c;
  }

  double eval(std::span<const double> env) const {
    std::size_t top = 0;
    for (const Ins& ins : code_) {
      switch (ins.op) {
        case Op::Const: stack_[top++] = ins.c; break;
        case Op::Load: stack_[top++] = env[static_cast<std::size_t>(ins.slot)]; break;
        case Op::Neg: stack_[top - 1] = -stack_[top - 1]; break;
        case Op::Sin: stack_[top - 1] = std::sin(stack_[top - 1]); break;
        case Op::Cos: stack_[top - 1] = std::cos(stack_[top - 1]); break;
        case Op::Exp: stack_[top - 1] = std::exp(stack_[top - 1]); break;
        case Op::Ln:
          if (stack_[top - 1] <= 0.0)
            throw EvalError(EvalStatus::DomainError, "ln of non-positive value");
          stack_[top - 1] = std::log(stack_[top - 1]);
          break;
        case Op::Add: --top; stack_[top - 1] += stack_[top]; break;
        case Op::Mul: --top; stack_[top - 1] *= stack_[top]; break;
        case Op::Div:
          --top;
          if (stack_[top] == 0.0)
            throw EvalError(EvalStatus::DivisionByZero, "division by zero");
          stack_[top - 1] /= stack_[top];
          break;
        case Op::Pow:
          --top;
          stack_[top - 1] = std::pow(stack_[top - 1], stack_[top]);
          break;
      }
    }
    return stack_[0];
  }

 private:
  enum class Op { Const, Load, Neg, Sin, Cos, Exp, Ln, Add, Mul, Div, Pow };
  struct Ins {
    Op op;
    double c = 0.0;
    int slot = 0;
  };

  void emit(const ExprPtr& e, const SymbolTable& table) {
    switch (e->kind) {
      case NodeKind::Constant:
        code_.push_back({Op::Const, e->value.to_double(), 0});
        note_push();
        return;
      case NodeKind::Symbol: {
        const int slot = table.index_of(e->name);
        if (slot < 0)
          throw EvalError(EvalStatus::UnboundSymbol, "unbound symbol '" + e->name + "'");
        code_.push_back({Op::Load, 0.0, slot});
        note_push();
        return;
      }
      case NodeKind::Unary: {
        emit(e->lhs, table);
        Op op = Op::Neg;
        switch (e->uop) {
          case UnaryOp::Neg: op = Op::Neg; break;
          case UnaryOp::Sin: op = Op::Sin; break;
          case UnaryOp::Cos: op = Op::Cos; break;
          case UnaryOp::Exp: op = Op::Exp; break;
          case UnaryOp::Ln: op = Op::Ln; break;
        }
        code_.push_back({op, 0.0, 0});
        return;
      }
      case NodeKind::Binary: {
        emit(e->lhs, table);
        emit(e->rhs, table);
        Op op = Op::Add;
        switch (e->bop) {
          case BinaryOp::Add: op = Op::Add; break;
          case BinaryOp::Mul: op = Op::Mul; break;
          case BinaryOp::Div: op = Op::Div; break;
          case BinaryOp::Pow: op = Op::Pow; break;
        }
        code_.push_back({op, 0.0, 0});
        --cur_;
        return;
      }
    }
  }

  void note_push() {
    ++cur_;
    if (cur_ > depth_) depth_ = cur_;
  }

  std::vector<Ins> code_;
  std::size_t depth_ = 0, cur_ = 0;
  mutable std::vector<double> stack_;
};

}  // namespace hjdyn
