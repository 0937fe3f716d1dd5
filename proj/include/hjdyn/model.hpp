// Lagrangian systems: validation, velocity Hessian, rank and coordinate
// split, Euler-Lagrange residuals and explicit accelerations.
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hjdyn/errors.hpp"
#include "hjdyn/eval.hpp"
#include "hjdyn/linalg.hpp"
#include "hjdyn/zero_test.hpp"

namespace hjdyn {

/// A finite-dof Lagrangian system. Velocities follow the v_<coord> naming
/// convention; accelerations introduced by the Euler-Lagrange machinery are
/// a_<coord>; conjugate momenta are p_<coord>. `evolution` is the symbol of
/// the independent variable (time for ordinary models, the path parameter
/// for reparametrized ones).
struct LagrangianModel {
  std::string name;
  std::vector<std::string> coordinates;
  std::string evolution = "t";
  ExprPtr lagrangian;

  static std::string velocity_name(const std::string& coord) { return "v_" + coord; }
  static std::string accel_name(const std::string& coord) { return "a_" + coord; }
  static std::string momentum_name(const std::string& coord) { return "p_" + coord; }

  std::size_t dof() const { return coordinates.size(); }
  std::vector<std::string> velocities() const {
    std::vector<std::string> v;
    v.reserve(coordinates.size());
    for (const auto& c : coordinates) v.push_back(velocity_name(c));
    return v;
  }
};

/// Checks naming invariants and that the Lagrangian only references declared
/// symbols; throws ModelError otherwise.
inline void validate_model(const LagrangianModel& m) {
  if (m.name.empty()) throw ModelError("model name must not be empty");
  if (m.coordinates.empty()) throw ModelError("model has no coordinates");
  if (!m.lagrangian) throw ModelError("model has no Lagrangian expression");
  std::set<std::string> seen;
  for (const auto& c : m.coordinates) {
    if (c.empty()) throw ModelError("empty coordinate name");
    if (!seen.insert(c).second) throw ModelError("duplicate coordinate '" + c + "'");
  }
  std::set<std::string> allowed = seen;
  for (const auto& c : m.coordinates) {
    if (seen.count(LagrangianModel::velocity_name(c)))
      throw ModelError("coordinate '" + LagrangianModel::velocity_name(c) +
                       "' collides with a velocity symbol");
    allowed.insert(LagrangianModel::velocity_name(c));
  }
  if (m.evolution.empty()) throw ModelError("model has no evolution symbol");
  if (allowed.count(m.evolution))
    throw ModelError("evolution symbol '" + m.evolution +
                     "' collides with a coordinate or velocity");
  allowed.insert(m.evolution);
  for (const auto& s : symbols_of(m.lagrangian))
    if (!allowed.count(s))
      throw ModelError("unknown symbol '" + s + "' in Lagrangian of model '" + m.name + "'");
}

// ---------------------------------------------------------------------------

/// Velocity Hessian with its sampled rank and the regular/degenerate
/// coordinate split (indices into `coordinates`).
struct HessianAnalysis {
  ExprMatrix hessian;
  int rank = -1;
  int deficiency = -1;
  std::vector<int> regular;
  std::vector<int> degenerate;
  std::vector<int> sample_ranks;

  bool completed() const { return rank >= 0; }
};

/// H_ij = d^2 L / dv_i dv_j, simplified. Rank is left unset.
inline HessianAnalysis velocity_hessian(const LagrangianModel& m) {
  const auto vels = m.velocities();
  const std::size_t n = vels.size();
  HessianAnalysis h;
  h.hessian.assign(n, std::vector<ExprPtr>(n));
  std::vector<ExprPtr> first(n);
  for (std::size_t i = 0; i < n; ++i) first[i] = simplify(differentiate(m.lagrangian, vels[i]));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      h.hessian[i][j] = simplify(differentiate(first[i], vels[j]));
  return h;
}

struct RankOptions {
  int samples = 50;
  std::uint64_t seed = 0x5eed5eedULL;
  double pivot_tolerance = 1e-9;
  // Samples stay away from coordinate planes so generic degeneracies are
  // not confused with structural ones.
  double low = 0.5, high = 2.0;
};

/// Completes a Hessian analysis with the numeric rank over random bindings.
/// Every retained sample must produce the same rank; otherwise the model's
/// degeneracy is configuration-dependent and is rejected.
inline HessianAnalysis rank_and_split(const LagrangianModel& m, HessianAnalysis h,
                                      const RankOptions& opt = {}) {
  if (opt.samples < 10) throw ModelError("rank sampling needs at least 10 samples");
  const std::size_t n = h.hessian.size();
  std::set<std::string> syms;
  for (const auto& row : h.hessian)
    for (const auto& e : row) collect_symbols(e, syms);

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> dist(opt.low, opt.high);
  std::vector<int> first_pivots;
  h.sample_ranks.clear();
  int common_rank = -1;
  for (int s = 0; s < opt.samples; ++s) {
    Binding b;
    for (const auto& name : syms) b[name] = dist(rng);
    std::vector<std::vector<double>> num(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) num[i][j] = evaluate(h.hessian[i][j], b);
    const NumericReduction red = numeric_row_reduce(num, opt.pivot_tolerance);
    h.sample_ranks.push_back(red.rank);
    if (s == 0) {
      common_rank = red.rank;
      first_pivots = red.pivot_columns;
    } else if (red.rank != common_rank) {
      throw UnsupportedModelError(
          "stratified Hessian: rank differs across samples for model '" + m.name +
          "' (saw " + std::to_string(common_rank) + " and " + std::to_string(red.rank) + ")");
    }
  }
  h.rank = common_rank;
  h.deficiency = static_cast<int>(n) - common_rank;
  h.regular = first_pivots;
  h.degenerate.clear();
  for (int c = 0; c < static_cast<int>(n); ++c)
    if (std::find(h.regular.begin(), h.regular.end(), c) == h.regular.end())
      h.degenerate.push_back(c);
  return h;
}

inline HessianAnalysis analyze_hessian(const LagrangianModel& m, const RankOptions& opt = {}) {
  return rank_and_split(m, velocity_hessian(m), opt);
}

// ---------------------------------------------------------------------------

/// Total derivative along the evolution parameter, expanding the chain rule
/// into velocity and acceleration symbols.
inline ExprPtr total_time_derivative(const ExprPtr& e, const LagrangianModel& m,
                                     bool with_accelerations = true) {
  ExprPtr acc = differentiate(e, m.evolution);
  for (const auto& c : m.coordinates) {
    const ExprPtr dq = differentiate(e, c);
    if (!dq->is_zero_constant())
      acc = add(acc, mul(dq, sym(LagrangianModel::velocity_name(c))));
    if (with_accelerations) {
      const ExprPtr dv = differentiate(e, LagrangianModel::velocity_name(c));
      if (!dv->is_zero_constant())
        acc = add(acc, mul(dv, sym(LagrangianModel::accel_name(c))));
    }
  }
  return acc;
}

/// Euler-Lagrange residuals d/dt(dL/dv_i) - dL/dq_i, one per coordinate,
/// in (q, v, a_<coord>, t).
inline std::vector<ExprPtr> euler_lagrange_residuals(const LagrangianModel& m) {
  std::vector<ExprPtr> out;
  out.reserve(m.coordinates.size());
  for (const auto& c : m.coordinates) {
    const ExprPtr p = differentiate(m.lagrangian, LagrangianModel::velocity_name(c));
    out.push_back(simplify(sub(total_time_derivative(p, m), differentiate(m.lagrangian, c))));
  }
  return out;
}

/// Explicit accelerations a_i = f_i(q, v, t), available when the momenta are
/// affine in the velocities and the full Hessian is symbolically invertible.
inline std::vector<ExprPtr> explicit_accelerations(const LagrangianModel& m,
                                                   const ZeroTestOptions& zt = {}) {
  const auto vels = m.velocities();
  const HessianAnalysis h = velocity_hessian(m);
  const std::size_t n = vels.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (const auto& v : vels)
        if (contains_symbol(h.hessian[i][j], v) &&
            !is_identically_zero(differentiate(h.hessian[i][j], v), zt).is_zero())
          throw UnsupportedModelError("momentum relation for '" + m.coordinates[i] +
                                      "' is not affine in the velocities: d L/d " + vels[i] +
                                      " = " +
                                      to_string(simplify(differentiate(m.lagrangian, vels[i]))));
  std::vector<ExprPtr> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ExprPtr p = differentiate(m.lagrangian, vels[i]);
    // Everything in d/dt(dL/dv_i) except the Hessian * acceleration block.
    rhs[i] = sub(differentiate(m.lagrangian, m.coordinates[i]),
                 total_time_derivative(p, m, /*with_accelerations=*/false));
  }
  try {
    return symbolic_solve(h.hessian, rhs);
  } catch (const UnsupportedModelError&) {
    throw UnsupportedModelError("velocity Hessian of model '" + m.name +
                                "' is not symbolically invertible");
  }
}

/// Energy function E = sum_i v_i dL/dv_i - L.
inline ExprPtr energy_function(const LagrangianModel& m) {
  ExprPtr acc = neg(m.lagrangian);
  for (const auto& c : m.coordinates) {
    const auto v = LagrangianModel::velocity_name(c);
    acc = add(acc, mul(sym(v), differentiate(m.lagrangian, v)));
  }
  return simplify(acc);
}

}  // namespace hjdyn
