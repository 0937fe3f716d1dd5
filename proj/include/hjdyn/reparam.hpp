// Parametrization-invariant extension of a regular Lagrangian: promoting
// time to a coordinate driven by a fresh path parameter, first-degree
// homogeneity, the extended constraint Hamiltonians, and the end-to-end
// equivalence check between the canonical route and the Euler-Lagrange
// route.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hjdyn/hj.hpp"

namespace hjdyn {

/// A regular base model together with its parametrization-invariant
/// extension. The extension appends the old time as the last coordinate (so
/// the rank split lands on it) and evolves in a fresh parameter.
struct ReparamPair {
  LagrangianModel base;
  LagrangianModel extended;
  HessianAnalysis extended_split;
  std::map<std::string, std::string> provenance;  // extended symbol -> base meaning

  const std::string& time_coordinate() const { return base.evolution; }
};

/// v_t * L(q, v_q/v_t, t) with t appended as a coordinate and tau as the new
/// evolution parameter. Requires a regular base.
inline ReparamPair parametrize(const LagrangianModel& base, const RankOptions& ropt = {}) {
  validate_model(base);
  const HessianAnalysis base_split = analyze_hessian(base, ropt);
  if (base_split.deficiency != 0)
    throw ModelError("parametrization requires a regular base model; '" + base.name +
                     "' has Hessian deficiency " + std::to_string(base_split.deficiency));

  ReparamPair pair;
  pair.base = base;
  LagrangianModel& ext = pair.extended;
  ext.name = base.name + "_reparametrized";
  ext.coordinates = base.coordinates;
  ext.coordinates.push_back(base.evolution);
  ext.evolution = "tau";

  const std::string vt = LagrangianModel::velocity_name(base.evolution);
  std::set<std::string> taken = symbols_of(base.lagrangian);
  for (const auto& c : ext.coordinates) {
    taken.insert(c);
    taken.insert(LagrangianModel::velocity_name(c));
  }
  if (taken.count(ext.evolution))
    throw ModelError("cannot introduce evolution parameter 'tau': symbol already in use");

  std::map<std::string, ExprPtr> subst;
  for (const auto& c : base.coordinates) {
    const auto v = LagrangianModel::velocity_name(c);
    subst[v] = div(sym(v), sym(vt));
  }
  ext.lagrangian = simplify(mul(sym(vt), substitute(base.lagrangian, subst)));
  validate_model(ext);

  pair.extended_split = analyze_hessian(ext, ropt);
  if (pair.extended_split.deficiency != 1)
    throw UnsupportedModelError("extension of '" + base.name +
                                "' does not have Hessian deficiency 1");
  const int t_index = static_cast<int>(ext.coordinates.size()) - 1;
  if (pair.extended_split.degenerate != std::vector<int>{t_index})
    throw UnsupportedModelError("extension of '" + base.name +
                                "' is not degenerate along the time direction");

  for (const auto& c : base.coordinates) {
    pair.provenance[c] = c;
    pair.provenance[LagrangianModel::velocity_name(c)] =
        LagrangianModel::velocity_name(c) + " (per unit " + base.evolution + " after reduction)";
  }
  pair.provenance[base.evolution] = "time promoted to a coordinate";
  pair.provenance[vt] = "d" + base.evolution + "/dtau";
  return pair;
}

/// Euler identity residual sum_mu v_mu dL/dv_mu - L; zero exactly when the
/// Lagrangian is homogeneous of first degree in the velocities.
inline ExprPtr homogeneity_residual(const LagrangianModel& m) {
  ExprPtr acc = neg(m.lagrangian);
  for (const auto& c : m.coordinates) {
    const auto v = LagrangianModel::velocity_name(c);
    acc = add(acc, mul(sym(v), differentiate(m.lagrangian, v)));
  }
  return simplify(acc);
}

inline ZeroTestResult homogeneity_check(const LagrangianModel& m, const ZeroTestOptions& zt = {}) {
  return is_identically_zero(homogeneity_residual(m), zt);
}

inline ZeroTestResult homogeneity_check(const ReparamPair& pair, const ZeroTestOptions& zt = {}) {
  return homogeneity_check(pair.extended, zt);
}

// ---------------------------------------------------------------------------

/// Extended constraint system with its consistency verdicts: H_0 must vanish
/// by homogeneity and the H_t built through the generic machinery must agree
/// with the base Legendre transform built independently.
struct ExtendedHJ {
  HJSystem sys;
  ExprPtr h_t;               // canonical route
  ExprPtr h_t_legendre;      // independent route through the base model
  ZeroVerdict h0_vanishes;
  ZeroVerdict h_t_match;
};

inline ExtendedHJ build_extended_hj(const ReparamPair& pair, const ZeroTestOptions& zt = {}) {
  ExtendedHJ out;
  out.sys = build_hamiltonians(pair.extended, pair.extended_split,
                               legendre_invert(pair.extended, pair.extended_split, zt), zt);

  // Independent route: invert the base momenta and assemble
  // H_t = p_i w_i - L(q, w, t) directly.
  HessianAnalysis base_all_regular = velocity_hessian(pair.base);
  base_all_regular.rank = static_cast<int>(pair.base.dof());
  base_all_regular.deficiency = 0;
  for (std::size_t i = 0; i < pair.base.dof(); ++i)
    base_all_regular.regular.push_back(static_cast<int>(i));
  const std::vector<ExprPtr> w_base = legendre_invert(pair.base, base_all_regular, zt);
  std::map<std::string, ExprPtr> vel_sub;
  ExprPtr ht = neg(pair.base.lagrangian);
  for (std::size_t i = 0; i < pair.base.dof(); ++i) {
    const auto& c = pair.base.coordinates[i];
    vel_sub[LagrangianModel::velocity_name(c)] = w_base[i];
    ht = add(ht, mul(sym(LagrangianModel::momentum_name(c)),
                     sym(LagrangianModel::velocity_name(c))));
  }
  out.h_t_legendre = simplify(substitute(ht, vel_sub));

  const auto it = std::find(out.sys.parameters.begin(), out.sys.parameters.end(),
                            pair.time_coordinate());
  const std::size_t t_pos = static_cast<std::size_t>(it - out.sys.parameters.begin());
  out.h_t = out.sys.hamiltonians[t_pos];

  out.h0_vanishes = is_identically_zero(out.sys.hamiltonians[0], zt).verdict;
  out.h_t_match = is_identically_zero(sub(out.h_t, out.h_t_legendre), zt).verdict;
  if (out.h0_vanishes == ZeroVerdict::Nonzero)
    throw UnsupportedModelError("extended H_0 does not vanish for '" + pair.base.name + "'");
  if (out.h_t_match == ZeroVerdict::Nonzero)
    throw UnsupportedModelError("canonical and Legendre routes disagree on H_t for '" +
                                pair.base.name + "'");
  return out;
}

// ---------------------------------------------------------------------------

/// Side-by-side trajectory comparison between the extended canonical route
/// and the base Euler-Lagrange route.
struct EquivalenceReport {
  std::string model;
  double horizon = 0.0;
  double step = 0.0;
  double max_dev_q = 0.0;
  double max_dev_p = 0.0;
  double pt_drift = 0.0;
  double hpt_max = 0.0;
  double tolerance = 1e-6;
  bool equivalent = false;
  Trajectory canonical;   // route A
  Trajectory lagrangian;  // route B, columns: s, t, q..., v..., p...
};

namespace detail {

/// RK4 on the explicit second-order system dq = v, dv = f(q, v, t).
inline Trajectory integrate_explicit_el(const LagrangianModel& m,
                                        const std::vector<ExprPtr>& accel, const Binding& initial,
                                        double horizon, double step) {
  const std::size_t n = m.dof();
  std::vector<std::string> names;
  names.push_back(m.evolution);
  for (const auto& c : m.coordinates) names.push_back(c);
  for (const auto& c : m.coordinates) names.push_back(LagrangianModel::velocity_name(c));
  const SymbolTable table(names);

  std::vector<CompiledExpr> f(n), mom(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = CompiledExpr::compile(accel[i], table);
    mom[i] = CompiledExpr::compile(
        simplify(differentiate(m.lagrangian, LagrangianModel::velocity_name(m.coordinates[i]))),
        table);
  }

  std::vector<double> x(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = initial.at(m.coordinates[i]);
    x[n + i] = initial.at(LagrangianModel::velocity_name(m.coordinates[i]));
  }

  Trajectory traj;
  traj.columns.push_back("s");
  traj.columns.push_back(m.evolution);
  for (const auto& c : m.coordinates) traj.columns.push_back(c);
  for (const auto& c : m.coordinates) traj.columns.push_back(LagrangianModel::velocity_name(c));
  for (const auto& c : m.coordinates)
    traj.columns.push_back(LagrangianModel::momentum_name(c));

  std::vector<double> env(1 + 2 * n), k(2 * n), acc2(2 * n), xs(2 * n);
  auto deriv = [&](double t, const std::vector<double>& state, std::vector<double>& out) {
    env[0] = t;
    for (std::size_t i = 0; i < 2 * n; ++i) env[1 + i] = state[i];
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = state[n + i];
      out[n + i] = f[i].eval(env);
    }
  };
  auto record = [&](double t) {
    std::vector<double> row;
    row.reserve(2 + 3 * n);
    row.push_back(t);
    row.push_back(t);
    for (double v : x) row.push_back(v);
    env[0] = t;
    for (std::size_t i = 0; i < 2 * n; ++i) env[1 + i] = x[i];
    for (std::size_t i = 0; i < n; ++i) row.push_back(mom[i].eval(env));
    traj.samples.push_back(std::move(row));
  };

  record(0.0);
  double t = 0.0;
  while (t < horizon - 1e-15 * std::max(1.0, horizon)) {
    const double h = std::min(step, horizon - t);
    try {
      deriv(t, x, k);
      for (std::size_t i = 0; i < 2 * n; ++i) {
        acc2[i] = k[i];
        xs[i] = x[i] + 0.5 * h * k[i];
      }
      deriv(t + 0.5 * h, xs, k);
      for (std::size_t i = 0; i < 2 * n; ++i) {
        acc2[i] += 2.0 * k[i];
        xs[i] = x[i] + 0.5 * h * k[i];
      }
      deriv(t + 0.5 * h, xs, k);
      for (std::size_t i = 0; i < 2 * n; ++i) {
        acc2[i] += 2.0 * k[i];
        xs[i] = x[i] + h * k[i];
      }
      deriv(t + h, xs, k);
    } catch (const EvalError& err) {
      traj.truncated = true;
      traj.failure = err.what();
      return traj;
    }
    bool finite = true;
    for (std::size_t i = 0; i < 2 * n; ++i) {
      x[i] += h / 6.0 * (acc2[i] + k[i]);
      if (!std::isfinite(x[i])) finite = false;
    }
    if (!finite) {
      traj.truncated = true;
      traj.failure = "non-finite state at t = " + std::to_string(t + h);
      return traj;
    }
    t += h;
    record(t);
  }
  return traj;
}

}  // namespace detail

/// Initial data for the canonical route derived from Lagrangian-route data:
/// momenta through the base Legendre map, p_t on the constraint surface, and
/// p_tau zero.
inline Binding canonical_initial_data(const ReparamPair& pair, const ExtendedHJ& ext,
                                      const Binding& initial_qv, double t0 = 0.0) {
  Binding full;
  Binding qvt = initial_qv;
  qvt[pair.base.evolution] = t0;
  for (const auto& c : pair.base.coordinates) {
    full[c] = initial_qv.at(c);
    const ExprPtr p = simplify(differentiate(pair.base.lagrangian,
                                             LagrangianModel::velocity_name(c)));
    full[LagrangianModel::momentum_name(c)] = evaluate(p, qvt);
  }
  Binding phase = full;
  phase[pair.base.evolution] = t0;
  full[LagrangianModel::momentum_name(pair.base.evolution)] = -evaluate(ext.h_t, phase);
  full[LagrangianModel::momentum_name(pair.extended.evolution)] =
      -evaluate(ext.sys.hamiltonians[0], phase);
  full["z"] = 0.0;
  return full;
}

/// Integrates both routes with matched initial data and reports the largest
/// pointwise deviation of coordinates and momenta, the p_t drift, and the
/// largest |H'_t| along the canonical route.
inline EquivalenceReport verify_equivalence(const ReparamPair& pair, const Binding& initial_qv,
                                            double horizon, double step,
                                            const ZeroTestOptions& zt = {},
                                            double tolerance = 1e-6) {
  const ExtendedHJ ext = build_extended_hj(pair, zt);
  const TotalDifferentialSystem tds = total_differential_system(ext.sys);

  EquivalenceReport rep;
  rep.model = pair.base.name;
  rep.horizon = horizon;
  rep.step = step;
  rep.tolerance = tolerance;

  const Binding init = canonical_initial_data(pair, ext, initial_qv);
  // Path: tau = s and t = s.
  ParameterPath path = ParameterPath::linear({0.0, 0.0}, {1.0, 1.0}, horizon);
  rep.canonical = integrate(tds, init, path, step);
  if (rep.canonical.truncated)
    throw NumericalError("canonical route failed: " + rep.canonical.failure);

  const std::vector<ExprPtr> accel = explicit_accelerations(pair.base, zt);
  rep.lagrangian = detail::integrate_explicit_el(pair.base, accel, initial_qv, horizon, step);
  if (rep.lagrangian.truncated)
    throw NumericalError("Euler-Lagrange route failed: " + rep.lagrangian.failure);

  // Matched sampling: both use the same s-grid and t = s.
  const std::size_t rows = std::min(rep.canonical.samples.size(), rep.lagrangian.samples.size());
  const std::size_t n = pair.base.dof();
  std::vector<int> qa_idx(n), pa_idx(n), qb_idx(n), pb_idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = pair.base.coordinates[i];
    qa_idx[i] = rep.canonical.column_index(c);
    pa_idx[i] = rep.canonical.column_index(LagrangianModel::momentum_name(c));
    qb_idx[i] = rep.lagrangian.column_index(c);
    pb_idx[i] = rep.lagrangian.column_index(LagrangianModel::momentum_name(c));
  }
  const int pt_idx =
      rep.canonical.column_index(LagrangianModel::momentum_name(pair.base.evolution));

  // H'_t along route A.
  std::vector<std::string> env_names = ext.sys.parameters;
  for (const auto& sname : tds.state) env_names.push_back(sname);
  const SymbolTable table(env_names);
  const auto t_it = std::find(ext.sys.parameters.begin(), ext.sys.parameters.end(),
                              pair.time_coordinate());
  const std::size_t t_pos = static_cast<std::size_t>(t_it - ext.sys.parameters.begin());
  const CompiledExpr hpt = CompiledExpr::compile(ext.sys.primed[t_pos], table);
  std::vector<double> env(env_names.size());

  const double pt0 = rep.canonical.samples.empty()
                         ? 0.0
                         : rep.canonical.samples.front()[static_cast<std::size_t>(pt_idx)];
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& ra = rep.canonical.samples[r];
    const auto& rb = rep.lagrangian.samples[r];
    for (std::size_t i = 0; i < n; ++i) {
      rep.max_dev_q = std::max(rep.max_dev_q,
                               std::abs(ra[static_cast<std::size_t>(qa_idx[i])] -
                                        rb[static_cast<std::size_t>(qb_idx[i])]));
      rep.max_dev_p = std::max(rep.max_dev_p,
                               std::abs(ra[static_cast<std::size_t>(pa_idx[i])] -
                                        rb[static_cast<std::size_t>(pb_idx[i])]));
    }
    rep.pt_drift =
        std::max(rep.pt_drift, std::abs(ra[static_cast<std::size_t>(pt_idx)] - pt0));
    for (std::size_t k = 1; k < ra.size(); ++k) env[k - 1] = ra[k];
    rep.hpt_max = std::max(rep.hpt_max, std::abs(hpt.eval(env)));
  }
  rep.equivalent = rep.max_dev_q <= tolerance && rep.max_dev_p <= tolerance;
  return rep;
}

}  // namespace hjdyn
