// Canonical constraint structure of a singular Lagrangian: the constraint
// Hamiltonians H'_alpha, the total differential equations they generate, the
// integrability loop, and trajectory integration along parameter paths.
#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "hjdyn/model.hpp"

namespace hjdyn {

/// The constraint Hamiltonians of one model. Parameters t_alpha are the
/// evolution symbol followed by the degenerate coordinates; hamiltonians[k]
/// and primed[k] are aligned with parameters[k], primed[k] = p_k + H_k.
/// Inverted regular velocities w may reference degenerate velocities.
struct HJSystem {
  LagrangianModel model;
  HessianAnalysis split;
  std::vector<std::string> parameters;
  std::vector<std::string> parameter_momenta;
  std::vector<std::string> regular_coords;
  std::vector<std::string> regular_momenta;
  std::vector<std::string> degenerate_coords;
  std::vector<ExprPtr> w;
  std::vector<ExprPtr> hamiltonians;
  std::vector<ExprPtr> primed;
};

namespace detail {

inline std::map<std::string, ExprPtr> regular_velocity_substitution(
    const std::vector<std::string>& regular_coords, const std::vector<ExprPtr>& w) {
  std::map<std::string, ExprPtr> subst;
  for (std::size_t a = 0; a < regular_coords.size(); ++a)
    subst[LagrangianModel::velocity_name(regular_coords[a])] = w[a];
  return subst;
}

}  // namespace detail

/// Solves the regular-sector momentum relations p_a = dL/dv_a for the
/// velocities. Requires the relations to be affine in the regular
/// velocities; coefficients may involve coordinates and degenerate
/// velocities. The solution is verified by back-substitution.
inline std::vector<ExprPtr> legendre_invert(const LagrangianModel& m, const HessianAnalysis& split,
                                            const ZeroTestOptions& zt = {}) {
  const std::size_t nr = split.regular.size();
  std::vector<std::string> reg_coords(nr), reg_vels(nr);
  for (std::size_t a = 0; a < nr; ++a) {
    reg_coords[a] = m.coordinates[static_cast<std::size_t>(split.regular[a])];
    reg_vels[a] = LagrangianModel::velocity_name(reg_coords[a]);
  }

  std::vector<ExprPtr> momenta(nr);
  for (std::size_t a = 0; a < nr; ++a)
    momenta[a] = simplify(differentiate(m.lagrangian, reg_vels[a]));

  // Affine check: the regular-sector Hessian block must be free of the
  // regular velocities.
  ExprMatrix coeff(nr, std::vector<ExprPtr>(nr));
  for (std::size_t a = 0; a < nr; ++a)
    for (std::size_t b = 0; b < nr; ++b) {
      coeff[a][b] = simplify(differentiate(momenta[a], reg_vels[b]));
      for (const auto& v : reg_vels)
        if (contains_symbol(coeff[a][b], v) &&
            !is_identically_zero(differentiate(coeff[a][b], v), zt).is_zero())
          throw UnsupportedModelError("momentum relation is not affine in the velocities: p_" +
                                      reg_coords[a] + " = " + to_string(momenta[a]));
    }

  // p_a = sum_b coeff_ab v_b + offset_a; solve for v in terms of p symbols.
  std::map<std::string, ExprPtr> zero_regular;
  for (const auto& v : reg_vels) zero_regular[v] = Expr::integer(0);
  std::vector<ExprPtr> rhs(nr);
  for (std::size_t a = 0; a < nr; ++a) {
    const ExprPtr offset = simplify(substitute(momenta[a], zero_regular));
    rhs[a] = sub(sym(LagrangianModel::momentum_name(reg_coords[a])), offset);
  }
  std::vector<ExprPtr> w;
  try {
    w = symbolic_solve(coeff, rhs);
  } catch (const UnsupportedModelError&) {
    throw UnsupportedModelError("regular sector of model '" + m.name +
                                "' has a singular velocity Hessian block");
  }

  for (std::size_t a = 0; a < nr; ++a) {
    const auto sub_map = detail::regular_velocity_substitution(reg_coords, w);
    const ExprPtr residual =
        sub(substitute(momenta[a], sub_map), sym(LagrangianModel::momentum_name(reg_coords[a])));
    if (!is_identically_zero(residual, zt).is_zero())
      throw UnsupportedModelError("momentum inversion failed to verify for coordinate '" +
                                  reg_coords[a] + "'");
  }
  return w;
}

namespace detail {

/// Residual velocity dependence after the constraint Hamiltonians are
/// assembled must vanish; symbolically when the simplifier can see it,
/// numerically otherwise (in which case the symbol is pinned to 1).
inline ExprPtr strip_velocity_dependence(ExprPtr h, const std::vector<std::string>& velocities,
                                         const std::string& what, const ZeroTestOptions& zt) {
  for (const auto& v : velocities) {
    if (!contains_symbol(h, v)) continue;
    if (!is_identically_zero(differentiate(h, v), zt).is_zero())
      throw UnsupportedModelError("inconsistent degeneracy: " + what +
                                  " retains velocity dependence on " + v + ": " + to_string(h));
    h = simplify(substitute(h, {{v, Expr::integer(1)}}));
  }
  return h;
}

}  // namespace detail

/// Builds H_0, the degenerate-sector H_mu, and the primed generators
/// p_alpha + H_alpha from an inverted regular sector.
inline HJSystem build_hamiltonians(const LagrangianModel& m, const HessianAnalysis& split,
                                   const std::vector<ExprPtr>& w, const ZeroTestOptions& zt = {}) {
  HJSystem sys;
  sys.model = m;
  sys.split = split;
  sys.w = w;
  for (int a : split.regular) {
    sys.regular_coords.push_back(m.coordinates[static_cast<std::size_t>(a)]);
    sys.regular_momenta.push_back(
        LagrangianModel::momentum_name(m.coordinates[static_cast<std::size_t>(a)]));
  }
  for (int mu : split.degenerate)
    sys.degenerate_coords.push_back(m.coordinates[static_cast<std::size_t>(mu)]);

  sys.parameters.push_back(m.evolution);
  for (const auto& q : sys.degenerate_coords) sys.parameters.push_back(q);
  for (const auto& p : sys.parameters)
    sys.parameter_momenta.push_back(LagrangianModel::momentum_name(p));

  // Momentum symbols must be fresh.
  auto model_syms = symbols_of(m.lagrangian);
  for (const auto& c : m.coordinates) {
    model_syms.insert(c);
    model_syms.insert(LagrangianModel::velocity_name(c));
  }
  for (const auto& p : sys.parameter_momenta)
    if (model_syms.count(p))
      throw ModelError("momentum symbol '" + p + "' collides with a model symbol");
  for (const auto& p : sys.regular_momenta)
    if (model_syms.count(p))
      throw ModelError("momentum symbol '" + p + "' collides with a model symbol");

  const auto sub_map = detail::regular_velocity_substitution(sys.regular_coords, w);
  const auto all_vels = m.velocities();

  // H_mu = -dL/dv_mu with the regular velocities eliminated; must be free of
  // every velocity.
  std::vector<ExprPtr> h_mu;
  for (const auto& qmu : sys.degenerate_coords) {
    const ExprPtr pmu = differentiate(m.lagrangian, LagrangianModel::velocity_name(qmu));
    ExprPtr h = simplify(neg(substitute(pmu, sub_map)));
    h = detail::strip_velocity_dependence(h, all_vels, "H_" + qmu, zt);
    h_mu.push_back(h);
  }

  // H_0 = p_a w_a + sum_mu p_mu v_mu |_{p_mu = -H_mu} - L|_{v_a = w_a}.
  ExprPtr h0 = neg(substitute(m.lagrangian, sub_map));
  for (std::size_t a = 0; a < sys.regular_coords.size(); ++a)
    h0 = add(h0, mul(sym(sys.regular_momenta[a]), w[a]));
  for (std::size_t k = 0; k < sys.degenerate_coords.size(); ++k)
    h0 = add(h0, mul(neg(h_mu[k]), sym(LagrangianModel::velocity_name(sys.degenerate_coords[k]))));
  h0 = detail::strip_velocity_dependence(simplify(h0), all_vels, "H_0", zt);

  sys.hamiltonians.push_back(h0);
  for (auto& h : h_mu) sys.hamiltonians.push_back(std::move(h));
  for (std::size_t k = 0; k < sys.parameters.size(); ++k)
    sys.primed.push_back(simplify(add(sym(sys.parameter_momenta[k]), sys.hamiltonians[k])));
  return sys;
}

inline HJSystem build_hj_system(const LagrangianModel& m, const RankOptions& ropt = {},
                                const ZeroTestOptions& zt = {}) {
  const HessianAnalysis split = analyze_hessian(m, ropt);
  return build_hamiltonians(m, split, legendre_invert(m, split, zt), zt);
}

// ---------------------------------------------------------------------------

/// Coefficients A such that dx = sum_alpha A[x][alpha] dt_alpha for the state
/// x in (q_a..., p_a..., p_beta..., z).
struct TotalDifferentialSystem {
  HJSystem sys;
  std::vector<std::string> state;               // z last
  std::vector<std::vector<ExprPtr>> coeff;      // [state][parameter]
  std::size_t z_index() const { return state.size() - 1; }
};

inline TotalDifferentialSystem total_differential_system(const HJSystem& sys) {
  TotalDifferentialSystem tds;
  tds.sys = sys;
  const std::size_t np = sys.parameters.size();
  for (const auto& q : sys.regular_coords) tds.state.push_back(q);
  for (const auto& p : sys.regular_momenta) tds.state.push_back(p);
  for (const auto& p : sys.parameter_momenta) tds.state.push_back(p);
  tds.state.push_back("z");
  tds.coeff.assign(tds.state.size(), std::vector<ExprPtr>(np));

  std::size_t row = 0;
  for (std::size_t a = 0; a < sys.regular_coords.size(); ++a, ++row)
    for (std::size_t al = 0; al < np; ++al)
      tds.coeff[row][al] = simplify(differentiate(sys.primed[al], sys.regular_momenta[a]));
  for (std::size_t a = 0; a < sys.regular_coords.size(); ++a, ++row)
    for (std::size_t al = 0; al < np; ++al)
      tds.coeff[row][al] = simplify(neg(differentiate(sys.primed[al], sys.regular_coords[a])));
  for (std::size_t b = 0; b < np; ++b, ++row)
    for (std::size_t al = 0; al < np; ++al)
      tds.coeff[row][al] = simplify(neg(differentiate(sys.primed[al], sys.parameters[b])));
  for (std::size_t al = 0; al < np; ++al) {
    ExprPtr dz = neg(sys.hamiltonians[al]);
    for (std::size_t a = 0; a < sys.regular_coords.size(); ++a)
      dz = add(dz, mul(sym(sys.regular_momenta[a]),
                       differentiate(sys.primed[al], sys.regular_momenta[a])));
    tds.coeff[row][al] = simplify(dz);
  }
  return tds;
}

/// Total variation of a phase-space expression along the system: the
/// coefficient of dt_beta with dq, dp eliminated through the coefficients.
inline std::vector<ExprPtr> variation_coefficients(const ExprPtr& g,
                                                   const TotalDifferentialSystem& tds) {
  const auto& sys = tds.sys;
  const std::size_t np = sys.parameters.size();
  std::vector<ExprPtr> out(np);
  for (std::size_t beta = 0; beta < np; ++beta) {
    ExprPtr c = differentiate(g, sys.parameters[beta]);
    for (std::size_t xi = 0; xi + 1 < tds.state.size(); ++xi) {  // z never appears in g
      const ExprPtr dg = differentiate(g, tds.state[xi]);
      if (dg->is_zero_constant() || tds.coeff[xi][beta]->is_zero_constant()) continue;
      c = add(c, mul(dg, tds.coeff[xi][beta]));
    }
    out[beta] = simplify(c);
  }
  return out;
}

// ---------------------------------------------------------------------------

/// Outcome of the integrability loop.
struct IntegrabilityReport {
  enum class Status { Closed, ReducedConfigurationSpace, CapExceeded };

  struct Emitted {
    ExprPtr expr;
    std::string origin;  // generator whose variation produced it
    int round = 0;
    bool momentum_linear = false;
  };

  Status status = Status::Closed;
  int rounds = 0;
  std::vector<Emitted> constraints;
  std::vector<ExprPtr> surviving;  // unresolved variations at the cap

  bool closed() const { return status == Status::Closed && constraints.empty(); }
};

struct IntegrabilityOptions {
  int max_iterations = 5;
  ZeroTestOptions zero_test;
};

namespace detail {

inline bool momentum_linear(const ExprPtr& e, const std::vector<std::string>& momenta,
                            const ZeroTestOptions& zt) {
  bool has_momentum = false;
  for (const auto& p : momenta) {
    if (!contains_symbol(e, p)) continue;
    has_momentum = true;
    const ExprPtr second = simplify(differentiate(e, p));
    for (const auto& p2 : momenta)
      if (contains_symbol(second, p2) &&
          !is_identically_zero(differentiate(second, p2), zt).is_zero())
        return false;
  }
  return has_momentum;
}

}  // namespace detail

/// Tests dH'_alpha = 0 along the total differential system; non-vanishing
/// coefficients become new constraints. Momentum-linear constraints are
/// adjoined as generators and re-tested; purely configurational ones end the
/// loop with a reduced-configuration-space verdict.
inline IntegrabilityReport integrability_report(const TotalDifferentialSystem& tds,
                                                const IntegrabilityOptions& opt = {}) {
  IntegrabilityReport rep;
  const auto& sys = tds.sys;
  std::vector<std::string> all_momenta = sys.regular_momenta;
  for (const auto& p : sys.parameter_momenta) all_momenta.push_back(p);

  struct Gen {
    ExprPtr expr;
    std::string name;
  };
  std::vector<Gen> queue;
  for (std::size_t k = 0; k < sys.primed.size(); ++k)
    queue.push_back({sys.primed[k], "H'_" + sys.parameters[k]});
  std::vector<ExprPtr> known;  // emitted constraints, for dedup

  auto already_known = [&](const ExprPtr& c) {
    for (const auto& k : known)
      if (is_identically_zero(simplify(sub(c, k)), opt.zero_test).is_zero() ||
          is_identically_zero(simplify(add(c, k)), opt.zero_test).is_zero())
        return true;
    return false;
  };

  while (!queue.empty()) {
    if (rep.rounds >= opt.max_iterations) {
      rep.status = IntegrabilityReport::Status::CapExceeded;
      for (const auto& g : queue) rep.surviving.push_back(g.expr);
      return rep;
    }
    ++rep.rounds;
    std::vector<Gen> next;
    for (const auto& g : queue) {
      const auto coeffs = variation_coefficients(g.expr, tds);
      for (std::size_t beta = 0; beta < coeffs.size(); ++beta) {
        const ExprPtr& c = coeffs[beta];
        if (c->is_zero_constant()) continue;
        if (is_identically_zero(c, opt.zero_test).is_zero()) continue;
        if (already_known(c)) continue;
        known.push_back(c);
        IntegrabilityReport::Emitted em;
        em.expr = c;
        em.origin = "d" + g.name + " along d" + sys.parameters[beta];
        em.round = rep.rounds;
        em.momentum_linear = detail::momentum_linear(c, all_momenta, opt.zero_test);
        rep.constraints.push_back(em);
        if (em.momentum_linear) {
          next.push_back({c, "C" + std::to_string(rep.constraints.size())});
        } else {
          rep.status = IntegrabilityReport::Status::ReducedConfigurationSpace;
          return rep;
        }
      }
    }
    queue = std::move(next);
    if (queue.empty()) rep.status = IntegrabilityReport::Status::Closed;
  }
  // Loop ran at least once and emitted only re-testable constraints that
  // then closed.
  if (rep.rounds > 0 && rep.status == IntegrabilityReport::Status::Closed && rep.constraints.empty())
    rep.rounds -= 1;  // report "closed at round 0" when the first pass was already clean
  return rep;
}

// ---------------------------------------------------------------------------

/// Piecewise-linear map s -> t_alpha(s) driving an integration.
struct ParameterPath {
  std::vector<double> breakpoints;               // strictly increasing, starts at 0
  std::vector<std::vector<double>> values;       // [breakpoint][parameter]

  static ParameterPath linear(std::vector<double> start, std::vector<double> rates, double length) {
    ParameterPath p;
    p.breakpoints = {0.0, length};
    std::vector<double> end(start.size());
    for (std::size_t i = 0; i < start.size(); ++i) end[i] = start[i] + rates[i] * length;
    p.values = {std::move(start), std::move(end)};
    return p;
  }

  double length() const { return breakpoints.back(); }

  void eval(double s, std::vector<double>& t, std::vector<double>& rate) const {
    std::size_t seg = breakpoints.size() - 1;
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
      if (s <= breakpoints[i]) {
        seg = i;
        break;
      }
    if (seg == 0) seg = 1;
    const double s0 = breakpoints[seg - 1], s1 = breakpoints[seg];
    const double f = s1 > s0 ? (s - s0) / (s1 - s0) : 0.0;
    const std::size_t np = values[0].size();
    t.resize(np);
    rate.resize(np);
    for (std::size_t k = 0; k < np; ++k) {
      t[k] = values[seg - 1][k] + f * (values[seg][k] - values[seg - 1][k]);
      rate[k] = s1 > s0 ? (values[seg][k] - values[seg - 1][k]) / (s1 - s0) : 0.0;
    }
  }
};

/// Sampled integration result; columns are s, the parameters, then the state.
struct Trajectory {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> samples;
  double step = 0.0;
  std::string integrator = "rk4";
  bool truncated = false;
  std::string failure;

  int column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i);
    return -1;
  }
};

/// t_0 = s starting from its initial value; every other parameter frozen.
inline ParameterPath default_path(const TotalDifferentialSystem& tds, const Binding& initial,
                                  double length) {
  std::vector<double> start, rates;
  for (std::size_t k = 0; k < tds.sys.parameters.size(); ++k) {
    auto it = initial.find(tds.sys.parameters[k]);
    start.push_back(it == initial.end() ? 0.0 : it->second);
    rates.push_back(k == 0 ? 1.0 : 0.0);
  }
  return ParameterPath::linear(std::move(start), std::move(rates), length);
}

/// Classic fixed-step RK4 on dx/ds = sum_alpha A[x][alpha] dt_alpha/ds.
/// The action accumulator z starts at initial["z"] (default 0). A non-finite
/// state truncates the trajectory and sets the failure flag.
inline Trajectory integrate(const TotalDifferentialSystem& tds, const Binding& initial,
                            const ParameterPath& path, double step) {
  if (step <= 0.0) throw ModelError("integration step must be positive");
  const auto& sys = tds.sys;
  const std::size_t np = sys.parameters.size();
  const std::size_t ns = tds.state.size();

  std::vector<std::string> env_names = sys.parameters;
  for (const auto& x : tds.state) env_names.push_back(x);
  const SymbolTable table(env_names);

  std::vector<std::vector<CompiledExpr>> prog(ns, std::vector<CompiledExpr>(np));
  std::vector<std::vector<bool>> live(ns, std::vector<bool>(np, false));
  for (std::size_t xi = 0; xi < ns; ++xi)
    for (std::size_t al = 0; al < np; ++al)
      if (!tds.coeff[xi][al]->is_zero_constant()) {
        prog[xi][al] = CompiledExpr::compile(tds.coeff[xi][al], table);
        live[xi][al] = true;
      }

  std::vector<double> x(ns, 0.0);
  for (std::size_t xi = 0; xi + 1 < ns; ++xi) {
    auto it = initial.find(tds.state[xi]);
    if (it == initial.end())
      throw ModelError("initial data missing value for '" + tds.state[xi] + "'");
    x[xi] = it->second;
  }
  if (auto it = initial.find("z"); it != initial.end()) x[ns - 1] = it->second;

  Trajectory traj;
  traj.step = step;
  traj.columns.push_back("s");
  for (const auto& p : sys.parameters) traj.columns.push_back(p);
  for (const auto& s : tds.state) traj.columns.push_back(s);

  std::vector<double> env(np + ns), t(np), rate(np), k(ns), acc(ns), xs(ns);
  auto derivative_at = [&](double s, const std::vector<double>& state, std::vector<double>& out) {
    path.eval(s, t, rate);
    for (std::size_t i = 0; i < np; ++i) env[i] = t[i];
    for (std::size_t i = 0; i < ns; ++i) env[np + i] = state[i];
    for (std::size_t xi = 0; xi < ns; ++xi) {
      double d = 0.0;
      for (std::size_t al = 0; al < np; ++al)
        if (live[xi][al] && rate[al] != 0.0) d += prog[xi][al].eval(env) * rate[al];
      out[xi] = d;
    }
  };

  auto record = [&](double s) {
    path.eval(s, t, rate);
    std::vector<double> row;
    row.reserve(1 + np + ns);
    row.push_back(s);
    for (double v : t) row.push_back(v);
    for (double v : x) row.push_back(v);
    traj.samples.push_back(std::move(row));
  };

  const double S = path.length();
  record(0.0);
  if (S <= 0.0) return traj;

  double s = 0.0;
  while (s < S - 1e-15 * std::max(1.0, S)) {
    const double h = std::min(step, S - s);
    try {
      derivative_at(s, x, k);
      for (std::size_t i = 0; i < ns; ++i) {
        acc[i] = k[i];
        xs[i] = x[i] + 0.5 * h * k[i];
      }
      derivative_at(s + 0.5 * h, xs, k);
      for (std::size_t i = 0; i < ns; ++i) {
        acc[i] += 2.0 * k[i];
        xs[i] = x[i] + 0.5 * h * k[i];
      }
      derivative_at(s + 0.5 * h, xs, k);
      for (std::size_t i = 0; i < ns; ++i) {
        acc[i] += 2.0 * k[i];
        xs[i] = x[i] + h * k[i];
      }
      derivative_at(s + h, xs, k);
    } catch (const EvalError& err) {
      traj.truncated = true;
      traj.failure = std::string(err.what()) + " at s = " + std::to_string(s);
      return traj;
    }
    bool finite = true;
    for (std::size_t i = 0; i < ns; ++i) {
      x[i] += h / 6.0 * (acc[i] + k[i]);
      if (!std::isfinite(x[i])) finite = false;
    }
    if (!finite) {
      traj.truncated = true;
      traj.failure = "non-finite state at s = " + std::to_string(s + h);
      return traj;
    }
    s += h;
    record(s);
  }
  return traj;
}

/// Evaluates a phase-space expression at every sample of a trajectory.
inline std::vector<double> trajectory_values(const TotalDifferentialSystem& tds,
                                             const Trajectory& traj, const ExprPtr& e) {
  std::vector<std::string> env_names = tds.sys.parameters;
  for (const auto& s : tds.state) env_names.push_back(s);
  const SymbolTable table(env_names);
  const CompiledExpr prog = CompiledExpr::compile(e, table);
  std::vector<double> env(env_names.size()), out;
  out.reserve(traj.samples.size());
  for (const auto& row : traj.samples) {
    for (std::size_t k = 1; k < row.size(); ++k) env[k - 1] = row[k];
    out.push_back(prog.eval(env));
  }
  return out;
}

inline double trajectory_max_abs(const TotalDifferentialSystem& tds, const Trajectory& traj,
                                 const ExprPtr& e) {
  double m = 0.0;
  for (double v : trajectory_values(tds, traj, e)) m = std::max(m, std::abs(v));
  return m;
}

inline double trajectory_drift(const TotalDifferentialSystem& tds, const Trajectory& traj,
                               const ExprPtr& e) {
  const auto vals = trajectory_values(tds, traj, e);
  double m = 0.0;
  for (double v : vals) m = std::max(m, std::abs(v - vals.front()));
  return m;
}

/// Max |column(s) - column(0)| over the samples.
inline double column_drift(const Trajectory& traj, const std::string& name) {
  const int idx = traj.column_index(name);
  if (idx < 0 || traj.samples.empty()) return 0.0;
  const double v0 = traj.samples.front()[static_cast<std::size_t>(idx)];
  double m = 0.0;
  for (const auto& row : traj.samples)
    m = std::max(m, std::abs(row[static_cast<std::size_t>(idx)] - v0));
  return m;
}

/// CSV export: header then one row per step, 17 significant digits.
inline void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  for (std::size_t i = 0; i < traj.columns.size(); ++i) {
    if (i) os << ',';
    os << traj.columns[i];
  }
  os << '\n';
  char buf[40];
  for (const auto& row : traj.samples) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace hjdyn
