// Singular Lagrangians treated as field systems: regular coordinates become
// functions of every parameter, velocities expand through the chain rule
// into partial-velocity symbols, and the multi-time Euler-Lagrange residuals
// reduce back to the ordinary equations of motion.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "hjdyn/hj.hpp"

namespace hjdyn {

/// Field-system form of a singular model. Partial velocities are named
/// d<param>_<coord>; symmetric second partials dd<param>_<param>_<coord>
/// with the two parameters in parameter-list order.
struct FieldSystemModel {
  LagrangianModel base;                  // the singular model
  HessianAnalysis split;
  std::vector<std::string> parameters;   // [evolution, q_mu...]
  std::vector<std::string> promoted;     // regular coordinates q_a
  ExprPtr modified_lagrangian;           // L'
  std::vector<ExprPtr> constraints;      // G_alpha aligned with parameters

  static std::string partial_name(const std::string& param, const std::string& coord) {
    return "d" + param + "_" + coord;
  }
  std::string second_partial_name(std::size_t alpha, std::size_t beta,
                                  const std::string& coord) const {
    if (beta < alpha) std::swap(alpha, beta);
    return "dd" + parameters[alpha] + "_" + parameters[beta] + "_" + coord;
  }
};

/// Builds L' by expanding every regular velocity over all parameters and
/// G_alpha by substituting the momentum expressions back into H_alpha.
/// Requires Hessian deficiency >= 1.
inline FieldSystemModel promote_to_field(const HJSystem& sys) {
  if (sys.degenerate_coords.empty())
    throw ModelError("model '" + sys.model.name +
                     "' is regular; there is nothing to promote to a field system");
  FieldSystemModel f;
  f.base = sys.model;
  f.split = sys.split;
  f.parameters = sys.parameters;
  f.promoted = sys.regular_coords;

  std::map<std::string, ExprPtr> vel_sub;
  for (const auto& c : f.promoted) {
    // v_a -> d_t0 q_a + sum_mu d_qmu q_a * v_mu
    ExprPtr expansion = sym(FieldSystemModel::partial_name(f.parameters[0], c));
    for (std::size_t k = 1; k < f.parameters.size(); ++k)
      expansion = add(expansion,
                      mul(sym(FieldSystemModel::partial_name(f.parameters[k], c)),
                          sym(LagrangianModel::velocity_name(f.parameters[k]))));
    vel_sub[LagrangianModel::velocity_name(c)] = expansion;
  }
  f.modified_lagrangian = simplify(substitute(f.base.lagrangian, vel_sub));

  std::map<std::string, ExprPtr> mom_sub;
  for (const auto& c : f.promoted)
    mom_sub[LagrangianModel::momentum_name(c)] =
        differentiate(f.base.lagrangian, LagrangianModel::velocity_name(c));
  for (const auto& h : sys.hamiltonians)
    f.constraints.push_back(simplify(substitute(h, mom_sub)));
  return f;
}

inline FieldSystemModel promote_to_field(const LagrangianModel& m, const HessianAnalysis& split,
                                         const ZeroTestOptions& zt = {}) {
  return promote_to_field(build_hamiltonians(m, split, legendre_invert(m, split, zt), zt));
}

// ---------------------------------------------------------------------------

namespace detail {

/// Total derivative with respect to parameter alpha, treating the promoted
/// coordinates and their partials as fields of the parameters and the
/// degenerate velocities as externally prescribed.
inline ExprPtr field_total_derivative(const ExprPtr& g, const FieldSystemModel& f,
                                      std::size_t alpha) {
  ExprPtr acc = differentiate(g, f.parameters[alpha]);
  for (const auto& c : f.promoted) {
    const ExprPtr dq = differentiate(g, c);
    if (!dq->is_zero_constant())
      acc = add(acc, mul(dq, sym(FieldSystemModel::partial_name(f.parameters[alpha], c))));
    for (std::size_t beta = 0; beta < f.parameters.size(); ++beta) {
      const ExprPtr du = differentiate(g, FieldSystemModel::partial_name(f.parameters[beta], c));
      if (!du->is_zero_constant())
        acc = add(acc, mul(du, sym(f.second_partial_name(alpha, beta, c))));
    }
  }
  return acc;
}

}  // namespace detail

/// Multi-time Euler-Lagrange residuals, one per promoted coordinate:
/// sum_alpha d/dt_alpha [dL'/d(d_alpha q_a)] - dL'/dq_a.
inline std::vector<ExprPtr> field_euler_lagrange(const FieldSystemModel& f) {
  std::vector<ExprPtr> out;
  out.reserve(f.promoted.size());
  for (const auto& c : f.promoted) {
    ExprPtr res = neg(differentiate(f.modified_lagrangian, c));
    for (std::size_t alpha = 0; alpha < f.parameters.size(); ++alpha) {
      const ExprPtr p_alpha = differentiate(
          f.modified_lagrangian, FieldSystemModel::partial_name(f.parameters[alpha], c));
      res = add(res, detail::field_total_derivative(p_alpha, f, alpha));
    }
    out.push_back(simplify(res));
  }
  return out;
}

/// Imposes q_a = q_a(time): the partial along `time_param` becomes the
/// ordinary velocity, every other partial vanishes, and the diagonal second
/// partial becomes the acceleration symbol.
inline std::vector<ExprPtr> reduce_to_time(const FieldSystemModel& f,
                                           const std::string& time_param,
                                           const std::vector<ExprPtr>& residuals) {
  std::size_t t_pos = f.parameters.size();
  for (std::size_t k = 0; k < f.parameters.size(); ++k)
    if (f.parameters[k] == time_param) t_pos = k;
  if (t_pos == f.parameters.size())
    throw ModelError("'" + time_param + "' is not a parameter of the field system");

  std::map<std::string, ExprPtr> red;
  for (const auto& c : f.promoted) {
    for (std::size_t a = 0; a < f.parameters.size(); ++a) {
      red[FieldSystemModel::partial_name(f.parameters[a], c)] =
          a == t_pos ? sym(LagrangianModel::velocity_name(c)) : Expr::integer(0);
      for (std::size_t b = a; b < f.parameters.size(); ++b)
        red[f.second_partial_name(a, b, c)] =
            (a == t_pos && b == t_pos) ? sym(LagrangianModel::accel_name(c)) : Expr::integer(0);
    }
  }
  std::vector<ExprPtr> out;
  out.reserve(residuals.size());
  for (const auto& r : residuals) out.push_back(simplify(substitute(r, red)));
  return out;
}

// ---------------------------------------------------------------------------

/// One constraint's variation, with the field-side and canonical-side right
/// hand sides computed independently.
struct ConstraintVariation {
  std::string id;                       // G_<parameter>
  ExprPtr field_rhs;                    // -dL'/dt_alpha
  std::vector<ExprPtr> canonical_coefficients;  // dH_alpha along each dt_beta
  ZeroVerdict field_verdict;
  ZeroVerdict canonical_verdict;        // all coefficients zero?
  bool flagged = false;                 // non-vanishing variation
  Binding witness;
  double max_mismatch = 0.0;            // |field - canonical| over samples
  int compared_samples = 0;
};

struct ConstraintVariationReport {
  std::vector<ConstraintVariation> entries;
  // The field-side differentials balance the canonical variations along the
  // evolution parameter of the field system.
  std::string balanced_with;
  bool any_flagged = false;
};

namespace detail {

/// Samples the identity <canonical variation per unit evolution parameter>
/// == <field-side rhs> on the correspondence p_a = dL/dv_a with the chain
/// rule split of the velocities drawn at random.
inline void sample_variation_match(const FieldSystemModel& f, const TotalDifferentialSystem& tds,
                                   ConstraintVariation& entry, const ZeroTestOptions& zt) {
  const auto& sys = tds.sys;
  std::mt19937_64 rng(zt.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> wide(zt.low, zt.high);
  std::uniform_real_distribution<double> positive(0.5, 2.0);

  std::vector<ExprPtr> momenta;
  for (const auto& c : f.promoted)
    momenta.push_back(simplify(
        differentiate(f.base.lagrangian, LagrangianModel::velocity_name(c))));

  int accepted = 0, attempts = 0;
  while (accepted < zt.samples && attempts++ < zt.samples * zt.max_resamples_per_point) {
    Binding field_b;   // coordinates, partials, degenerate velocities, time
    Binding phase_b;   // coordinates, momenta, parameters
    field_b[f.parameters[0]] = wide(rng);
    phase_b[f.parameters[0]] = field_b[f.parameters[0]];
    for (std::size_t k = 1; k < f.parameters.size(); ++k) {
      const double qmu = positive(rng);
      const double vmu = positive(rng);
      field_b[f.parameters[k]] = qmu;
      phase_b[f.parameters[k]] = qmu;
      field_b[LagrangianModel::velocity_name(f.parameters[k])] = vmu;
    }
    Binding vel_b = field_b;
    for (const auto& c : f.promoted) {
      const double q = positive(rng);
      const double vdot = wide(rng);
      field_b[c] = q;
      phase_b[c] = q;
      vel_b[c] = q;
      vel_b[LagrangianModel::velocity_name(c)] = vdot;
      // Split v_a = u_0 + sum_mu u_mu v_mu with the last u solving the split.
      double rest = vdot;
      for (std::size_t k = 1; k + 1 < f.parameters.size(); ++k) {
        const double u = wide(rng);
        field_b[FieldSystemModel::partial_name(f.parameters[k], c)] = u;
        rest -= u * field_b[LagrangianModel::velocity_name(f.parameters[k])];
      }
      if (f.parameters.size() > 1) {
        const double u0 = wide(rng);
        field_b[FieldSystemModel::partial_name(f.parameters[0], c)] = u0;
        const std::size_t last = f.parameters.size() - 1;
        field_b[FieldSystemModel::partial_name(f.parameters[last], c)] =
            (rest - u0) / field_b[LagrangianModel::velocity_name(f.parameters[last])];
      } else {
        field_b[FieldSystemModel::partial_name(f.parameters[0], c)] = vdot;
      }
    }
    bool ok = true;
    for (std::size_t a = 0; a < f.promoted.size() && ok; ++a) {
      const EvalOutcome mo = evaluate_guarded(momenta[a], vel_b, zt.near_singular_threshold);
      if (mo.status != EvalStatus::Ok || mo.near_singular) {
        ok = false;
        break;
      }
      phase_b[LagrangianModel::momentum_name(f.promoted[a])] = mo.value;
    }
    if (!ok) continue;

    // Canonical side per unit evolution parameter: sum_beta C_beta dt_beta/ds
    // with dt_0/ds = 1 and dq_mu/ds = v_mu.
    double canon = 0.0;
    for (std::size_t beta = 0; beta < sys.parameters.size() && ok; ++beta) {
      const EvalOutcome co = evaluate_guarded(entry.canonical_coefficients[beta], phase_b,
                                              zt.near_singular_threshold);
      if (co.status != EvalStatus::Ok || co.near_singular) {
        ok = false;
        break;
      }
      const double rate =
          beta == 0 ? 1.0 : field_b[LagrangianModel::velocity_name(sys.parameters[beta])];
      canon += co.value * rate;
    }
    if (!ok) continue;
    const EvalOutcome fo = evaluate_guarded(entry.field_rhs, field_b, zt.near_singular_threshold);
    if (fo.status != EvalStatus::Ok || fo.near_singular) continue;
    ++accepted;
    entry.max_mismatch = std::max(entry.max_mismatch, std::abs(fo.value - canon));
  }
  entry.compared_samples = accepted;
}

}  // namespace detail

/// Computes the constraint variations dG_alpha both ways: the field-side
/// right hand sides -dL'/dt_alpha and the canonical total variations of
/// H_alpha along the total differential system, then checks numerically that
/// the two sides agree per unit of the evolution parameter. Non-vanishing
/// variations are flagged.
inline ConstraintVariationReport constraint_variations(const FieldSystemModel& f,
                                                       const TotalDifferentialSystem& tds,
                                                       const ZeroTestOptions& zt = {}) {
  const auto& sys = tds.sys;
  ConstraintVariationReport rep;
  rep.balanced_with = "d" + sys.parameters[0];
  for (std::size_t alpha = 0; alpha < sys.parameters.size(); ++alpha) {
    ConstraintVariation entry;
    entry.id = "G_" + sys.parameters[alpha];
    entry.field_rhs = simplify(neg(differentiate(f.modified_lagrangian, sys.parameters[alpha])));
    entry.canonical_coefficients = variation_coefficients(sys.hamiltonians[alpha], tds);

    const ZeroTestResult fz = is_identically_zero(entry.field_rhs, zt);
    entry.field_verdict = fz.verdict;
    entry.canonical_verdict = ZeroVerdict::SymbolicZero;
    for (const auto& c : entry.canonical_coefficients) {
      const ZeroTestResult cz = is_identically_zero(c, zt);
      if (cz.verdict == ZeroVerdict::Nonzero) {
        entry.canonical_verdict = ZeroVerdict::Nonzero;
        entry.witness = cz.witness;
        break;
      }
      if (cz.verdict == ZeroVerdict::NumericZero &&
          entry.canonical_verdict == ZeroVerdict::SymbolicZero)
        entry.canonical_verdict = ZeroVerdict::NumericZero;
    }
    entry.flagged = entry.field_verdict == ZeroVerdict::Nonzero ||
                    entry.canonical_verdict == ZeroVerdict::Nonzero;
    if (entry.flagged && entry.witness.empty()) entry.witness = fz.witness;
    detail::sample_variation_match(f, tds, entry, zt);
    rep.any_flagged = rep.any_flagged || entry.flagged;
    rep.entries.push_back(std::move(entry));
  }
  return rep;
}

}  // namespace hjdyn
