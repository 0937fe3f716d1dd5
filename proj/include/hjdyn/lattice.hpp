// 1+1 dimensional scalar field on a periodic spatial lattice: central
// difference discretization to a finite-dof Lagrangian, canonical evolution,
// and the reparametrization equivalence check for field systems.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hjdyn/reparam.hpp"

namespace hjdyn {

/// Lagrangian density in (phi, dphi_x, dphi_t) on N periodic sites with
/// spacing dx (default 1/N, a unit circle).
struct LatticeFieldModel {
  std::string name;
  int sites = 0;
  Number spacing;
  ExprPtr density;

  static constexpr const char* kField = "phi";
  static constexpr const char* kGradient = "dphi_x";
  static constexpr const char* kVelocity = "dphi_t";

  std::string site_coord(int i) const { return std::string(kField) + "_" + std::to_string(i); }
};

inline void validate_lattice(const LatticeFieldModel& f) {
  if (f.sites < 4) throw ModelError("lattice needs at least 4 sites");
  if (!(f.spacing.to_double() > 0.0)) throw ModelError("lattice spacing must be positive");
  if (!f.density) throw ModelError("lattice model has no density");
  for (const auto& s : symbols_of(f.density))
    if (s != LatticeFieldModel::kField && s != LatticeFieldModel::kGradient &&
        s != LatticeFieldModel::kVelocity)
      throw ModelError("density may only reference phi, dphi_x, dphi_t; found '" + s + "'");
}

/// Field values and conjugate momenta on the lattice.
struct LatticeState {
  std::vector<double> phi;
  std::vector<double> pi;
  double time = 0.0;
};

/// Riemann sum of the density with central-difference gradients and periodic
/// wrap: L = sum_i dx * density(phi_i, (phi_{i+1}-phi_{i-1})/(2 dx), v_phi_i).
/// The result is an ordinary Lagrangian model with one coordinate per site.
inline LagrangianModel discretize(const LatticeFieldModel& f) {
  validate_lattice(f);
  const int n = f.sites;
  LagrangianModel m;
  m.name = f.name.empty() ? "lattice" : f.name;
  m.evolution = "t";
  for (int i = 0; i < n; ++i) m.coordinates.push_back(f.site_coord(i));

  const ExprPtr dx = Expr::constant(f.spacing);
  ExprPtr total;
  for (int i = 0; i < n; ++i) {
    const int prev = (i + n - 1) % n, next = (i + 1) % n;
    std::map<std::string, ExprPtr> subst;
    subst[LatticeFieldModel::kField] = sym(f.site_coord(i));
    subst[LatticeFieldModel::kGradient] =
        div(sub(sym(f.site_coord(next)), sym(f.site_coord(prev))), mul(Expr::integer(2), dx));
    subst[LatticeFieldModel::kVelocity] = sym(LagrangianModel::velocity_name(f.site_coord(i)));
    const ExprPtr site = mul(dx, substitute(f.density, subst));
    total = total ? add(total, site) : site;
  }
  m.lagrangian = simplify(total);
  validate_model(m);
  return m;
}

/// Canonical evolution of the discretized field: a trajectory of the
/// Hamilton equations generated by H_0, sampled every step.
inline Trajectory canonical_field_evolution(const LagrangianModel& discretized,
                                            const LatticeFieldModel& f, const LatticeState& s0,
                                            double horizon, double step,
                                            const RankOptions& ropt = {},
                                            const ZeroTestOptions& zt = {}) {
  if (s0.phi.size() != static_cast<std::size_t>(f.sites) ||
      s0.pi.size() != static_cast<std::size_t>(f.sites))
    throw ModelError("lattice state size does not match the site count");
  const HJSystem sys = build_hj_system(discretized, ropt, zt);
  if (!sys.degenerate_coords.empty())
    throw UnsupportedModelError("canonical field evolution expects a regular density");
  const TotalDifferentialSystem tds = total_differential_system(sys);

  Binding init;
  Binding phase;
  for (int i = 0; i < f.sites; ++i) {
    init[f.site_coord(i)] = s0.phi[static_cast<std::size_t>(i)];
    init[LagrangianModel::momentum_name(f.site_coord(i))] = s0.pi[static_cast<std::size_t>(i)];
    phase[f.site_coord(i)] = s0.phi[static_cast<std::size_t>(i)];
    phase[LagrangianModel::momentum_name(f.site_coord(i))] = s0.pi[static_cast<std::size_t>(i)];
  }
  phase[discretized.evolution] = s0.time;
  init[LagrangianModel::momentum_name(discretized.evolution)] =
      -evaluate(sys.hamiltonians[0], phase);
  init["z"] = 0.0;

  const ParameterPath path = ParameterPath::linear({s0.time}, {1.0}, horizon);
  return integrate(tds, init, path, step);
}

/// phi_i = amplitude * cos(2 pi mode i / N), pi = 0.
inline LatticeState standing_wave_state(const LatticeFieldModel& f, int mode, double amplitude) {
  LatticeState s;
  s.phi.resize(static_cast<std::size_t>(f.sites));
  s.pi.assign(static_cast<std::size_t>(f.sites), 0.0);
  for (int i = 0; i < f.sites; ++i)
    s.phi[static_cast<std::size_t>(i)] =
        amplitude * std::cos(2.0 * M_PI * mode * i / static_cast<double>(f.sites));
  return s;
}

/// Velocities recovered from momenta through the inverted regular sector.
inline std::vector<double> lattice_velocities(const LagrangianModel& discretized,
                                              const LatticeFieldModel& f, const LatticeState& s0,
                                              const ZeroTestOptions& zt = {}) {
  HessianAnalysis all_regular = velocity_hessian(discretized);
  all_regular.rank = static_cast<int>(discretized.dof());
  all_regular.deficiency = 0;
  for (std::size_t i = 0; i < discretized.dof(); ++i)
    all_regular.regular.push_back(static_cast<int>(i));
  const std::vector<ExprPtr> w = legendre_invert(discretized, all_regular, zt);
  Binding b;
  for (int i = 0; i < f.sites; ++i) {
    b[f.site_coord(i)] = s0.phi[static_cast<std::size_t>(i)];
    b[LagrangianModel::momentum_name(f.site_coord(i))] = s0.pi[static_cast<std::size_t>(i)];
  }
  b[discretized.evolution] = s0.time;
  std::vector<double> v(discretized.dof());
  for (std::size_t i = 0; i < w.size(); ++i) v[i] = evaluate(w[i], b);
  return v;
}

/// The field-system equivalence claim at desk scale: reparametrize the
/// discretized model and compare the canonical route against the
/// Euler-Lagrange route.
inline EquivalenceReport reparam_field_equivalence(const LatticeFieldModel& f,
                                                   const LatticeState& s0, double horizon,
                                                   double step, const RankOptions& ropt = {},
                                                   const ZeroTestOptions& zt = {},
                                                   double tolerance = 1e-6) {
  const LagrangianModel m = discretize(f);
  const std::vector<double> v = lattice_velocities(m, f, s0, zt);
  Binding initial;
  for (int i = 0; i < f.sites; ++i) {
    initial[f.site_coord(i)] = s0.phi[static_cast<std::size_t>(i)];
    initial[LagrangianModel::velocity_name(f.site_coord(i))] = v[static_cast<std::size_t>(i)];
  }
  const ReparamPair pair = parametrize(m, ropt);
  return verify_equivalence(pair, initial, horizon, step, zt, tolerance);
}

/// Snapshot CSV: time, phi_0..phi_{N-1}, pi_0..pi_{N-1}, one row per sample.
inline void write_state_csv(const Trajectory& traj, const LatticeFieldModel& f,
                            const std::string& time_column, std::ostream& os) {
  std::vector<int> phi_idx, pi_idx;
  for (int i = 0; i < f.sites; ++i) {
    phi_idx.push_back(traj.column_index(f.site_coord(i)));
    pi_idx.push_back(traj.column_index(LagrangianModel::momentum_name(f.site_coord(i))));
  }
  const int t_idx = traj.column_index(time_column);
  os << "time";
  for (int i = 0; i < f.sites; ++i) os << ",phi_" << i;
  for (int i = 0; i < f.sites; ++i) os << ",pi_" << i;
  os << '\n';
  char buf[40];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (const auto& row : traj.samples) {
    emit(row[static_cast<std::size_t>(t_idx)]);
    for (int i = 0; i < f.sites; ++i) {
      os << ',';
      emit(row[static_cast<std::size_t>(phi_idx[static_cast<std::size_t>(i)])]);
    }
    for (int i = 0; i < f.sites; ++i) {
      os << ',';
      emit(row[static_cast<std::size_t>(pi_idx[static_cast<std::size_t>(i)])]);
    }
    os << '\n';
  }
}

}  // namespace hjdyn
