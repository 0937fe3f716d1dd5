#include <catch2/catch.hpp>

#include "hjdyn/lattice.hpp"
#include "oracles.hpp"

using namespace hjdyn;

namespace {

LatticeFieldModel make_lattice(const std::string& density, int n) {
  LatticeFieldModel f;
  f.name = "lat";
  f.sites = n;
  f.spacing = Number(Rational(1, n));
  f.density = parse_expression(density);
  validate_lattice(f);
  return f;
}

bool expr_eq(const ExprPtr& a, const std::string& b) {
  return structurally_equal(simplify(a), simplify(parse_expression(b)));
}

/// Oracle: the test's own central-difference force. The action's gradient
/// term couples sites two apart, so the discrete wave operator is
/// (phi_{i+2} - 2 phi_i + phi_{i-2}) / (4 dx^2).
std::vector<double> stencil_force(const std::vector<double>& phi, double dx) {
  const int n = static_cast<int>(phi.size());
  std::vector<double> out(phi.size());
  for (int i = 0; i < n; ++i) {
    const double pp = phi[static_cast<std::size_t>((i + 2) % n)];
    const double mm = phi[static_cast<std::size_t>((i + n - 2) % n)];
    out[static_cast<std::size_t>(i)] =
        (pp - 2.0 * phi[static_cast<std::size_t>(i)] + mm) / (4.0 * dx * dx);
  }
  return out;
}

}  // namespace

TEST_CASE("discretize produces an ordinary Lagrangian model") {
  SECTION("free density, N = 4: Hessian is dx times the identity") {
    const LatticeFieldModel f = make_lattice("0.5*dphi_t^2 - 0.5*dphi_x^2", 4);
    const LagrangianModel m = discretize(f);
    CHECK(m.coordinates ==
          std::vector<std::string>{"phi_0", "phi_1", "phi_2", "phi_3"});
    const HessianAnalysis h = analyze_hessian(m);
    CHECK(h.rank == 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        CHECK(expr_eq(h.hessian[i][j], i == j ? "1/4" : "0"));
  }
  SECTION("three sites are rejected") {
    LatticeFieldModel f;
    f.name = "tiny";
    f.sites = 3;
    f.spacing = Number(Rational(1, 3));
    f.density = parse_expression("0.5*dphi_t^2");
    CHECK_THROWS_AS(validate_lattice(f), ModelError);
  }
  SECTION("constant density has rank zero") {
    const LatticeFieldModel f = make_lattice("2", 4);
    const LagrangianModel m = discretize(f);
    CHECK(expr_eq(m.lagrangian, "2"));
    CHECK(analyze_hessian(m).rank == 0);
  }
  SECTION("stray density symbols are rejected") {
    LatticeFieldModel f;
    f.name = "bad";
    f.sites = 8;
    f.spacing = Number(Rational(1, 8));
    f.density = parse_expression("0.5*dphi_t^2 - psi");
    CHECK_THROWS_AS(validate_lattice(f), ModelError);
  }
}

TEST_CASE("canonical evolution matches the lattice dispersion") {
  const int n = 32;
  const LatticeFieldModel f = make_lattice("0.5*dphi_t^2 - 0.5*dphi_x^2", n);
  const LagrangianModel m = discretize(f);
  const double dx = f.spacing.to_double();
  const LatticeState s0 = standing_wave_state(f, 1, 1.0);

  // Frequency oracle: plug the plane wave into the test-side stencil and
  // read off the eigenvalue.
  const std::vector<double> force = stencil_force(s0.phi, dx);
  const double omega2 = -force[1] / s0.phi[1];
  REQUIRE(omega2 > 0.0);
  const double omega = std::sqrt(omega2);
  // Sanity: the eigenvalue is the closed form of the stride-2 operator.
  CHECK(omega == Approx(std::sin(2.0 * M_PI / n) / dx).epsilon(1e-12));

  const double period = 2.0 * M_PI / omega;
  const Trajectory traj = canonical_field_evolution(m, f, s0, period, 1e-3);
  REQUIRE_FALSE(traj.truncated);

  // phi_i(t) = cos(k x_i) cos(omega t) pointwise over the whole period.
  double max_err = 0.0;
  std::vector<int> phi_idx;
  for (int i = 0; i < n; ++i) phi_idx.push_back(traj.column_index(f.site_coord(i)));
  for (std::size_t r = 0; r < traj.samples.size(); r += 50) {
    const double t = traj.samples[r][0];
    for (int i = 0; i < n; ++i) {
      const double expected = s0.phi[static_cast<std::size_t>(i)] * std::cos(omega * t);
      const double got =
          traj.samples[r][static_cast<std::size_t>(phi_idx[static_cast<std::size_t>(i)])];
      max_err = std::max(max_err, std::abs(got - expected));
    }
  }
  CHECK(max_err <= 1e-5);
  // Amplitude recurrence at t = period.
  const auto& last = traj.samples.back();
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(last[static_cast<std::size_t>(phi_idx[static_cast<std::size_t>(i)])] -
                   s0.phi[static_cast<std::size_t>(i)]) <= 1e-5);
}

TEST_CASE("zero initial data stays zero") {
  const LatticeFieldModel f = make_lattice("0.5*dphi_t^2 - 0.5*dphi_x^2", 8);
  const LagrangianModel m = discretize(f);
  LatticeState s0;
  s0.phi.assign(8, 0.0);
  s0.pi.assign(8, 0.0);
  const Trajectory traj = canonical_field_evolution(m, f, s0, 0.5, 1e-3);
  for (const auto& row : traj.samples)
    for (int i = 0; i < 8; ++i) {
      CHECK(row[static_cast<std::size_t>(traj.column_index(f.site_coord(i)))] == 0.0);
      CHECK(row[static_cast<std::size_t>(
                traj.column_index(LagrangianModel::momentum_name(f.site_coord(i))))] == 0.0);
    }
}

TEST_CASE("potential-only density decouples into per-site oscillators") {
  const int n = 4;
  const LatticeFieldModel f = make_lattice("0.5*dphi_t^2 - 0.5*phi^2", n);
  const LagrangianModel m = discretize(f);
  LatticeState s0;
  s0.phi = {0.8, -0.3, 0.5, 0.1};
  s0.pi.assign(4, 0.0);
  const Trajectory traj = canonical_field_evolution(m, f, s0, 1.0, 1e-3);

  // Reference: the 1-dof oscillator through the same machinery.
  const HJSystem osc = build_hj_system(oracles::corpus_model("harmonic_oscillator"));
  const TotalDifferentialSystem tosc = total_differential_system(osc);
  for (int i = 0; i < n; ++i) {
    Binding init{{"q", s0.phi[static_cast<std::size_t>(i)]},
                 {"p_q", 0.0},
                 {"p_t", 0.0},
                 {"z", 0.0}};
    Binding phase{{"q", s0.phi[static_cast<std::size_t>(i)]}, {"p_q", 0.0}, {"t", 0.0}};
    init["p_t"] = -evaluate(osc.hamiltonians[0], phase);
    const Trajectory ref =
        integrate(tosc, init, ParameterPath::linear({0.0}, {1.0}, 1.0), 1e-3);
    const int qi = ref.column_index("q");
    const int fi = traj.column_index(f.site_coord(i));
    REQUIRE(ref.samples.size() == traj.samples.size());
    for (std::size_t r = 0; r < ref.samples.size(); r += 100)
      CHECK(std::abs(ref.samples[r][static_cast<std::size_t>(qi)] -
                     traj.samples[r][static_cast<std::size_t>(fi)]) <= 1e-12);
  }
}

TEST_CASE("conserved quantities along the canonical lattice flow") {
  const int n = 32;
  const LatticeFieldModel f = make_lattice("0.5*dphi_t^2 - 0.5*dphi_x^2", n);
  const LagrangianModel m = discretize(f);
  const LatticeState s0 = standing_wave_state(f, 1, 1.0);
  const HJSystem sys = build_hj_system(m);
  const TotalDifferentialSystem tds = total_differential_system(sys);
  const Trajectory traj = canonical_field_evolution(m, f, s0, 1.0, 1e-3);

  SECTION("H_0 drift stays below 1e-7") {
    CHECK(trajectory_drift(tds, traj, sys.hamiltonians[0]) <= 1e-7);
  }
  SECTION("lattice translation generator is conserved") {
    ExprPtr gen;
    for (int i = 0; i < n; ++i) {
      const ExprPtr term =
          mul(sym(LagrangianModel::momentum_name(f.site_coord(i))),
              div(sub(sym(f.site_coord((i + 1) % n)), sym(f.site_coord((i + n - 1) % n))),
                  Expr::integer(2)));
      gen = gen ? add(gen, term) : term;
    }
    CHECK(trajectory_drift(tds, traj, simplify(gen)) <= 1e-7);
  }
}

TEST_CASE("reparametrized field equivalence") {
  SECTION("free field, N = 32, unit horizon") {
    const LatticeFieldModel f = make_lattice("0.5*dphi_t^2 - 0.5*dphi_x^2", 32);
    const EquivalenceReport rep =
        reparam_field_equivalence(f, standing_wave_state(f, 1, 1.0), 1.0, 1e-3);
    CHECK(rep.max_dev_q <= 1e-6);
    CHECK(rep.max_dev_p <= 1e-6);
    CHECK(rep.pt_drift <= 1e-9);
    CHECK(rep.equivalent);
  }
  SECTION("zero data gives zero deviation") {
    const LatticeFieldModel f = make_lattice("0.5*dphi_t^2 - 0.5*dphi_x^2", 8);
    LatticeState s0;
    s0.phi.assign(8, 0.0);
    s0.pi.assign(8, 0.0);
    const EquivalenceReport rep = reparam_field_equivalence(f, s0, 0.5, 1e-3);
    CHECK(rep.max_dev_q == 0.0);
    CHECK(rep.max_dev_p == 0.0);
  }
  SECTION("phi^4 density, N = 8") {
    const LatticeFieldModel f =
        make_lattice("0.5*dphi_t^2 - 0.5*dphi_x^2 - 0.25*phi^4", 8);
    const EquivalenceReport rep =
        reparam_field_equivalence(f, standing_wave_state(f, 1, 0.5), 0.5, 1e-3);
    CHECK(rep.max_dev_q <= 1e-6);
    CHECK(rep.max_dev_p <= 1e-6);
    CHECK(rep.pt_drift <= 1e-9);
  }
}

TEST_CASE("state size must match the site count") {
  const LatticeFieldModel f = make_lattice("0.5*dphi_t^2 - 0.5*dphi_x^2", 8);
  const LagrangianModel m = discretize(f);
  LatticeState s0;
  s0.phi.assign(4, 0.0);
  s0.pi.assign(4, 0.0);
  CHECK_THROWS_AS(canonical_field_evolution(m, f, s0, 0.1, 1e-3), ModelError);
}

TEST_CASE("state snapshots round numbers at 17 significant digits") {
  const LatticeFieldModel f = make_lattice("0.5*dphi_t^2 - 0.5*dphi_x^2", 4);
  const LagrangianModel m = discretize(f);
  LatticeState s0;
  s0.phi = {1.0 / 3.0, 0.0, 0.0, 0.0};
  s0.pi.assign(4, 0.0);
  const Trajectory traj = canonical_field_evolution(m, f, s0, 0.01, 1e-2);
  std::ostringstream os;
  write_state_csv(traj, f, m.evolution, os);
  const std::string text = os.str();
  CHECK(text.rfind("time,phi_0,phi_1,phi_2,phi_3,pi_0,pi_1,pi_2,pi_3\n", 0) == 0);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
}
