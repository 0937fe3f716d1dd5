#include <catch2/catch.hpp>

#include "hjdyn/hj.hpp"
#include "oracles.hpp"

using namespace hjdyn;

namespace {

LagrangianModel make_model(const std::string& name, std::vector<std::string> coords,
                           const std::string& lagrangian, const std::string& evolution = "") {
  LagrangianModel m;
  m.name = name;
  m.coordinates = std::move(coords);
  if (!evolution.empty())
    m.evolution = evolution;
  else if (std::find(m.coordinates.begin(), m.coordinates.end(), "t") != m.coordinates.end())
    m.evolution = "tau";
  m.lagrangian = parse_expression(lagrangian);
  validate_model(m);
  return m;
}

bool expr_eq(const ExprPtr& a, const std::string& b) {
  return structurally_equal(simplify(a), simplify(parse_expression(b)));
}

// The reparametrized free particle and oscillator, built directly.
LagrangianModel reparam_free_particle() {
  return make_model("rfp", {"q", "t"}, "v_q^2/(2*v_t)");
}
LagrangianModel reparam_oscillator() {
  return make_model("rosc", {"q", "t"}, "v_q^2/(2*v_t) - 0.5*v_t*q^2");
}

}  // namespace

TEST_CASE("legendre_invert solves the regular momentum relations") {
  SECTION("oscillator: w = p") {
    const LagrangianModel m = oracles::corpus_model("harmonic_oscillator");
    const HessianAnalysis split = analyze_hessian(m);
    const auto w = legendre_invert(m, split);
    REQUIRE(w.size() == 1);
    CHECK(expr_eq(w[0], "p_q"));
  }
  SECTION("shared-velocity singular model: w_1 = p_1 - v_q2") {
    const LagrangianModel m = make_model("shared", {"q1", "q2"}, "0.5*(v_q1 + v_q2)^2");
    const HessianAnalysis split = analyze_hessian(m);
    REQUIRE(split.deficiency == 1);
    REQUIRE(split.regular == std::vector<int>{0});
    const auto w = legendre_invert(m, split);
    REQUIRE(w.size() == 1);
    CHECK(expr_eq(w[0], "p_q1 - v_q2"));
    // Residual check: substituting w back into dL/dv_q1 returns p_q1.
    const ExprPtr p1 = differentiate(m.lagrangian, "v_q1");
    const ExprPtr back = substitute(p1, {{"v_q1", w[0]}});
    CHECK(is_identically_zero(sub(back, sym("p_q1"))).is_zero());
  }
  SECTION("quartic velocity is not affine") {
    const LagrangianModel m = oracles::corpus_model("quartic_velocity");
    const HessianAnalysis split = analyze_hessian(m);
    CHECK_THROWS_AS(legendre_invert(m, split), UnsupportedModelError);
  }
}

TEST_CASE("build_hamiltonians assembles H_alpha and H'_alpha") {
  SECTION("reparametrized free particle") {
    const HJSystem sys = build_hj_system(reparam_free_particle());
    REQUIRE(sys.parameters == std::vector<std::string>{"tau", "t"});
    CHECK(expr_eq(sys.hamiltonians[1], "0.5*p_q^2"));
    CHECK(expr_eq(sys.primed[1], "p_t + 0.5*p_q^2"));
    CHECK(sys.hamiltonians[0]->is_zero_constant());
    CHECK(expr_eq(sys.primed[0], "p_tau"));
  }
  SECTION("reparametrized oscillator") {
    const HJSystem sys = build_hj_system(reparam_oscillator());
    CHECK(expr_eq(sys.hamiltonians[1], "0.5*p_q^2 + 0.5*q^2"));
  }
  SECTION("regular oscillator has H_0 only") {
    const HJSystem sys = build_hj_system(oracles::corpus_model("harmonic_oscillator"));
    REQUIRE(sys.parameters == std::vector<std::string>{"t"});
    CHECK(expr_eq(sys.hamiltonians[0], "0.5*p_q^2 + 0.5*q^2"));
    CHECK(sys.degenerate_coords.empty());
  }
  SECTION("definition consistency: w(p(v)) = v") {
    for (const auto& name : oracles::regular_corpus()) {
      const LagrangianModel m = oracles::corpus_model(name);
      const HJSystem sys = build_hj_system(m);
      std::map<std::string, ExprPtr> p_of_v;
      for (std::size_t a = 0; a < sys.regular_coords.size(); ++a)
        p_of_v[sys.regular_momenta[a]] =
            differentiate(m.lagrangian, LagrangianModel::velocity_name(sys.regular_coords[a]));
      for (std::size_t a = 0; a < sys.w.size(); ++a) {
        const ExprPtr round_trip = substitute(sys.w[a], p_of_v);
        const ExprPtr vel = sym(LagrangianModel::velocity_name(sys.regular_coords[a]));
        INFO(name << " coordinate " << sys.regular_coords[a]);
        CHECK(is_identically_zero(sub(round_trip, vel)).is_zero());
      }
    }
  }
}

TEST_CASE("total differential system coefficients") {
  SECTION("structural: dq coefficient is dH'/dp") {
    const HJSystem sys = build_hj_system(reparam_free_particle());
    const TotalDifferentialSystem tds = total_differential_system(sys);
    for (std::size_t al = 0; al < sys.parameters.size(); ++al)
      CHECK(structurally_equal(tds.coeff[0][al],
                               simplify(differentiate(sys.primed[al], "p_q"))));
  }
  SECTION("regular oscillator gives Hamilton's equations") {
    const HJSystem sys = build_hj_system(oracles::corpus_model("harmonic_oscillator"));
    const TotalDifferentialSystem tds = total_differential_system(sys);
    REQUIRE(tds.state == std::vector<std::string>{"q", "p_q", "p_t", "z"});
    CHECK(expr_eq(tds.coeff[0][0], "p_q"));   // dq = p dt
    CHECK(expr_eq(tds.coeff[1][0], "-q"));    // dp = -q dt
    CHECK(tds.coeff[2][0]->is_zero_constant());  // dp_t = 0 (no explicit t)
    CHECK(expr_eq(tds.coeff[3][0], "0.5*p_q^2 - 0.5*q^2"));  // dz = L dt on shell
  }
  SECTION("r = 0 system matches the Legendre-transform Hamiltonian") {
    for (const auto& name : oracles::regular_corpus()) {
      const LagrangianModel m = oracles::corpus_model(name);
      const HJSystem sys = build_hj_system(m);
      const TotalDifferentialSystem tds = total_differential_system(sys);
      // Independent route: energy function with velocities eliminated.
      std::map<std::string, ExprPtr> w_sub;
      for (std::size_t a = 0; a < sys.regular_coords.size(); ++a)
        w_sub[LagrangianModel::velocity_name(sys.regular_coords[a])] = sys.w[a];
      const ExprPtr h_legendre = simplify(substitute(energy_function(m), w_sub));
      CHECK(is_identically_zero(sub(sys.hamiltonians[0], h_legendre)).is_zero());
      for (std::size_t a = 0; a < sys.regular_coords.size(); ++a) {
        CHECK(structurally_equal(
            tds.coeff[a][0], simplify(differentiate(h_legendre, sys.regular_momenta[a]))));
        CHECK(structurally_equal(
            tds.coeff[sys.regular_coords.size() + a][0],
            simplify(neg(differentiate(h_legendre, sys.regular_coords[a])))));
      }
    }
  }
  SECTION("reparametrized free particle dz rows") {
    const HJSystem sys = build_hj_system(reparam_free_particle());
    const TotalDifferentialSystem tds = total_differential_system(sys);
    const std::size_t zrow = tds.z_index();
    CHECK(tds.coeff[zrow][0]->is_zero_constant());      // along dtau
    CHECK(expr_eq(tds.coeff[zrow][1], "0.5*p_q^2"));    // along dt
  }
}

TEST_CASE("integrability report") {
  SECTION("reparametrized free particle closes at round 0") {
    const TotalDifferentialSystem tds =
        total_differential_system(build_hj_system(reparam_free_particle()));
    const IntegrabilityReport rep = integrability_report(tds);
    CHECK(rep.closed());
    CHECK(rep.rounds == 0);
    // The dH'_t coefficients vanish identically, term by term.
    for (const auto& c : variation_coefficients(tds.sys.primed[1], tds))
      CHECK(c->is_zero_constant());
  }
  SECTION("reparametrized oscillator closes at round 0") {
    const TotalDifferentialSystem tds =
        total_differential_system(build_hj_system(reparam_oscillator()));
    const IntegrabilityReport rep = integrability_report(tds);
    CHECK(rep.closed());
    CHECK(rep.rounds == 0);
  }
  SECTION("consistency failure emits the hand-computed constraint") {
    // Dirac-style oracle for L = v1^2/2 + q1 q2, phi = p_q2:
    //   H = p1^2/2 - q1 q2, {p_q2, H} = q1, so the loop must emit q1 = 0
    //   (up to sign) and stop: the constraint carries no momentum.
    const LagrangianModel m = oracles::corpus_model("consistency_failure");
    const TotalDifferentialSystem tds = total_differential_system(build_hj_system(m));
    const IntegrabilityReport rep = integrability_report(tds);
    CHECK(rep.status == IntegrabilityReport::Status::ReducedConfigurationSpace);
    REQUIRE(rep.constraints.size() == 1);
    CHECK(rep.constraints[0].round == 1);
    CHECK_FALSE(rep.constraints[0].momentum_linear);
    const ExprPtr c = rep.constraints[0].expr;
    const bool matches = is_identically_zero(sub(c, sym("q1"))).is_zero() ||
                         is_identically_zero(add(c, sym("q1"))).is_zero();
    CHECK(matches);
  }
}

TEST_CASE("trigonometric coefficients invert and cancel exactly") {
  // L = (cos(q1) v1 + sin(q1) v2)^2 / 2: rank-1 Hessian with q-dependent
  // coefficients; the shared factor must cancel out of H_2 and H_0.
  const LagrangianModel m =
      make_model("trig", {"q1", "q2"}, "0.5*(cos(q1)*v_q1 + sin(q1)*v_q2)^2");
  const HJSystem sys = build_hj_system(m);
  REQUIRE(sys.parameters == std::vector<std::string>{"t", "q2"});
  CHECK(is_identically_zero(
            sub(sys.hamiltonians[1], parse_expression("-sin(q1)*p_q1/cos(q1)")))
            .is_zero());
  CHECK(is_identically_zero(
            sub(sys.hamiltonians[0], parse_expression("p_q1^2/(2*cos(q1)^2)")))
            .is_zero());
  // The constraint pair is second class; the loop reports the non-linear
  // leftover instead of silently adjoining it.
  const IntegrabilityReport rep =
      integrability_report(total_differential_system(sys));
  CHECK(rep.status == IntegrabilityReport::Status::ReducedConfigurationSpace);
  REQUIRE_FALSE(rep.constraints.empty());
  CHECK_FALSE(rep.constraints[0].momentum_linear);
}

TEST_CASE("momentum-linear constraints are adjoined and re-tested") {
  // L = v1^2/2 + q2 v1: round one finds p_q1 - q2 (momentum-linear, so it
  // joins the generator set); its own variation then fails with a constant,
  // which ends the loop.
  const LagrangianModel m = make_model("chain", {"q1", "q2"}, "0.5*v_q1^2 + q2*v_q1");
  const TotalDifferentialSystem tds = total_differential_system(build_hj_system(m));
  SECTION("full loop emits the chain") {
    const IntegrabilityReport rep = integrability_report(tds);
    CHECK(rep.status == IntegrabilityReport::Status::ReducedConfigurationSpace);
    REQUIRE(rep.constraints.size() == 2);
    CHECK(rep.constraints[0].momentum_linear);
    CHECK(rep.constraints[0].round == 1);
    const ExprPtr c0 = rep.constraints[0].expr;
    const ExprPtr expected = parse_expression("p_q1 - q2");
    CHECK((is_identically_zero(sub(c0, expected)).is_zero() ||
           is_identically_zero(add(c0, expected)).is_zero()));
    CHECK(rep.constraints[1].round == 2);
    CHECK_FALSE(rep.constraints[1].momentum_linear);
    CHECK(symbols_of(rep.constraints[1].expr).empty());  // a bare constant
  }
  SECTION("iteration cap reports the surviving expressions") {
    IntegrabilityOptions opt;
    opt.max_iterations = 1;
    const IntegrabilityReport rep = integrability_report(tds, opt);
    CHECK(rep.status == IntegrabilityReport::Status::CapExceeded);
    CHECK_FALSE(rep.surviving.empty());
  }
}

TEST_CASE("integrate runs RK4 along parameter paths") {
  SECTION("reparametrized oscillator reaches q(pi/2) = 0") {
    const HJSystem sys = build_hj_system(reparam_oscillator());
    const TotalDifferentialSystem tds = total_differential_system(sys);
    Binding init{{"q", 1.0}, {"p_q", 0.0}, {"p_tau", 0.0}, {"p_t", -0.5}, {"z", 0.0}};
    const ParameterPath path = ParameterPath::linear({0.0, 0.0}, {1.0, 1.0}, M_PI / 2.0);
    const Trajectory traj = integrate(tds, init, path, 1e-3);
    REQUIRE_FALSE(traj.truncated);
    const int qi = traj.column_index("q");
    CHECK(std::abs(traj.samples.back()[static_cast<std::size_t>(qi)]) <= 1e-6);
  }
  SECTION("free particle action accumulates z = T/2") {
    const HJSystem sys = build_hj_system(oracles::corpus_model("free_particle"));
    const TotalDifferentialSystem tds = total_differential_system(sys);
    Binding init{{"q", 0.0}, {"p_q", 1.0}, {"p_t", -0.5}, {"z", 0.0}};
    const ParameterPath path = ParameterPath::linear({0.0}, {1.0}, 1.0);
    const Trajectory traj = integrate(tds, init, path, 1e-3);
    const int qi = traj.column_index("q");
    const int zi = traj.column_index("z");
    CHECK(std::abs(traj.samples.back()[static_cast<std::size_t>(qi)] - 1.0) <= 1e-8);
    CHECK(std::abs(traj.samples.back()[static_cast<std::size_t>(zi)] - 0.5) <= 1e-8);
  }
  SECTION("zero-length path returns the initial sample") {
    const HJSystem sys = build_hj_system(oracles::corpus_model("free_particle"));
    const TotalDifferentialSystem tds = total_differential_system(sys);
    Binding init{{"q", 0.25}, {"p_q", 1.0}, {"p_t", -0.5}, {"z", 0.0}};
    const ParameterPath path = ParameterPath::linear({0.0}, {1.0}, 0.0);
    const Trajectory traj = integrate(tds, init, path, 1e-3);
    REQUIRE(traj.samples.size() == 1);
    CHECK(traj.samples[0][static_cast<std::size_t>(traj.column_index("q"))] == 0.25);
  }
  SECTION("default path drives t and freezes the degenerate parameters") {
    const LagrangianModel m = oracles::corpus_model("consistency_failure");
    const TotalDifferentialSystem tds = total_differential_system(build_hj_system(m));
    Binding init{{"q1", 1.0}, {"p_q1", 0.0}, {"q2", 0.3},
                 {"p_t", 0.0},  {"p_q2", 0.0}, {"z", 0.0}};
    const Trajectory traj = integrate(tds, init, default_path(tds, init, 1.0), 1e-3);
    REQUIRE_FALSE(traj.truncated);
    CHECK(traj.step == 1e-3);
    CHECK(traj.integrator == "rk4");
    const int q2i = traj.column_index("q2");
    for (const auto& row : traj.samples)
      CHECK(row[static_cast<std::size_t>(q2i)] == 0.3);
    // Frozen q2 acts as a constant force: q1(t) = 1 + 0.15 t^2.
    const int q1i = traj.column_index("q1");
    CHECK(std::abs(traj.samples.back()[static_cast<std::size_t>(q1i)] - 1.15) <= 1e-12);
  }

  SECTION("blowup truncates with a failure flag") {
    // dq = q^2 dt from H = q^2 p: finite-time escape.
    const LagrangianModel m = make_model("blow", {"q"}, "0.5*v_q^2");
    HJSystem sys = build_hj_system(m);
    sys.hamiltonians[0] = parse_expression("q^2*p_q + q^4");
    sys.primed[0] = simplify(add(sym("p_t"), sys.hamiltonians[0]));
    const TotalDifferentialSystem tds = total_differential_system(sys);
    Binding init{{"q", 2.0}, {"p_q", 0.0}, {"p_t", 0.0}, {"z", 0.0}};
    const Trajectory traj =
        integrate(tds, init, ParameterPath::linear({0.0}, {1.0}, 10.0), 1e-2);
    CHECK(traj.truncated);
    CHECK_FALSE(traj.failure.empty());
    CHECK_FALSE(traj.samples.empty());
  }
}

TEST_CASE("trajectory properties along the reparametrized flow") {
  const HJSystem sys = build_hj_system(reparam_oscillator());
  const TotalDifferentialSystem tds = total_differential_system(sys);
  Binding init{{"q", 1.0}, {"p_q", 0.0}, {"p_tau", 0.0}, {"p_t", -0.5}, {"z", 0.0}};

  SECTION("H'_t stays small and p_t is conserved") {
    const Trajectory traj =
        integrate(tds, init, ParameterPath::linear({0.0, 0.0}, {1.0, 1.0}, 2.0 * M_PI), 1e-3);
    CHECK(trajectory_max_abs(tds, traj, sys.primed[1]) <= 1e-10);
    CHECK(column_drift(traj, "p_t") <= 1e-10);
  }
  SECTION("q and p are independent of the tau-path") {
    const Trajectory a =
        integrate(tds, init, ParameterPath::linear({0.0, 0.0}, {1.0, 1.0}, 1.0), 1e-3);
    const Trajectory b =
        integrate(tds, init, ParameterPath::linear({0.0, 0.0}, {2.0, 1.0}, 1.0), 1e-3);
    const int qi = a.column_index("q"), pi = a.column_index("p_q");
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t r = 0; r < a.samples.size(); ++r) {
      CHECK(std::abs(a.samples[r][static_cast<std::size_t>(qi)] -
                     b.samples[r][static_cast<std::size_t>(qi)]) <= 1e-12);
      CHECK(std::abs(a.samples[r][static_cast<std::size_t>(pi)] -
                     b.samples[r][static_cast<std::size_t>(pi)]) <= 1e-12);
    }
  }
  SECTION("z equals the quadrature of L along the trajectory") {
    for (const auto& name : oracles::regular_corpus()) {
      const LagrangianModel m = oracles::corpus_model(name);
      const HJSystem s2 = build_hj_system(m);
      const TotalDifferentialSystem t2 = total_differential_system(s2);
      Binding b0;
      const ModelDocument doc = oracles::corpus_doc(name);
      Binding qv = doc.initial;
      qv[m.evolution] = 0.0;
      for (std::size_t a = 0; a < m.dof(); ++a) {
        const auto& c = m.coordinates[a];
        b0[c] = qv.at(c);
        b0[LagrangianModel::momentum_name(c)] =
            evaluate(differentiate(m.lagrangian, LagrangianModel::velocity_name(c)), qv);
      }
      Binding phase = b0;
      phase[m.evolution] = 0.0;
      b0[LagrangianModel::momentum_name(m.evolution)] = -evaluate(s2.hamiltonians[0], phase);
      b0["z"] = 0.0;
      const Trajectory traj =
          integrate(t2, b0, ParameterPath::linear({0.0}, {1.0}, 2.0), 1e-3);
      REQUIRE_FALSE(traj.truncated);

      // Quadrature oracle: L(q, qdot, t) with qdot read off the dq/dt
      // coefficients, Simpson-summed over the samples.
      std::vector<double> svals, lvals;
      std::vector<std::vector<double>> qdot(m.dof());
      for (std::size_t a = 0; a < m.dof(); ++a)
        qdot[a] = trajectory_values(t2, traj, t2.coeff[a][0]);
      for (std::size_t r = 0; r < traj.samples.size(); ++r) {
        Binding b;
        b[m.evolution] = traj.samples[r][1];
        for (std::size_t a = 0; a < m.dof(); ++a) {
          b[m.coordinates[a]] =
              traj.samples[r][static_cast<std::size_t>(traj.column_index(m.coordinates[a]))];
          b[LagrangianModel::velocity_name(m.coordinates[a])] = qdot[a][r];
        }
        svals.push_back(traj.samples[r][0]);
        lvals.push_back(evaluate(m.lagrangian, b));
      }
      const double z_quad = oracles::quadrature(svals, lvals);
      const double z_traj =
          traj.samples.back()[static_cast<std::size_t>(traj.column_index("z"))];
      INFO(name);
      CHECK(std::abs(z_traj - z_quad) <= 1e-6);
    }
  }
}

TEST_CASE("CSV export carries header and 17 significant digits") {
  const HJSystem sys = build_hj_system(oracles::corpus_model("free_particle"));
  const TotalDifferentialSystem tds = total_differential_system(sys);
  Binding init{{"q", 1.0 / 3.0}, {"p_q", 1.0}, {"p_t", -0.5}, {"z", 0.0}};
  const Trajectory traj =
      integrate(tds, init, ParameterPath::linear({0.0}, {1.0}, 0.01), 1e-2);
  std::ostringstream os;
  write_trajectory_csv(traj, os);
  const std::string text = os.str();
  CHECK(text.rfind("s,t,q,p_q,p_t,z\n", 0) == 0);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
}
