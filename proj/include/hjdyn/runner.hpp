// Subcommand orchestration shared by the CLI and the integration tests:
// loads a model document, runs the requested analysis, and writes the
// report, trajectory, and manifest artifacts. With a fixed seed the emitted
// bytes are identical across runs.
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hjdyn/fieldsys.hpp"
#include "hjdyn/model_io.hpp"

namespace hjdyn {

struct RunConfig {
  std::string model_path;
  std::string out_dir;
  double step = 1e-3;
  double horizon = 6.283185307179586;
  int samples = 50;
  std::uint64_t seed = 0x5eed5eedULL;
  int max_iterations = 5;
  double tolerance = 1e-6;
  int mode = 1;          // field-demo standing wave mode
  double amplitude = 1.0;

  RankOptions rank_options() const {
    RankOptions r;
    r.samples = samples;
    r.seed = seed;
    return r;
  }
  ZeroTestOptions zero_options() const {
    ZeroTestOptions z;
    z.samples = samples;
    z.seed = seed;
    return z;
  }
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Collects artifacts in memory and writes them plus a manifest listing
/// every file with a content hash.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(std::filesystem::path(dir_) / name, std::ios::binary);
    if (!out) throw ModelError("cannot write artifact '" + name + "' under " + dir_);
    out << content;
    files_.emplace_back(name, content);
  }

  void finalize() {
    nlohmann::ordered_json manifest;
    manifest["files"] = nlohmann::ordered_json::array();
    for (const auto& [name, content] : files_) {
      nlohmann::ordered_json f;
      f["name"] = name;
      f["bytes"] = content.size();
      char buf[20];
      std::snprintf(buf, sizeof buf, "%016llx",
                    static_cast<unsigned long long>(fnv1a64(content)));
      f["fnv1a64"] = buf;
      manifest["files"].push_back(f);
    }
    std::ofstream out(std::filesystem::path(dir_) / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
  }

 private:
  std::string dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

// --- JSON renderers ---------------------------------------------------------

namespace report {

using json = nlohmann::ordered_json;

inline json expr_list(const std::vector<ExprPtr>& v) {
  json out = json::array();
  for (const auto& e : v) out.push_back(to_string(simplify(e)));
  return out;
}

inline json binding_json(const Binding& b) {
  json out = json::object();
  for (const auto& [k, v] : b) out[k] = v;
  return out;
}

inline json hessian_json(const LagrangianModel& m, const HessianAnalysis& h) {
  json out;
  out["rank"] = h.rank;
  out["deficiency"] = h.deficiency;
  out["rank_samples"] = h.sample_ranks.size();
  json rows = json::array();
  for (const auto& row : h.hessian) {
    json r = json::array();
    for (const auto& e : row) r.push_back(to_string(e));
    rows.push_back(r);
  }
  out["matrix"] = rows;
  json reg = json::array(), deg = json::array();
  for (int i : h.regular) reg.push_back(m.coordinates[static_cast<std::size_t>(i)]);
  for (int i : h.degenerate) deg.push_back(m.coordinates[static_cast<std::size_t>(i)]);
  out["regular"] = reg;
  out["degenerate"] = deg;
  return out;
}

inline json hj_json(const HJSystem& sys) {
  json out;
  out["parameters"] = sys.parameters;
  out["parameter_momenta"] = sys.parameter_momenta;
  out["regular_coordinates"] = sys.regular_coords;
  out["regular_momenta"] = sys.regular_momenta;
  out["inverted_velocities"] = expr_list(sys.w);
  json h = json::object(), hp = json::object();
  for (std::size_t k = 0; k < sys.parameters.size(); ++k) {
    h["H_" + sys.parameters[k]] = to_string(sys.hamiltonians[k]);
    hp["H'_" + sys.parameters[k]] = to_string(sys.primed[k]);
  }
  out["hamiltonians"] = h;
  out["constraint_hamiltonians"] = hp;
  return out;
}

inline json tds_json(const TotalDifferentialSystem& tds) {
  json out;
  out["state"] = tds.state;
  out["parameters"] = tds.sys.parameters;
  json rows = json::object();
  for (std::size_t xi = 0; xi < tds.state.size(); ++xi) {
    json row = json::object();
    for (std::size_t al = 0; al < tds.sys.parameters.size(); ++al)
      row["d" + tds.sys.parameters[al]] = to_string(tds.coeff[xi][al]);
    rows["d" + tds.state[xi]] = row;
  }
  out["coefficients"] = rows;
  return out;
}

inline json integrability_json(const IntegrabilityReport& rep) {
  json out;
  switch (rep.status) {
    case IntegrabilityReport::Status::Closed:
      out["status"] = "closed";
      break;
    case IntegrabilityReport::Status::ReducedConfigurationSpace:
      out["status"] = "reduced-configuration-space";
      break;
    case IntegrabilityReport::Status::CapExceeded:
      out["status"] = "cap-exceeded";
      break;
  }
  out["rounds"] = rep.rounds;
  json cons = json::array();
  for (const auto& c : rep.constraints) {
    json e;
    e["expression"] = to_string(c.expr);
    e["origin"] = c.origin;
    e["round"] = c.round;
    e["momentum_linear"] = c.momentum_linear;
    cons.push_back(e);
  }
  out["new_constraints"] = cons;
  if (!rep.surviving.empty()) out["surviving"] = expr_list(rep.surviving);
  return out;
}

inline json equivalence_json(const EquivalenceReport& rep) {
  json out;
  out["model"] = rep.model;
  out["horizon"] = rep.horizon;
  out["step"] = rep.step;
  out["max_dev_q"] = rep.max_dev_q;
  out["max_dev_p"] = rep.max_dev_p;
  out["pt_drift"] = rep.pt_drift;
  out["Hpt_max"] = rep.hpt_max;
  out["tolerance"] = rep.tolerance;
  out["verdict"] = rep.equivalent ? "equivalent" : "deviating";
  return out;
}

inline json variations_json(const ConstraintVariationReport& rep) {
  json out;
  out["balanced_with"] = rep.balanced_with;
  json entries = json::array();
  for (const auto& e : rep.entries) {
    json j;
    j["constraint"] = e.id;
    j["expression"] = to_string(e.field_rhs);
    j["field_verdict"] = to_string(e.field_verdict);
    j["canonical_verdict"] = to_string(e.canonical_verdict);
    j["flagged"] = e.flagged;
    j["max_mismatch"] = e.max_mismatch;
    j["compared_samples"] = e.compared_samples;
    if (!e.witness.empty()) j["witness"] = binding_json(e.witness);
    entries.push_back(j);
  }
  out["entries"] = entries;
  return out;
}

inline json config_json(const RunConfig& cfg) {
  json out;
  out["model"] = cfg.model_path;
  out["step"] = cfg.step;
  out["horizon"] = cfg.horizon;
  out["samples"] = cfg.samples;
  out["seed"] = cfg.seed;
  out["max_iter"] = cfg.max_iterations;
  return out;
}

}  // namespace report

// --- subcommands -------------------------------------------------------------

namespace detail {

inline Binding initial_or_default(const ModelDocument& doc, const LagrangianModel& m) {
  Binding init = doc.initial;
  for (const auto& c : m.coordinates) {
    if (!init.count(c)) init[c] = 1.0;
    const auto v = LagrangianModel::velocity_name(c);
    if (!init.count(v)) init[v] = 0.0;
  }
  return init;
}

}  // namespace detail

inline void run_analyze(const RunConfig& cfg) {
  const ModelDocument doc = load_model_file(cfg.model_path);
  const LagrangianModel m = doc.model();
  const HessianAnalysis h = analyze_hessian(m, cfg.rank_options());

  report::json rep;
  rep["subcommand"] = "analyze";
  rep["config"] = report::config_json(cfg);
  rep["model"] = m.name;
  rep["coordinates"] = m.coordinates;
  rep["time"] = m.evolution;
  rep["hessian"] = report::hessian_json(m, h);
  rep["euler_lagrange"] = report::expr_list(euler_lagrange_residuals(m));
  try {
    rep["explicit_accelerations"] = report::expr_list(explicit_accelerations(m, cfg.zero_options()));
  } catch (const UnsupportedModelError& err) {
    rep["explicit_accelerations"] = nullptr;
    rep["explicit_error"] = err.what();
  }

  ArtifactWriter out(cfg.out_dir);
  out.write("report.json", rep.dump(2) + "\n");
  out.finalize();
}

inline void run_constraints(const RunConfig& cfg) {
  const ModelDocument doc = load_model_file(cfg.model_path);
  const LagrangianModel m = doc.model();
  const HJSystem sys = build_hj_system(m, cfg.rank_options(), cfg.zero_options());
  const TotalDifferentialSystem tds = total_differential_system(sys);
  IntegrabilityOptions iopt;
  iopt.max_iterations = cfg.max_iterations;
  iopt.zero_test = cfg.zero_options();
  const IntegrabilityReport integ = integrability_report(tds, iopt);

  report::json rep;
  rep["subcommand"] = "constraints";
  rep["config"] = report::config_json(cfg);
  rep["model"] = m.name;
  rep["system"] = report::hj_json(sys);
  rep["total_differential"] = report::tds_json(tds);
  rep["integrability"] = report::integrability_json(integ);

  ArtifactWriter out(cfg.out_dir);
  out.write("report.json", rep.dump(2) + "\n");
  out.finalize();
}

inline void run_reparametrize(const RunConfig& cfg) {
  const ModelDocument doc = load_model_file(cfg.model_path);
  const LagrangianModel base = doc.model();
  const ReparamPair pair = parametrize(base, cfg.rank_options());
  const ZeroTestResult hom = homogeneity_check(pair, cfg.zero_options());

  report::json rep;
  rep["subcommand"] = "reparametrize";
  rep["config"] = report::config_json(cfg);
  rep["model"] = base.name;
  rep["extended_model"] = pair.extended.name;
  rep["homogeneity"] = to_string(hom.verdict);
  rep["hessian"] = report::hessian_json(pair.extended, pair.extended_split);
  report::json prov = report::json::object();
  for (const auto& [k, v] : pair.provenance) prov[k] = v;
  rep["provenance"] = prov;

  ArtifactWriter out(cfg.out_dir);
  out.write("extended_model.json", model_to_json(pair.extended));
  out.write("report.json", rep.dump(2) + "\n");
  out.finalize();
}

inline void run_verify(const RunConfig& cfg) {
  const ModelDocument doc = load_model_file(cfg.model_path);
  const LagrangianModel base = doc.model();
  const Binding initial = detail::initial_or_default(doc, base);
  const ReparamPair pair = parametrize(base, cfg.rank_options());
  const EquivalenceReport eq =
      verify_equivalence(pair, initial, cfg.horizon, cfg.step, cfg.zero_options(), cfg.tolerance);

  // Field-system cross checks on the same extension.
  const ExtendedHJ ext = build_extended_hj(pair, cfg.zero_options());
  const TotalDifferentialSystem tds = total_differential_system(ext.sys);
  const FieldSystemModel f = promote_to_field(ext.sys);
  const std::vector<ExprPtr> reduced =
      reduce_to_time(f, pair.time_coordinate(), field_euler_lagrange(f));
  const std::vector<ExprPtr> base_res = euler_lagrange_residuals(base);
  const std::string vt = LagrangianModel::velocity_name(base.evolution);
  report::json reduction = report::json::array();
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    const ExprPtr diff = simplify(sub(reduced[i], mul(sym(vt), base_res[i])));
    reduction.push_back(to_string(is_identically_zero(diff, cfg.zero_options()).verdict));
  }
  const ConstraintVariationReport cvar = constraint_variations(f, tds, cfg.zero_options());

  report::json rep;
  rep["subcommand"] = "verify";
  rep["config"] = report::config_json(cfg);
  report::json eqj = report::equivalence_json(eq);
  for (auto& [k, v] : eqj.items()) rep[k] = v;
  rep["h0_vanishes"] = to_string(ext.h0_vanishes);
  rep["ht_routes_match"] = to_string(ext.h_t_match);
  rep["reduction_identity"] = reduction;
  rep["constraint_variations"] = report::variations_json(cvar);
  rep["sign_convention"] = "dq = +dH'/dp dt_alpha, dp = -dH'/dq dt_alpha for every parameter";

  ArtifactWriter out(cfg.out_dir);
  std::ostringstream csv;
  write_trajectory_csv(eq.canonical, csv);
  out.write("trajectory.csv", csv.str());
  out.write("report.json", rep.dump(2) + "\n");
  out.finalize();
}

inline void run_field_demo(const RunConfig& cfg) {
  const ModelDocument doc = load_model_file(cfg.model_path);
  if (!doc.is_lattice())
    throw ModelError("field-demo needs a lattice model (a 'lattice' block in the model file)");
  const LatticeFieldModel& f = *doc.lattice;
  const LagrangianModel m = discretize(f);
  const LatticeState s0 = standing_wave_state(f, cfg.mode, cfg.amplitude);

  const HJSystem sys = build_hj_system(m, cfg.rank_options(), cfg.zero_options());
  const TotalDifferentialSystem tds = total_differential_system(sys);
  const Trajectory traj =
      canonical_field_evolution(m, f, s0, cfg.horizon, cfg.step, cfg.rank_options(),
                                cfg.zero_options());
  if (traj.truncated) throw NumericalError("canonical field evolution failed: " + traj.failure);
  const double h0_drift = trajectory_drift(tds, traj, sys.hamiltonians[0]);

  const EquivalenceReport eq = reparam_field_equivalence(
      f, s0, cfg.horizon, cfg.step, cfg.rank_options(), cfg.zero_options(), cfg.tolerance);

  report::json rep;
  rep["subcommand"] = "field-demo";
  rep["config"] = report::config_json(cfg);
  rep["model"] = m.name;
  rep["sites"] = f.sites;
  rep["dx"] = f.spacing.to_double();
  rep["standing_wave"] = {{"mode", cfg.mode}, {"amplitude", cfg.amplitude}};
  rep["h0_drift"] = h0_drift;
  rep["pi_t_drift"] = eq.pt_drift;
  rep["equivalence"] = report::equivalence_json(eq);

  ArtifactWriter out(cfg.out_dir);
  std::ostringstream csv;
  write_state_csv(traj, f, m.evolution, csv);
  out.write("states.csv", csv.str());
  out.write("report.json", rep.dump(2) + "\n");
  out.finalize();
}

/// Dispatch; throws the module error types on failure.
inline void run_subcommand(const std::string& name, const RunConfig& cfg) {
  if (name == "analyze") return run_analyze(cfg);
  if (name == "constraints") return run_constraints(cfg);
  if (name == "reparametrize") return run_reparametrize(cfg);
  if (name == "verify") return run_verify(cfg);
  if (name == "field-demo") return run_field_demo(cfg);
  throw ModelError("unknown subcommand '" + name + "'");
}

}  // namespace hjdyn
