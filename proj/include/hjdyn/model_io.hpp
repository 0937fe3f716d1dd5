// Model files: one JSON schema for finite-dof and lattice models.
//
//   {
//     "name": "harmonic_oscillator",
//     "coordinates": ["q"],
//     "time": "t",
//     "lagrangian": "0.5*v_q^2 - 0.5*q^2",
//     "initial": {"q": 1.0, "v_q": 0.0}
//   }
//
// Lattice models replace coordinates/lagrangian with
//   "lattice": {"N": 32, "dx": 0.03125, "density": "0.5*dphi_t^2 - ..."}
// where dx defaults to 1/N.
#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hjdyn/lattice.hpp"
#include "hjdyn/parse.hpp"

namespace hjdyn {

struct ModelDocument {
  std::string name;
  std::optional<LagrangianModel> finite;
  std::optional<LatticeFieldModel> lattice;
  Binding initial;

  bool is_lattice() const { return lattice.has_value(); }

  /// The finite-dof model: as declared, or the discretized lattice.
  LagrangianModel model() const {
    if (finite) return *finite;
    return discretize(*lattice);
  }
};

namespace detail {

inline ExprPtr parse_expression_field(const std::string& text, const std::string& what) {
  if (text.empty()) throw ModelError(what + " must not be empty");
  try {
    return parse_expression(text);
  } catch (const ParseError& err) {
    throw ModelError(what + ": " + err.what());
  }
}

}  // namespace detail

inline ModelDocument load_model_document(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& err) {
    throw ModelError(std::string("model file is not valid JSON: ") + err.what());
  }
  if (!doc.is_object()) throw ModelError("model file must be a JSON object");
  if (!doc.contains("name") || !doc["name"].is_string())
    throw ModelError("model file needs a string 'name'");

  ModelDocument out;
  out.name = doc["name"].get<std::string>();

  if (doc.contains("lattice")) {
    if (doc.contains("coordinates") || doc.contains("lagrangian"))
      throw ModelError("a lattice model must not also declare coordinates or a lagrangian");
    const auto& lat = doc["lattice"];
    if (!lat.is_object() || !lat.contains("N") || !lat.contains("density"))
      throw ModelError("'lattice' needs integer 'N' and a 'density' expression");
    LatticeFieldModel f;
    f.name = out.name;
    if (!lat["N"].is_number_integer()) throw ModelError("'lattice.N' must be an integer");
    f.sites = lat["N"].get<int>();
    if (lat.contains("dx")) {
      if (!lat["dx"].is_number()) throw ModelError("'lattice.dx' must be a number");
      f.spacing = number_from_double(lat["dx"].get<double>());
    } else {
      if (f.sites <= 0) throw ModelError("lattice needs at least 4 sites");
      f.spacing = Number(Rational(1, f.sites));
    }
    if (!lat["density"].is_string()) throw ModelError("'lattice.density' must be a string");
    f.density = detail::parse_expression_field(lat["density"].get<std::string>(), "density");
    validate_lattice(f);
    out.lattice = std::move(f);
  } else {
    if (!doc.contains("coordinates") || !doc["coordinates"].is_array())
      throw ModelError("model file needs a 'coordinates' array");
    if (!doc.contains("lagrangian") || !doc["lagrangian"].is_string())
      throw ModelError("model file needs a 'lagrangian' expression string");
    LagrangianModel m;
    m.name = out.name;
    for (const auto& c : doc["coordinates"]) {
      if (!c.is_string()) throw ModelError("'coordinates' must contain strings");
      m.coordinates.push_back(c.get<std::string>());
    }
    m.evolution = doc.value("time", std::string("t"));
    m.lagrangian =
        detail::parse_expression_field(doc["lagrangian"].get<std::string>(), "lagrangian");
    validate_model(m);
    out.finite = std::move(m);
  }

  if (doc.contains("initial")) {
    if (!doc["initial"].is_object())
      throw ModelError("'initial' must map symbol names to numbers");
    for (const auto& [key, val] : doc["initial"].items()) {
      if (!val.is_number()) throw ModelError("initial value for '" + key + "' must be a number");
      out.initial[key] = val.get<double>();
    }
  }
  return out;
}

inline ModelDocument load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model_document(ss.str());
}

/// Serializes a finite model back to the model-file schema (used by the
/// reparametrize subcommand to emit the extended model).
inline std::string model_to_json(const LagrangianModel& m, const Binding& initial = {}) {
  nlohmann::ordered_json doc;
  doc["name"] = m.name;
  doc["coordinates"] = m.coordinates;
  doc["time"] = m.evolution;
  doc["lagrangian"] = to_string(simplify(m.lagrangian));
  if (!initial.empty()) {
    nlohmann::ordered_json init;
    for (const auto& [k, v] : initial) init[k] = v;
    doc["initial"] = init;
  }
  return doc.dump(2) + "\n";
}

}  // namespace hjdyn
