#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hjdyn/runner.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = HJDYN_CLI_PATH;

int run_cli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("hjdyn_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string model_path(const std::string& name) {
  return oracles::models_dir() + "/" + name + ".json";
}

}  // namespace

TEST_CASE("verify emits an equivalence report and trajectory") {
  const fs::path out = fresh_dir("verify");
  const int rc =
      run_cli("verify --model " + model_path("harmonic_oscillator") + " --out " + out.string());
  REQUIRE(rc == 0);
  const json rep = json::parse(slurp(out / "report.json"));
  CHECK(rep["verdict"] == "equivalent");
  CHECK(rep["max_dev_q"].get<double>() <= 1e-6);
  CHECK(rep["max_dev_p"].get<double>() <= 1e-6);
  CHECK(rep["pt_drift"].get<double>() <= 1e-10);
  CHECK(rep["Hpt_max"].get<double>() <= 1e-10);
  CHECK(fs::exists(out / "trajectory.csv"));
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("reparametrize emits a loadable extended model") {
  const fs::path out = fresh_dir("reparam");
  REQUIRE(run_cli("reparametrize --model " + model_path("free_particle") + " --out " +
                  out.string()) == 0);
  // The emitted file is itself a valid model: analyze it.
  const fs::path out2 = fresh_dir("analyze_ext");
  REQUIRE(run_cli("analyze --model " + (out / "extended_model.json").string() + " --out " +
                  out2.string()) == 0);
  const json rep = json::parse(slurp(out2 / "report.json"));
  CHECK(rep["hessian"]["rank"] == 1);
  CHECK(rep["hessian"]["deficiency"] == 1);
  CHECK(rep["hessian"]["degenerate"] == json::array({"t"}));
}

TEST_CASE("constraints reports the integrability outcome") {
  const fs::path out = fresh_dir("constraints");
  REQUIRE(run_cli("constraints --model " + model_path("consistency_failure") + " --out " +
                  out.string()) == 0);
  const json rep = json::parse(slurp(out / "report.json"));
  CHECK(rep["integrability"]["status"] == "reduced-configuration-space");
  REQUIRE(rep["integrability"]["new_constraints"].size() == 1);
  CHECK(rep["integrability"]["new_constraints"][0]["round"] == 1);
}

TEST_CASE("exit codes") {
  SECTION("missing model file is a validation error") {
    CHECK(run_cli("analyze --model /nonexistent.json --out /tmp/hjdyn_nox") == 1);
  }
  SECTION("invalid JSON is a validation error") {
    const fs::path dir = fresh_dir("badjson");
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK(run_cli("analyze --model " + (dir / "bad.json").string() + " --out " +
                  (dir / "out").string()) == 1);
  }
  SECTION("non-affine momenta are an unsupported model") {
    CHECK(run_cli("constraints --model " + model_path("quartic_velocity") + " --out " +
                  fresh_dir("quartic").string()) == 2);
  }
  SECTION("field-demo rejects finite models") {
    CHECK(run_cli("field-demo --model " + model_path("free_particle") + " --out " +
                  fresh_dir("fdbad").string()) == 1);
  }
  SECTION("missing subcommand fails") { CHECK(run_cli("") != 0); }
}

TEST_CASE("a trajectory that leaves the domain is a numerical failure") {
  // Attractive log potential: the particle reaches q = 0 in finite time,
  // inside the default horizon.
  const fs::path dir = fresh_dir("blowup");
  std::ofstream(dir / "model.json") << R"json({
    "name": "attractive_log",
    "coordinates": ["q"],
    "time": "t",
    "lagrangian": "0.5*v_q^2 - ln(q)",
    "initial": {"q": 1.0, "v_q": 0.0}
  })json";
  CHECK(run_cli("verify --model " + (dir / "model.json").string() + " --out " +
                (dir / "out").string()) == 3);
}

TEST_CASE("fixed seeds give byte-identical artifacts") {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  const std::string common = "verify --model " + model_path("coupled_oscillator") +
                             " --horizon 1.0 --seed 424242 --out ";
  REQUIRE(run_cli(common + a.string()) == 0);
  REQUIRE(run_cli(common + b.string()) == 0);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
}

TEST_CASE("manifest hashes match the file contents") {
  const fs::path out = fresh_dir("manifest");
  REQUIRE(run_cli("analyze --model " + model_path("harmonic_oscillator") + " --out " +
                  out.string()) == 0);
  const json manifest = json::parse(slurp(out / "manifest.json"));
  REQUIRE(manifest["files"].is_array());
  REQUIRE(manifest["files"].size() >= 1);
  for (const auto& f : manifest["files"]) {
    const std::string content = slurp(out / f["name"].get<std::string>());
    CHECK(f["bytes"].get<std::size_t>() == content.size());
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(hjdyn::fnv1a64(content)));
    CHECK(f["fnv1a64"].get<std::string>() == buf);
  }
}

TEST_CASE("field-demo emits snapshots and drift figures") {
  const fs::path out = fresh_dir("fielddemo");
  REQUIRE(run_cli("field-demo --model " + model_path("phi4_field") +
                  " --horizon 0.25 --amplitude 0.5 --out " + out.string()) == 0);
  const json rep = json::parse(slurp(out / "report.json"));
  CHECK(rep["h0_drift"].get<double>() <= 1e-7);
  CHECK(rep["pi_t_drift"].get<double>() <= 1e-9);
  CHECK(rep["equivalence"]["verdict"] == "equivalent");
  const std::string csv = slurp(out / "states.csv");
  CHECK(csv.rfind("time,phi_0", 0) == 0);
}
