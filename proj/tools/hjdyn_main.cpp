// hjdyn command line: loads a model file, runs one analysis subcommand, and
// writes report/trajectory artifacts plus a manifest to the output directory.
//
// Exit codes: 0 success, 1 validation error, 2 unsupported model
// (non-affine momenta, stratified Hessian), 3 numerical failure.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hjdyn/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Hamilton-Jacobi constraint analysis for singular Lagrangians"};
  app.require_subcommand(1);

  hjdyn::RunConfig cfg;
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"analyze", "Hessian, rank, coordinate split, Euler-Lagrange equations"},
      {"constraints", "constraint Hamiltonians, total differential equations, integrability"},
      {"reparametrize", "emit the parametrization-invariant extension as a model file"},
      {"verify", "compare the canonical and Euler-Lagrange routes on one trajectory"},
      {"field-demo", "lattice field runs: canonical evolution and field equivalence"}};

  for (const auto& [name, desc] : subs) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--model", cfg.model_path, "model file (JSON)")->required();
    sub->add_option("--out", cfg.out_dir, "output directory for artifacts")->required();
    sub->add_option("--step", cfg.step, "integration step size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--horizon", cfg.horizon, "integration horizon")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--samples", cfg.samples, "sample count for rank and zero tests")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--seed", cfg.seed, "seed for stochastic sampling")->capture_default_str();
    sub->add_option("--max-iter", cfg.max_iterations, "integrability iteration cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--tolerance", cfg.tolerance, "equivalence verdict tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    if (name == "field-demo") {
      sub->add_option("--wave-mode", cfg.mode, "standing wave mode number")
          ->capture_default_str();
      sub->add_option("--amplitude", cfg.amplitude, "standing wave amplitude")
          ->capture_default_str();
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    hjdyn::run_subcommand(sub, cfg);
  } catch (const hjdyn::UnsupportedModelError& err) {
    std::fprintf(stderr, "error: unsupported model: %s\n", err.what());
    return 2;
  } catch (const hjdyn::NumericalError& err) {
    std::fprintf(stderr, "error: numerical failure: %s\n", err.what());
    return 3;
  } catch (const hjdyn::EvalError& err) {
    std::fprintf(stderr, "error: numerical failure: %s\n", err.what());
    return 3;
  } catch (const hjdyn::SimplifyLimit& err) {
    std::fprintf(stderr, "error: unsupported model: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
