// snncert: run a scenario file and report the results.

#include "snn/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Build curvature operators and certify strong nonnegativity from a scenario file"};
  std::string scenario;
  std::uint64_t seed = 0;
  double tol = 0.0;
  int budget = 0;
  std::string out;
  std::string format = "table";
  app.add_option("--scenario", scenario, "scenario JSON file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized tasks (overrides the scenario)");
  auto* tol_opt = app.add_option("--tol", tol, "relative PSD tolerance")->check(CLI::PositiveNumber);
  auto* budget_opt = app.add_option("--budget", budget, "iteration budget")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", out, "directory for report.json and artifacts");
  app.add_option("--format", format, "stdout format")->check(CLI::IsMember({"json", "table"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : snn::kExitSchema;
  }

  snn::ScenarioOverrides ov;
  if (*seed_opt) ov.seed = seed;
  if (*tol_opt) ov.tol = tol;
  if (*budget_opt) ov.budget = budget;
  if (*out_opt) ov.out = out;

  snn::ScenarioResult res = snn::run_scenario_file(scenario, ov);
  if (res.report.is_null()) {
    std::cerr << "schema error: " << res.error << "\n";
    return res.exit_code;
  }
  if (!res.error.empty()) std::cerr << "schema error: " << res.error << "\n";
  try {
    if (res.out_dir) snn::write_outputs(res, *res.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return snn::kExitCheck;
  }
  if (format == "json") std::cout << res.report.dump(2) << "\n";
  else std::cout << snn::render_table(res.report);
  return res.exit_code;
}
