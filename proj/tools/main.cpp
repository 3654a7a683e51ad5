#include <optional>
#include <string>

#include "CLI11.hpp"
#include "prescurv/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"conformal solver for prescribed negative curvature"};
  app.require_subcommand(1);

  std::string solve_config, solve_out;
  CLI::App* solve =
      app.add_subcommand("solve", "minimize the curvature defect");
  solve->add_option("--config", solve_config, "JSON run configuration")
      ->required();
  CLI::Option* out_opt =
      solve->add_option("--out", solve_out, "output directory override");

  std::string curv_config;
  CLI::App* curvature = app.add_subcommand(
      "curvature", "emit curvature fields of the configured metric");
  curvature->add_option("--config", curv_config, "JSON run configuration")
      ->required();

  std::string spec_config;
  int spec_k = 1;
  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "lowest Dirichlet eigenpairs of the metric Laplacian");
  spectrum->add_option("--config", spec_config, "JSON run configuration")
      ->required();
  spectrum->add_option("--k", spec_k, "number of eigenpairs")->required();

  std::string verify_dir;
  CLI::App* verify =
      app.add_subcommand("verify", "re-check the artifacts of a solve run");
  verify->add_option("dir", verify_dir, "run output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) {
    std::optional<std::filesystem::path> out;
    if (out_opt->count() > 0) out = solve_out;
    return prescurv::run_solve(solve_config, out);
  }
  if (curvature->parsed()) return prescurv::run_curvature(curv_config);
  if (spectrum->parsed()) return prescurv::run_spectrum(spec_config, spec_k);
  return prescurv::run_verify(verify_dir);
}
