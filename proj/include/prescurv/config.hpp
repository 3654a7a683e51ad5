#pragma once

// Strict-schema JSON run configuration: domain + metric + target + solver +
// output blocks.  Unknown keys are rejected by name; file paths are resolved
// against the config file's directory at parse time so the echoed config in
// report.json stands alone.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "prescurv/metric.hpp"
#include "prescurv/problem.hpp"
#include "prescurv/solver.hpp"

namespace prescurv {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainConfig {
  GridKind kind = GridKind::annulus;
  double r_in = 0.0, r_out = 0.0;  // annulus
  double lx = 0.0, ly = 0.0;       // rectangle
  int n1 = 0, n2 = 0;
};

struct CutoffConfig {
  double a = 0.0, b = 1.0;
  bool decreasing = true;
};

struct BlendPieceConfig {
  std::string factor;  // flat | cusp | poincare | log4 | file
  std::string path;    // factor == file
  CutoffConfig cutoff;
};

struct MetricConfig {
  std::string kind;  // flat | cusp | poincare | log4 | blend | file
  std::string path;  // kind == file
  std::vector<BlendPieceConfig> pieces;        // kind == blend
  std::optional<BlendPieceConfig> background;  // kind == blend
};

struct TargetConfig {
  std::string kind;  // scale | offset | file
  double value = 1.0;
  std::string path;  // kind == file
  double collar_width = 0.0;
};

struct OutputConfig {
  std::string directory = "out";
  bool dump_fields = true;
  int estimate_every = 1;
  std::uint64_t seed = 0;
  int spectrum_k = 0;  // 0 = no eigenvalues in the solve report
};

struct RunConfig {
  DomainConfig domain;
  MetricConfig metric;
  std::optional<TargetConfig> target;
  SolverConfig solver;
  OutputConfig output;
  std::filesystem::path base_dir;
};

RunConfig parse_config_file(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text,
                            const std::filesystem::path& base_dir);

// round-trippable echo of the parsed config (embedded in report.json)
std::string config_echo_json(const RunConfig& cfg);

GridPtr build_grid(const DomainConfig& d);
ConformalMetric build_metric(const MetricConfig& m, const GridPtr& g);
// target resolved through blend_target (file targets supply the inner field)
ScalarField build_target(const TargetConfig& t, const ConformalMetric& m);
CurvatureProblem build_problem(const RunConfig& cfg);

}  // namespace prescurv
