#pragma once

// Command drivers behind the CLI.  Exit codes: 0 success, 2 invalid config
// or missing inputs, 3 solver non-convergence, 4 estimate violation (the
// report is still written).  All drivers honor PRESCURV_THREADS (a positive
// integer echoed into the report; computation is sequential regardless, so
// runs are deterministic for every accepted value).

#include <filesystem>
#include <optional>

namespace prescurv {

int run_solve(const std::filesystem::path& config_path,
              const std::optional<std::filesystem::path>& out_override);

int run_curvature(const std::filesystem::path& config_path);

int run_spectrum(const std::filesystem::path& config_path, int k);

int run_verify(const std::filesystem::path& run_dir);

}  // namespace prescurv
