#pragma once

// Command implementations behind the `mpes` executable. Each returns the
// process exit status: 0 success, 1 configuration or parameter error (or a
// failed verification), 2 blowup.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mpes/config.hpp"
#include "mpes/monitors.hpp"
#include "mpes/timestepper.hpp"

namespace mpes {

inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_blowup = 2;

struct CommonOptions {
    std::string config_path; // empty: built-in defaults
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

/// Initial state and forcing described by a configuration. Throw ConfigError
/// naming the key when a referenced file or case is unusable.
State make_initial_state(const RunConfig& config, const Model& model);
Forcing make_forcing(const RunConfig& config, const Model& model);

struct RunResult {
    Trajectory trajectory;
    std::vector<NormReport> series;
};

/// Runs the configured experiment, sampling norm_report every
/// output.norms_every steps and writing checkpoints at their cadence.
/// budget_residual is filled afterwards at interior samples (NaN at the ends
/// or when the sampling is not uniform).
RunResult execute_run(const RunConfig& config, const std::string& out_dir);

/// Largest |residual| / (largest term) over the v, theta and q budgets at
/// each interior sample.
void fill_budget_residual(std::vector<NormReport>& series);

int run_command(const CommonOptions& opts, std::ostream& log);

/// suites: any of "convergence", "invariants", "mutation". mutate: "",
/// "coriolis" or "dealias" (applied to the invariant suite).
int verify_command(const CommonOptions& opts, const std::vector<std::string>& suites,
                   const std::string& mutate, std::ostream& log);

/// kind: "trilinear", "minkowski" or "gronwall".
int probe_command(const CommonOptions& opts, const std::string& kind, int samples, std::ostream& log);

} // namespace mpes
