#pragma once

// Run configuration: plain text, one `section.key = value` per line, `#`
// starts a comment. Unknown or repeated keys are errors.
//
//   grid.nx, grid.ny, grid.np            even integers >= 8
//   domain.p0, domain.p1                 0 < p0 < p1
//   physics.preset                       default | physical (applied first)
//   physics.R, physics.cp, physics.g, physics.f_cor
//   physics.mu_v, physics.nu_v, physics.mu_theta, physics.nu_theta,
//   physics.mu_q, physics.nu_q
//   physics.theta_bar.kind|a|b           constant | linear | proportional
//   physics.theta_h.kind|a|b
//   physics.phi_s.amp|jx|jy              amp * cos(2 pi (jx x + jy y))
//   time.dt, time.t_end, time.scheme (imex_cnab2 | erk4_fully_explicit),
//   time.cfl_target, time.adapt (true | false)
//   forcing.kind                         zero | manufactured:<case> | file:<path>
//   initial.kind                         rest | random_smooth:<seed>,<amp>,<band>
//                                        | file:<path> | manufactured:<case>
//   initial.symmetry                     none | paper_parity
//   output.norms_path, output.norms_every, output.checkpoint_path,
//   output.checkpoint_every (0 = final state only)

#include <cstdint>
#include <string>

#include "mpes/params.hpp"
#include "mpes/spectral.hpp"
#include "mpes/timestepper.hpp"

namespace mpes {

struct ForcingSpec {
    enum class Kind { zero, manufactured, file };
    Kind kind = Kind::zero;
    std::string argument; // case name or path
    bool operator==(const ForcingSpec&) const = default;
};

struct InitialSpec {
    enum class Kind { rest, random_smooth, file, manufactured };
    Kind kind = Kind::rest;
    std::uint64_t seed = 1;
    double amplitude = 1.0;
    int band = 4;
    std::string argument; // path or case name
    bool paper_parity = false;
    bool operator==(const InitialSpec&) const = default;
};

struct OutputSpec {
    std::string norms_path = "norms.ndjson";
    long norms_every = 1;
    std::string checkpoint_path;
    long checkpoint_every = 0;
    bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
    Grid grid;
    PhysParams physics;
    StepConfig time;
    ForcingSpec forcing;
    InitialSpec initial;
    OutputSpec output;
    bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError naming the offending key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

} // namespace mpes
