#pragma once

// Binary checkpoint: "MPES", u32 version, u32 nx, ny, np, u64 length + config
// text, then v1, v2, theta, q as f64 at the grid nodes. All little-endian.

#include <string>

#include "mpes/config.hpp"
#include "mpes/physics.hpp"

namespace mpes {

inline constexpr unsigned checkpoint_version = 1;

struct Checkpoint {
    RunConfig config;
    State state;
};

void write_checkpoint(const std::string& path, const RunConfig& config, const State& state);

/// Throws DataIntegrityError for a truncated, corrupt or mismatched file.
Checkpoint read_checkpoint(const std::string& path);

} // namespace mpes
