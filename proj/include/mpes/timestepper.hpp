#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mpes/physics.hpp"

namespace mpes {

enum class Scheme { imex_cnab2, erk4 };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct StepConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    Scheme scheme = Scheme::imex_cnab2;
    double cfl_target = 0.5;
    bool adapt = false;

    /// Throws ConfigError naming the offending key.
    void validate() const;
    bool operator==(const StepConfig&) const = default;
};

/// Largest dt * lambda for which classical RK4 is stable on the negative real axis.
inline constexpr double rk4_real_axis_limit = 2.78;

/// Advances the system one step at a time. CNAB2 keeps the previous explicit
/// term, so one Stepper follows one trajectory.
class Stepper {
public:
    /// Throws ConfigError when erk4 is requested with dt beyond its stability bound.
    Stepper(const Model& model, const StepConfig& config, Forcing forcing = {});

    /// Advances by `dt` (the configured dt when omitted). Throws BlowupError
    /// carrying the input time when the result is not finite.
    State step(const State& s, std::optional<double> dt = std::nullopt);

    /// Forgets the multistep history; the next CNAB2 step bootstraps again.
    void reset() { history_.reset(); }

    /// Largest diffusion eigenvalue over the dealiased band.
    double max_diffusion_rate() const;

    const Model& model() const { return model_; }
    FieldSet forcing_at(double t) const;

private:
    struct Implicit {
        std::vector<double> v, theta, q;
    };
    struct History {
        FieldSet explicit_term; // spectral-space agnostic: stored in physical space
        double dt;
    };

    FieldSet explicit_term(const FieldSet& u, double t) const;
    FieldSet implicit_apply(const FieldSet& u, double factor) const;
    FieldSet implicit_solve(const FieldSet& rhs, double factor) const;
    State step_cnab2(const State& s, double dt);
    State step_erk4(const State& s, double dt);

    const Model& model_;
    StepConfig config_;
    Forcing forcing_;
    Implicit lambda_;
    std::optional<History> history_;
};

/// cfl / max(|v1|/dx + |v2|/dy + |omega|/dp); dt_max for a fluid at rest.
double cfl_dt(const State& s, double cfl_target, double dt_max);

/// FNV-1a hash of the raw field bytes, for reproducibility checks.
std::uint64_t checksum(const FieldSet& u);

struct Trajectory {
    std::vector<double> times;
    std::vector<std::uint64_t> checksums;
    State final_state;
    bool blowup = false;
    std::string error;
    double last_good_time = 0.0;
};

/// Called with each sampled state and its step index.
using Observer = std::function<void(const State&, long)>;

/// Integrates to t_end, sampling every `every` steps (and at the final time).
/// The step count is ceil(t_end / dt); dt is shrunk so the last step lands
/// on t_end. On blowup the partial trajectory is returned with `blowup` set.
/// A state whose largest value exceeds 1e8 times its initial size counts as
/// blowup.
Trajectory run(const State& initial, const Model& model, const StepConfig& config,
               const Forcing& forcing = {}, const Observer& observer = {}, long every = 1);

} // namespace mpes
