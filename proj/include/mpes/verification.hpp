#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpes/physics.hpp"
#include "mpes/timestepper.hpp"

namespace mpes {

// ------------------------------------------------------------ random data

/// Seeded random field with modes |jx|, |jy|, |jp| <= band, coefficients drawn
/// in an order that does not depend on the grid (so the same seed gives the
/// same function at every resolution that resolves the band). Spectrum decays
/// like 1 / (1 + |j|^2).
Field3D random_field(const Grid& grid, std::uint64_t seed, int band);

/// Smooth random state: projected velocity, optional symmetry (v, q even;
/// theta odd), each of v, theta, q scaled to ||.||_{H2} = amplitude.
FieldSet random_state(const Grid& grid, std::uint64_t seed, double amplitude, int band,
                      bool paper_parity = false);

// ------------------------------------------------------ manufactured cases

enum class ManufacturedKind { rest, steady, smooth, rough };

std::string to_string(ManufacturedKind k);
/// Throws ParameterError for an unknown name.
ManufacturedKind manufactured_kind_from_string(const std::string& s);

/// Closed-form profile U(x, y, p) and time modulation m(t); the exact solution
/// is m(t) U. The smooth profile has modes up to 7 in every direction with
/// geometric decay; its velocity is a streamfunction flow plus modes with zero
/// vertical mean, so the vertically averaged divergence vanishes exactly.
struct ManufacturedCase {
    ManufacturedKind kind = ManufacturedKind::smooth;

    double m(double t) const;
    double dm(double t) const;
    /// Profile sampled at the grid nodes (not truncated).
    FieldSet profile(const Grid& grid) const;
    /// Closed-form m(t) U at the grid nodes.
    FieldSet exact(const Grid& grid, double t) const;
};

/// Forcing that makes m(t) P(U) an exact solution of the semi-discrete
/// system. The tendency is a quadratic polynomial in the state, so it is
/// captured by its values at 0 and +-P(U).
class ManufacturedSolution {
public:
    ManufacturedSolution(const Model& model, ManufacturedCase c);

    const ManufacturedCase& manufactured_case() const { return case_; }
    /// m(t) P(U): the discrete exact solution.
    FieldSet discrete_exact(double t) const;
    FieldSet forcing(double t) const;
    Forcing as_forcing() const;
    State initial_state(double t0 = 0.0) const { return State(discrete_exact(t0), t0); }

private:
    ManufacturedCase case_;
    FieldSet u_, c0_, lin_, quad_;
};

/// forcing = d/dt(exact) + (all model operators applied to exact).
FieldSet manufactured_forcing(const ManufacturedCase& c, double t, const Model& model);

// ---------------------------------------------------------------- oracles

/// Fourth-order finite-difference / composite-Simpson evaluation of a model
/// operator on a grid refined `refine` times (even) in each direction, sampled
/// back at the coarse nodes. Fields are carried to the fine grid by
/// trigonometric interpolation; coefficients are evaluated in closed form.
///
/// op: "derivative" (inputs[0], along `axis`), "viscosity_v",
/// "viscosity_theta", "viscosity_q" (inputs[0]), "omega" (inputs[0..1] =
/// v1, v2), "phi" (inputs[0] = theta). Throws std::invalid_argument for an
/// unknown op.
Field3D fd_oracle(const std::string& op, const std::vector<Field3D>& inputs, const Model& model,
                  int refine = 4, Axis axis = Axis::x);

/// Largest absolute nodal difference over all four fields.
double max_error(const FieldSet& a, const FieldSet& b);

// ------------------------------------------------------ convergence suite

struct ConvergenceConfig {
    PhysParams params;
    std::vector<int> sizes{16, 24, 32};
    double spatial_dt = 1e-4;
    double t_end = 0.1;
    int temporal_n = 16;
    std::vector<double> cnab2_dts{2e-4, 1e-4, 5e-5};
    std::vector<double> erk4_dts{0.04, 0.02, 0.01};
    double erk4_t_end = 1.0;
    ManufacturedKind kind = ManufacturedKind::smooth;
};

struct ConvergenceRow {
    std::string name;
    double value = 0.0;
    double lo = 0.0, hi = 0.0; // pass iff lo <= value <= hi
    bool pass = true;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool all_pass() const;
};

/// Runs the case from its discrete exact initial data and returns the max
/// nodal error at t_end against the closed-form (spatial = true) or the
/// discrete exact solution.
double manufactured_error(const Grid& grid, const PhysParams& params, ManufacturedKind kind,
                          Scheme scheme, double dt, double t_end, bool against_closed_form);

ConvergenceReport convergence_suite(const ConvergenceConfig& config);

// -------------------------------------------------------- invariant checks
//
// Each check returns rows whose `pass` flag is the verdict. Random data uses
// the resolvable band of the model: dealias_band(n) with dealiasing, n/2 - 1 without.

int resolvable_band(const Grid& grid, const ModelOptions& options);

/// max |<(v . grad + omega d_p) s, s>| / (||v||_H1 ||s||_H1^2) over random
/// projected v and scalars s; pass iff <= 1e-10.
ConvergenceRow skew_symmetry_check(const Model& model, int pairs, std::uint64_t seed);

/// max |<Coriolis(v), v>| / ||v||^2 over random v; pass iff <= 1e-12.
ConvergenceRow coriolis_work_check(const Model& model, int samples, std::uint64_t seed);

/// Unforced run from random data: largest relative one-step growth of
/// ||theta||_L2 and ||q||_L2; pass iff <= 1e-10.
std::vector<ConvergenceRow> monotonicity_check(const Model& model, const StepConfig& time,
                                               std::uint64_t seed, double amplitude);

/// Unforced run sampled every step: max over interior samples of
/// |budget residual| / largest budget term for v, theta, q; pass iff <= 1e-6.
std::vector<ConvergenceRow> budget_check(const Model& model, const StepConfig& time,
                                         std::uint64_t seed, double amplitude, int band);

/// Hydrostatic residual of the reconstructed geopotential relative to
/// ||T||_L2 on random data; pass iff <= 1e-10.
ConvergenceRow hydrostatic_check(const Model& model, int samples, std::uint64_t seed);

struct InvariantConfig {
    PhysParams params;
    ModelOptions options;
    std::uint64_t seed = 1;
    int n = 16;
    int skew_n = 32;
    int skew_pairs = 50;
    StepConfig monotonicity_time{1e-3, 1.0, Scheme::imex_cnab2, 0.5, false};
    double monotonicity_amplitude = 1.0;
    StepConfig budget_time{1e-4, 0.01, Scheme::imex_cnab2, 0.5, false};
    double budget_amplitude = 50.0;
    int budget_band = 3;
};

ConvergenceReport invariant_suite(const InvariantConfig& config);

} // namespace mpes
