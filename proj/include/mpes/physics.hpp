#pragma once

// Moist primitive equations in pressure coordinates: diagnostics, viscosity
// operators, tendencies and the barotropic projection.
//
// Every tendency is truncated to the dealiased band, so a state that starts
// band-limited stays band-limited and the discrete inner products satisfy the
// same integration-by-parts identities as the continuous ones.

#include <functional>
#include <utility>
#include <vector>

#include "mpes/params.hpp"
#include "mpes/spectral.hpp"

namespace mpes {

/// Four fields in the order (v1, v2, theta, q). Used for states, tendencies
/// and forcing alike.
struct FieldSet {
    Field3D v1, v2, theta, q;

    FieldSet() = default;
    explicit FieldSet(const Grid& g) : v1(g), v2(g), theta(g), q(g) {}
    FieldSet(Field3D a, Field3D b, Field3D c, Field3D d)
        : v1(std::move(a)), v2(std::move(b)), theta(std::move(c)), q(std::move(d)) {}

    const Grid& grid() const { return v1.grid(); }
    bool all_finite() const;
    double max_abs() const;

    FieldSet& operator+=(const FieldSet& o);
    FieldSet& operator-=(const FieldSet& o);
    FieldSet& operator*=(double a);
    FieldSet& axpy(double a, const FieldSet& o);
    friend FieldSet operator+(FieldSet a, const FieldSet& b) { return a += b; }
    friend FieldSet operator-(FieldSet a, const FieldSet& b) { return a -= b; }
    friend FieldSet operator*(double a, FieldSet f) { return f *= a; }

    template <class F>
    void for_each(F&& f) {
        f(v1);
        f(v2);
        f(theta);
        f(q);
    }
    template <class F>
    void for_each(F&& f) const {
        f(v1);
        f(v2);
        f(theta);
        f(q);
    }
};

struct State {
    FieldSet u;
    double t = 0.0;

    State() = default;
    explicit State(const Grid& g, double t_ = 0.0) : u(g), t(t_) {}
    State(FieldSet fields, double t_) : u(std::move(fields)), t(t_) {}
    const Grid& grid() const { return u.grid(); }
};

struct Diagnostics {
    Field3D omega;
    Field3D phi;
    Field3D temperature;
};

/// Forcing as a function of time. An empty function means zero forcing.
using Forcing = std::function<FieldSet(double)>;

/// Switches used by mutation checks. Defaults give the correct model.
struct ModelOptions {
    bool dealias = true;
    /// Uses (v2, v1) in place of v_perp = (-v2, v1).
    bool coriolis_component_bug = false;
};

/// omega = -int_{p0}^{p} div v dp'. Throws ConstraintError when the vertical
/// mean of div v is not zero to round-off.
Field3D diagnose_omega(const Field3D& v1, const Field3D& v2);

/// Largest modulus of the horizontal divergence of the vertical mean of v,
/// over all horizontal modes.
double barotropic_divergence(const Field3D& v1, const Field3D& v2);

/// Replaces the vertical mean of v by its divergence-free part.
std::pair<Field3D, Field3D> barotropic_project(const Field3D& v1, const Field3D& v2);

/// Holds the sampled coefficients and quadrature tables for one grid and
/// parameter set. Const member functions are safe to call concurrently.
class Model {
public:
    Model(const Grid& grid, const PhysParams& params, ModelOptions options = {});

    const Grid& grid() const { return grid_; }
    const PhysParams& params() const { return params_; }
    const ModelOptions& options() const { return options_; }

    /// (g p / R theta_bar)^2 and (p0/p)^kappa on the p nodes.
    const std::vector<double>& c_nodes() const { return c_; }
    const std::vector<double>& s_nodes() const { return s_; }

    Field3D theta_from_T(const Field3D& T) const;
    Field3D T_from_theta(const Field3D& theta) const;

    Field3D omega(const Field3D& v1, const Field3D& v2) const { return diagnose_omega(v1, v2); }
    /// phi_s + int_p^{p1} R T / p' dp', integrating the trigonometric
    /// interpolant of theta in p exactly up to quadrature round-off.
    Field3D phi(const Field3D& theta) const;
    Diagnostics diagnose(const FieldSet& u) const;

    /// Cell-integrated hydrostatic residual r_k = [Phi(p_{k+1}) - Phi(p_k) +
    /// int_cell R T/p dp] / dp, with Phi(p1) = phi_s. The cell integral is
    /// evaluated independently of `phi`.
    Field3D hydrostatic_residual(const Field3D& phi, const Field3D& theta) const;
    /// Same residual for d/dp(grad Phi) + (R/p) grad T along one horizontal axis.
    Field3D hydrostatic_gradient_residual(const Field3D& phi, const Field3D& theta, Axis axis) const;

    Field3D viscosity_v(const Field3D& f) const;
    Field3D viscosity_theta(const Field3D& f) const;
    Field3D viscosity_q(const Field3D& f) const;

    /// P(v1 s_x + v2 s_y + omega s_p).
    Field3D advect(const Field3D& v1, const Field3D& v2, const Field3D& omega,
                   const Field3D& s) const;

    /// -f v_perp, honouring the Coriolis mutation switch.
    std::pair<Field3D, Field3D> coriolis(const Field3D& v1, const Field3D& v2) const;

    /// Pressure gradient grad Phi, truncated to the dealiased band.
    std::pair<Field3D, Field3D> pressure_gradient(const Field3D& phi) const;

    /// Right-hand side of the prognostic system. The barotropic part of the
    /// velocity tendency is projected, which plays the role of the surface
    /// pressure.
    FieldSet tendency(const FieldSet& u, const FieldSet* forcing = nullptr) const;

    /// Truncation used for every product (identity when dealiasing is off).
    Field3D truncate(const Field3D& f) const;
    SpectralField truncate(const SpectralField& f) const;

private:
    void build_residual_tables();
    Field3D vertical_flux_term(const Field3D& f, double nu, bool conjugated) const;
    Field3D cell_residual(const Field3D& phi_like, const Field3D& theta_like, bool with_theta_h,
                          const std::function<double(double, double)>& surface) const;

    Grid grid_;
    PhysParams params_;
    ModelOptions options_;
    std::vector<double> c_, s_;
    // phi_kernel_[k * np + j] = int_{p_k}^{p1} (p/p0)^kappa / p * l_j(p) dp.
    std::vector<double> phi_kernel_;
    // int_{p_k}^{p1} theta_h(p) (p/p0)^kappa / p dp.
    std::vector<double> phi_reference_;

    // Tables for the residual path: Gauss nodes of every cell, their weights
    // times R (p/p0)^kappa / p, and the Fourier modes evaluated there.
    int nodes_per_cell_ = 0;
    std::vector<double> node_weight_;
    std::vector<double> node_cos_, node_sin_;
    std::vector<double> dft_cos_, dft_sin_;
    std::vector<double> cell_reference_;
};

} // namespace mpes
