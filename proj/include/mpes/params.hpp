#pragma once

#include <cmath>
#include <string>

#include "mpes/spectral.hpp"

namespace mpes {

/// Built-in vertical profile: constant a, a + b*p, or a*p.
struct Profile {
    enum class Kind { constant, linear, proportional };
    Kind kind = Kind::constant;
    double a = 0.0;
    double b = 0.0;

    double operator()(double p) const;
    double derivative(double p) const;
    bool operator==(const Profile&) const = default;

    static Profile constant(double a) { return {Kind::constant, a, 0.0}; }
    static Profile linear(double a, double b) { return {Kind::linear, a, b}; }
    static Profile proportional(double a) { return {Kind::proportional, a, 0.0}; }
};

std::string to_string(Profile::Kind kind);
Profile::Kind profile_kind_from_string(const std::string& s);

/// Surface geopotential phi_s(x, y) = amp * cos(2 pi (jx x + jy y)).
struct SurfaceGeopotential {
    double amp = 0.0;
    int jx = 1;
    int jy = 0;

    double operator()(double x, double y) const;
    bool operator==(const SurfaceGeopotential&) const = default;
};

struct PhysParams {
    double R = 1.0;
    double cp = 3.5; // may be +inf, giving R/cp = 0
    double g = 1.0;
    double f_cor = 1.0;
    double p0 = 0.2;
    double p1 = 1.0;
    double mu_v = 1e-2, nu_v = 1e-2;
    double mu_theta = 1e-2, nu_theta = 1e-2;
    double mu_q = 1e-2, nu_q = 1e-2;
    Profile theta_bar = Profile::constant(1.0);
    Profile theta_h = Profile::constant(0.0);
    SurfaceGeopotential phi_s;

    /// R = 287, cp = 1004, g = 9.8; everything else at defaults.
    static PhysParams physical_preset();

    /// Throws ParameterError on nonpositive constants or viscosities, or a
    /// reference profile that is not positive on [p0, p1].
    void validate() const;
    /// Also checks that the pressure bounds agree with the grid.
    void validate(const Grid& grid) const;

    double kappa() const { return std::isinf(cp) ? 0.0 : R / cp; }
    /// (g p / (R theta_bar(p)))^2
    double c(double p) const;
    /// (p0 / p)^kappa
    double s(double p) const;

    bool operator==(const PhysParams&) const = default;
};

/// ||(g p / R theta_bar) f||_{L2} as the grid mean of the integrand times |M|.
double weighted_norm_w(const Field3D& f, const PhysParams& params);

} // namespace mpes
