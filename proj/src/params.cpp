#include "mpes/params.hpp"

#include <cmath>
#include <numbers>

#include "mpes/errors.hpp"

namespace mpes {

double Profile::operator()(double p) const {
    switch (kind) {
    case Kind::constant: return a;
    case Kind::linear: return a + b * p;
    case Kind::proportional: return a * p;
    }
    return a;
}

double Profile::derivative(double) const {
    switch (kind) {
    case Kind::constant: return 0.0;
    case Kind::linear: return b;
    case Kind::proportional: return a;
    }
    return 0.0;
}

std::string to_string(Profile::Kind kind) {
    switch (kind) {
    case Profile::Kind::constant: return "constant";
    case Profile::Kind::linear: return "linear";
    case Profile::Kind::proportional: return "proportional";
    }
    return "constant";
}

Profile::Kind profile_kind_from_string(const std::string& s) {
    if (s == "constant") return Profile::Kind::constant;
    if (s == "linear") return Profile::Kind::linear;
    if (s == "proportional") return Profile::Kind::proportional;
    throw ParameterError("unknown profile kind '" + s + "'");
}

double SurfaceGeopotential::operator()(double x, double y) const {
    return amp * std::cos(2.0 * std::numbers::pi * (jx * x + jy * y));
}

PhysParams PhysParams::physical_preset() {
    PhysParams p;
    p.R = 287.0;
    p.cp = 1004.0;
    p.g = 9.8;
    return p;
}

void PhysParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw ParameterError(std::string(name) + " must be positive");
    };
    positive(R, "R");
    positive(cp, "cp");
    positive(g, "g");
    positive(mu_v, "mu_v");
    positive(nu_v, "nu_v");
    positive(mu_theta, "mu_theta");
    positive(nu_theta, "nu_theta");
    positive(mu_q, "mu_q");
    positive(nu_q, "nu_q");
    if (!std::isfinite(f_cor)) throw ParameterError("f_cor must be finite");
    if (!(p0 > 0.0) || !(p1 > p0)) throw ParameterError("pressure bounds must satisfy 0 < p0 < p1");
    // Profiles are affine, so positivity at both ends covers the interval.
    if (!(theta_bar(p0) > 0.0) || !(theta_bar(p1) > 0.0))
        throw ParameterError("theta_bar must be positive on [p0, p1]");
    if (!std::isfinite(theta_h(p0)) || !std::isfinite(theta_h(p1)))
        throw ParameterError("theta_h must be bounded");
}

void PhysParams::validate(const Grid& grid) const {
    validate();
    if (grid.p0 != p0 || grid.p1 != p1)
        throw ParameterError("grid and physical pressure bounds differ");
}

double PhysParams::c(double p) const {
    double r = g * p / (R * theta_bar(p));
    return r * r;
}

double PhysParams::s(double p) const { return std::pow(p0 / p, kappa()); }

double weighted_norm_w(const Field3D& f, const PhysParams& params) {
    params.validate(f.grid());
    const Grid& g = f.grid();
    double sum = 0.0;
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ip = 0; ip < g.np; ++ip) {
                double v = f.at(ix, iy, ip);
                sum += params.c(g.p(ip)) * v * v;
            }
    return std::sqrt(sum * g.volume() / double(g.size()));
}

} // namespace mpes
