#include "mpes/physics.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mpes/errors.hpp"

namespace mpes {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

using Gauss = boost::math::quadrature::gauss<double, 16>;

template <class F>
double gauss(F&& f, double a, double b) {
    return Gauss::integrate(f, a, b);
}

// Trigonometric cardinal function of node j on an n-point periodic grid.
double cardinal(double p, double pj, int n, double period) {
    double d = p - pj;
    double sum = 1.0;
    for (int m = 1; m < n / 2; ++m) sum += 2.0 * std::cos(two_pi * m * d / period);
    sum += std::cos(two_pi * (n / 2) * d / period);
    return sum / n;
}

Field3D scale_in_p(const Field3D& f, const std::vector<double>& w) {
    const Grid& g = f.grid();
    Field3D out(g);
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ip = 0; ip < g.np; ++ip) out.at(ix, iy, ip) = w[ip] * f.at(ix, iy, ip);
    return out;
}

} // namespace

// ------------------------------------------------------------------ FieldSet

bool FieldSet::all_finite() const {
    return v1.all_finite() && v2.all_finite() && theta.all_finite() && q.all_finite();
}

double FieldSet::max_abs() const {
    return std::max({v1.max_abs(), v2.max_abs(), theta.max_abs(), q.max_abs()});
}

FieldSet& FieldSet::operator+=(const FieldSet& o) {
    v1 += o.v1;
    v2 += o.v2;
    theta += o.theta;
    q += o.q;
    return *this;
}

FieldSet& FieldSet::operator-=(const FieldSet& o) {
    v1 -= o.v1;
    v2 -= o.v2;
    theta -= o.theta;
    q -= o.q;
    return *this;
}

FieldSet& FieldSet::operator*=(double a) {
    for_each([a](Field3D& f) { f *= a; });
    return *this;
}

FieldSet& FieldSet::axpy(double a, const FieldSet& o) {
    v1.axpy(a, o.v1);
    v2.axpy(a, o.v2);
    theta.axpy(a, o.theta);
    q.axpy(a, o.q);
    return *this;
}

// ----------------------------------------------------- velocity constraint

namespace {

// Horizontal divergence in spectral space, all kp slots.
SpectralField divergence_spectrum(const Field3D& v1, const Field3D& v2) {
    SpectralField d = derivative(forward(v1), Axis::x);
    d += derivative(forward(v2), Axis::y);
    return d;
}

} // namespace

double barotropic_divergence(const Field3D& v1, const Field3D& v2) {
    SpectralField d = divergence_spectrum(v1, v2);
    const Grid& g = d.grid();
    double m = 0.0;
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy) m = std::max(m, std::abs(d.at(ix, iy, 0)));
    return m;
}

std::pair<Field3D, Field3D> barotropic_project(const Field3D& v1, const Field3D& v2) {
    SpectralField a = forward(v1);
    SpectralField b = forward(v2);
    const Grid& g = a.grid();
    for (int ix = 0; ix < g.nx; ++ix) {
        double kx = derivative_wavenumber(ix, g.nx, g.lx());
        for (int iy = 0; iy < g.ny; ++iy) {
            double ky = derivative_wavenumber(iy, g.ny, g.ly());
            double k2 = kx * kx + ky * ky;
            if (k2 == 0.0) continue;
            Complex kv = kx * a.at(ix, iy, 0) + ky * b.at(ix, iy, 0);
            a.at(ix, iy, 0) -= kx * kv / k2;
            b.at(ix, iy, 0) -= ky * kv / k2;
        }
    }
    return {backward(a), backward(b)};
}

Field3D diagnose_omega(const Field3D& v1, const Field3D& v2) {
    const Grid& g = v1.grid();
    SpectralField d = divergence_spectrum(v1, v2);

    double residual = 0.0;
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy) residual = std::max(residual, std::abs(d.at(ix, iy, 0)));
    double scale = std::hypot(sobolev_norm(v1, 1), sobolev_norm(v2, 1));
    if (residual > 1e-10 * scale)
        throw ConstraintError("vertical mean of div v is not zero (unprojected velocity)", residual);

    SpectralField anti(g), mean(g);
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy) {
            mean.at(ix, iy, 0) = d.at(ix, iy, 0);
            for (int kp = 1; kp < g.npc(); ++kp) {
                double k = derivative_wavenumber(kp, g.np, g.lp());
                if (k != 0.0) anti.at(ix, iy, kp) = d.at(ix, iy, kp) / Complex(0.0, k);
            }
        }
    Field3D F = backward(anti);
    Field3D M = backward(mean);
    Field3D omega(g);
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy) {
            double base = F.at(ix, iy, 0);
            for (int ip = 0; ip < g.np; ++ip)
                omega.at(ix, iy, ip) =
                    -(F.at(ix, iy, ip) - base) - M.at(ix, iy, ip) * (g.p(ip) - g.p0);
        }
    return omega;
}

// -------------------------------------------------------------------- Model

Model::Model(const Grid& grid, const PhysParams& params, ModelOptions options)
    : grid_(grid), params_(params), options_(options) {
    grid_.validate();
    params_.validate(grid_);
    const int n = grid_.np;
    c_.resize(n);
    s_.resize(n);
    for (int ip = 0; ip < n; ++ip) {
        c_[ip] = params_.c(grid_.p(ip));
        s_[ip] = params_.s(grid_.p(ip));
    }

    const double kappa = params_.kappa();
    const double p0 = params_.p0;
    auto weight = [kappa, p0](double p) { return std::pow(p / p0, kappa) / p; };
    std::vector<double> cell(std::size_t(n) * n);
    std::vector<double> cell_ref(n);
    for (int c = 0; c < n; ++c) {
        double a = grid_.p(c), b = a + grid_.dp();
        for (int j = 0; j < n; ++j) {
            double pj = grid_.p(j);
            cell[std::size_t(c) * n + j] = gauss(
                [&](double p) { return weight(p) * cardinal(p, pj, n, grid_.lp()); }, a, b);
        }
        cell_ref[c] = gauss([&](double p) { return weight(p) * params_.theta_h(p); }, a, b);
    }
    build_residual_tables();

    phi_kernel_.assign(std::size_t(n) * n, 0.0);
    phi_reference_.assign(n, 0.0);
    for (int k = n - 1; k >= 0; --k) {
        for (int j = 0; j < n; ++j) {
            double above = k + 1 < n ? phi_kernel_[std::size_t(k + 1) * n + j] : 0.0;
            phi_kernel_[std::size_t(k) * n + j] = above + cell[std::size_t(k) * n + j];
        }
        phi_reference_[k] = (k + 1 < n ? phi_reference_[k + 1] : 0.0) + cell_ref[k];
    }
}

void Model::build_residual_tables() {
    const int n = grid_.np;
    const int half = n / 2;
    std::vector<double> x, w;
    for (std::size_t i = 0; i < Gauss::abscissa().size(); ++i) {
        double xi = Gauss::abscissa()[i], wi = Gauss::weights()[i];
        x.push_back(xi);
        w.push_back(wi);
        if (xi != 0.0) {
            x.push_back(-xi);
            w.push_back(wi);
        }
    }
    nodes_per_cell_ = int(x.size());
    const std::size_t total = std::size_t(n) * nodes_per_cell_;
    node_weight_.resize(total);
    node_cos_.resize(total * (half + 1));
    node_sin_.resize(total * (half + 1));
    cell_reference_.assign(n, 0.0);
    const double h = grid_.dp();
    for (int k = 0; k < n; ++k)
        for (int g = 0; g < nodes_per_cell_; ++g) {
            std::size_t node = std::size_t(k) * nodes_per_cell_ + g;
            double p = grid_.p(k) + 0.5 * h * (1.0 + x[g]);
            double weight = 0.5 * h * w[g] * params_.R * std::pow(p / params_.p0, params_.kappa()) / p;
            node_weight_[node] = weight;
            cell_reference_[k] += weight * params_.theta_h(p);
            double z = two_pi * (p - grid_.p0) / grid_.lp();
            for (int m = 0; m <= half; ++m) {
                node_cos_[node * (half + 1) + m] = std::cos(m * z);
                node_sin_[node * (half + 1) + m] = std::sin(m * z);
            }
        }
    dft_cos_.resize(std::size_t(half + 1) * n);
    dft_sin_.resize(std::size_t(half + 1) * n);
    for (int m = 0; m <= half; ++m)
        for (int j = 0; j < n; ++j) {
            dft_cos_[std::size_t(m) * n + j] = std::cos(two_pi * m * j / n);
            dft_sin_[std::size_t(m) * n + j] = std::sin(two_pi * m * j / n);
        }
}

Field3D Model::truncate(const Field3D& f) const {
    return options_.dealias ? dealias(f) : f;
}

SpectralField Model::truncate(const SpectralField& f) const {
    return options_.dealias ? dealias(f) : f;
}

Field3D Model::theta_from_T(const Field3D& T) const {
    Field3D out(grid_);
    for (int ix = 0; ix < grid_.nx; ++ix)
        for (int iy = 0; iy < grid_.ny; ++iy)
            for (int ip = 0; ip < grid_.np; ++ip)
                out.at(ix, iy, ip) = T.at(ix, iy, ip) * s_[ip] - params_.theta_h(grid_.p(ip));
    return out;
}

Field3D Model::T_from_theta(const Field3D& theta) const {
    Field3D out(grid_);
    for (int ix = 0; ix < grid_.nx; ++ix)
        for (int iy = 0; iy < grid_.ny; ++iy)
            for (int ip = 0; ip < grid_.np; ++ip)
                out.at(ix, iy, ip) =
                    (theta.at(ix, iy, ip) + params_.theta_h(grid_.p(ip))) / s_[ip];
    return out;
}

Field3D Model::phi(const Field3D& theta) const {
    if (!theta.all_finite()) throw DataIntegrityError("phi of a non-finite theta");
    const int n = grid_.np;
    const double R = params_.R;
    Field3D out(grid_);
    for (int ix = 0; ix < grid_.nx; ++ix)
        for (int iy = 0; iy < grid_.ny; ++iy) {
            double surface = params_.phi_s(grid_.x(ix), grid_.y(iy));
            const double* col = &theta.data()[grid_.index(ix, iy, 0)];
            for (int k = 0; k < n; ++k) {
                const double* row = &phi_kernel_[std::size_t(k) * n];
                double acc = phi_reference_[k];
                for (int j = 0; j < n; ++j) acc += row[j] * col[j];
                out.at(ix, iy, k) = surface + R * acc;
            }
        }
    return out;
}

Diagnostics Model::diagnose(const FieldSet& u) const {
    return {omega(u.v1, u.v2), phi(u.theta), T_from_theta(u.theta)};
}

Field3D Model::cell_residual(const Field3D& phi_like, const Field3D& theta_like, bool with_theta_h,
                             const std::function<double(double, double)>& surface) const {
    const int n = grid_.np;
    const int half = n / 2;
    const int q = nodes_per_cell_;
    Field3D out(grid_);
    std::vector<double> a(half + 1), b(half + 1);
    for (int ix = 0; ix < grid_.nx; ++ix)
        for (int iy = 0; iy < grid_.ny; ++iy) {
            // Real Fourier coefficients of the column in p.
            const double* col = &theta_like.data()[grid_.index(ix, iy, 0)];
            for (int m = 0; m <= half; ++m) {
                double re = 0.0, im = 0.0;
                for (int j = 0; j < n; ++j) {
                    re += col[j] * dft_cos_[std::size_t(m) * n + j];
                    im += col[j] * dft_sin_[std::size_t(m) * n + j];
                }
                double w = (m == 0 || m == half) ? 1.0 : 2.0;
                a[m] = w * re / n;
                b[m] = m == half ? 0.0 : w * im / n;
            }
            for (int k = 0; k < n; ++k) {
                double integral = with_theta_h ? cell_reference_[k] : 0.0;
                for (int g = 0; g < q; ++g) {
                    std::size_t node = std::size_t(k) * q + g;
                    const double* cs = &node_cos_[node * (half + 1)];
                    const double* sn = &node_sin_[node * (half + 1)];
                    double v = 0.0;
                    for (int m = 0; m <= half; ++m) v += a[m] * cs[m] + b[m] * sn[m];
                    integral += node_weight_[node] * v;
                }
                double upper = k + 1 < n ? phi_like.at(ix, iy, k + 1)
                                         : surface(grid_.x(ix), grid_.y(iy));
                out.at(ix, iy, k) = (upper - phi_like.at(ix, iy, k) + integral) / grid_.dp();
            }
        }
    return out;
}

Field3D Model::hydrostatic_residual(const Field3D& phi, const Field3D& theta) const {
    return cell_residual(phi, theta, true,
                         [this](double x, double y) { return params_.phi_s(x, y); });
}

Field3D Model::hydrostatic_gradient_residual(const Field3D& phi, const Field3D& theta,
                                             Axis axis) const {
    if (axis == Axis::p) throw ParameterError("gradient residual needs a horizontal axis");
    const SurfaceGeopotential& s = params_.phi_s;
    auto surface = [&s, axis](double x, double y) {
        double arg = two_pi * (s.jx * x + s.jy * y);
        double k = two_pi * (axis == Axis::x ? s.jx : s.jy);
        return -s.amp * k * std::sin(arg);
    };
    return cell_residual(derivative(phi, axis), derivative(theta, axis), false, surface);
}

Field3D Model::vertical_flux_term(const Field3D& f, double nu, bool conjugated) const {
    SpectralField inner = conjugated ? truncate(forward(scale_in_p(f, s_))) : forward(f);
    Field3D flux = scale_in_p(backward(derivative(inner, Axis::p)), c_);
    Field3D out = backward(derivative(truncate(forward(flux)), Axis::p));
    if (conjugated) out = scale_in_p(out, s_);
    out *= -nu;
    return out;
}

Field3D Model::viscosity_v(const Field3D& f) const {
    Field3D h = backward(horizontal_laplacian(forward(f)));
    h *= -params_.mu_v;
    return h + vertical_flux_term(f, params_.nu_v, false);
}

Field3D Model::viscosity_theta(const Field3D& f) const {
    Field3D h = backward(horizontal_laplacian(forward(f)));
    h *= -params_.mu_theta;
    return h + vertical_flux_term(f, params_.nu_theta, true);
}

Field3D Model::viscosity_q(const Field3D& f) const {
    Field3D h = backward(horizontal_laplacian(forward(f)));
    h *= -params_.mu_q;
    return h + vertical_flux_term(f, params_.nu_q, false);
}

Field3D Model::advect(const Field3D& v1, const Field3D& v2, const Field3D& omega,
                      const Field3D& s) const {
    SpectralField sh = forward(s);
    Field3D sum = v1 * backward(derivative(sh, Axis::x));
    sum += v2 * backward(derivative(sh, Axis::y));
    sum += omega * backward(derivative(sh, Axis::p));
    return truncate(sum);
}

std::pair<Field3D, Field3D> Model::coriolis(const Field3D& v1, const Field3D& v2) const {
    const double f = params_.f_cor;
    // v_perp = (-v2, v1); the term is -f v_perp.
    Field3D perp1 = options_.coriolis_component_bug ? v2 : -1.0 * v2;
    Field3D perp2 = v1;
    perp1 *= -f;
    perp2 *= -f;
    return {perp1, perp2};
}

std::pair<Field3D, Field3D> Model::pressure_gradient(const Field3D& phi) const {
    SpectralField ph = forward(phi);
    return {backward(truncate(derivative(ph, Axis::x))), backward(truncate(derivative(ph, Axis::y)))};
}

FieldSet Model::tendency(const FieldSet& u, const FieldSet* forcing) const {
    Field3D w = omega(u.v1, u.v2);
    auto [gx, gy] = pressure_gradient(phi(u.theta));
    auto [c1, c2] = coriolis(u.v1, u.v2);

    FieldSet out(grid_);
    out.v1 = c1 - advect(u.v1, u.v2, w, u.v1) - gx - viscosity_v(u.v1);
    out.v2 = c2 - advect(u.v1, u.v2, w, u.v2) - gy - viscosity_v(u.v2);
    out.theta = -1.0 * advect(u.v1, u.v2, w, u.theta) - viscosity_theta(u.theta);
    out.q = -1.0 * advect(u.v1, u.v2, w, u.q) - viscosity_q(u.q);
    if (forcing) out += *forcing;
    out.for_each([this](Field3D& f) { f = truncate(f); });
    std::tie(out.v1, out.v2) = barotropic_project(out.v1, out.v2);
    return out;
}

} // namespace mpes
