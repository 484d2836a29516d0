#include "mpes/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include "mpes/errors.hpp"

namespace mpes {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// FFTW plans are created once per grid shape and executed through the
// new-array interface, which is thread safe. Plan creation is serialised.
struct PlanPair {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plans] : plans_) {
            fftw_destroy_plan(plans.r2c);
            fftw_destroy_plan(plans.c2r);
        }
    }

    const PlanPair& get(const Grid& g) {
        std::lock_guard lock(mutex_);
        auto key = std::make_tuple(g.nx, g.ny, g.np);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<double> r(g.size());
        std::vector<Complex> c(g.spectral_size());
        auto* cptr = reinterpret_cast<fftw_complex*>(c.data());
        PlanPair pp;
        unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        pp.r2c = fftw_plan_dft_r2c_3d(g.nx, g.ny, g.np, r.data(), cptr, flags);
        pp.c2r = fftw_plan_dft_c2r_3d(g.nx, g.ny, g.np, cptr, r.data(), flags | FFTW_DESTROY_INPUT);
        return plans_.emplace(key, pp).first->second;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, PlanPair> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

void require_same_grid(const Grid& a, const Grid& b) {
    if (!(a == b)) throw ParameterError("field grids differ");
}

} // namespace

Grid::Grid(int nx_, int ny_, int np_, double p0_, double p1_)
    : nx(nx_), ny(ny_), np(np_), p0(p0_), p1(p1_) {
    validate();
}

void Grid::validate() const {
    for (auto [n, name] : {std::pair{nx, "nx"}, {ny, "ny"}, {np, "np"}}) {
        if (n < 8 || n % 2 != 0)
            throw ParameterError(std::string(name) + " must be even and >= 8, got " +
                                 std::to_string(n));
    }
    if (!(p0 > 0.0) || !(p1 > p0) || !std::isfinite(p1))
        throw ParameterError("pressure bounds must satisfy 0 < p0 < p1");
}

double derivative_wavenumber(int i, int n, double period) {
    int j = mode_number(i, n);
    if (2 * std::abs(j) == n) return 0.0;
    return two_pi * j / period;
}

double norm_wavenumber(int i, int n, double period) {
    return two_pi * std::abs(mode_number(i, n)) / period;
}

// ---------------------------------------------------------------- Field3D

Field3D::Field3D(const Grid& grid, double value) : grid_(grid), data_(grid.size(), value) {}

Field3D::Field3D(const Grid& grid, std::vector<double> data)
    : grid_(grid), data_(std::move(data)) {
    if (data_.size() != grid_.size()) throw ParameterError("field data size does not match grid");
}

Field3D Field3D::from_function(const Grid& grid,
                               const std::function<double(double, double, double)>& f) {
    Field3D out(grid);
    for (int ix = 0; ix < grid.nx; ++ix)
        for (int iy = 0; iy < grid.ny; ++iy)
            for (int ip = 0; ip < grid.np; ++ip)
                out.at(ix, iy, ip) = f(grid.x(ix), grid.y(iy), grid.p(ip));
    return out;
}

bool Field3D::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Field3D::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

Field3D& Field3D::operator+=(const Field3D& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Field3D& Field3D::operator-=(const Field3D& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

Field3D& Field3D::operator*=(double a) {
    for (double& v : data_) v *= a;
    return *this;
}

Field3D& Field3D::axpy(double a, const Field3D& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * o.data_[i];
    return *this;
}

Field3D operator*(const Field3D& a, const Field3D& b) {
    require_same_grid(a.grid(), b.grid());
    Field3D out(a.grid());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

// ----------------------------------------------------------- SpectralField

SpectralField::SpectralField(const Grid& grid) : grid_(grid), data_(grid.spectral_size()) {}

SpectralField::SpectralField(const Grid& grid, std::vector<Complex> data)
    : grid_(grid), data_(std::move(data)) {
    if (data_.size() != grid_.spectral_size())
        throw ParameterError("spectral data size does not match grid");
}

void SpectralField::set_mode(int jx, int jy, int jp, Complex value) {
    const Grid& g = grid_;
    if (jp < 0) {
        jx = -jx;
        jy = -jy;
        jp = -jp;
        value = std::conj(value);
    }
    if (2 * std::abs(jx) > g.nx || 2 * std::abs(jy) > g.ny || 2 * jp > g.np)
        throw ParameterError("mode outside the resolved band");
    auto slot = [](int j, int n) { return ((j % n) + n) % n; };
    at(slot(jx, g.nx), slot(jy, g.ny), jp) = value;
    if (jp == 0 || 2 * jp == g.np) {
        // Both members of the conjugate pair live in the stored half.
        if (jx == 0 && jy == 0) {
            at(0, 0, jp) = Complex(value.real(), 0.0);
        } else {
            at(slot(-jx, g.nx), slot(-jy, g.ny), jp) = std::conj(value);
        }
    }
}

Complex SpectralField::mode(int jx, int jy, int jp) const {
    const Grid& g = grid_;
    bool flip = jp < 0;
    if (flip) {
        jx = -jx;
        jy = -jy;
        jp = -jp;
    }
    auto slot = [](int j, int n) { return ((j % n) + n) % n; };
    Complex v = at(slot(jx, g.nx), slot(jy, g.ny), jp);
    return flip ? std::conj(v) : v;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(Complex a) {
    for (auto& v : data_) v *= a;
    return *this;
}

// -------------------------------------------------------------- transforms

SpectralField forward(const Field3D& field) {
    if (!field.all_finite()) throw DataIntegrityError("forward transform of a non-finite field");
    const Grid& g = field.grid();
    SpectralField out(g);
    // FFTW may not modify the input of an out-of-place r2c transform.
    auto* in = const_cast<double*>(field.data().data());
    fftw_execute_dft_r2c(plan_cache().get(g).r2c, in,
                         reinterpret_cast<fftw_complex*>(out.data().data()));
    const double scale = 1.0 / double(g.size());
    for (auto& v : out.data()) v *= scale;
    return out;
}

Field3D backward(const SpectralField& spec) {
    const Grid& g = spec.grid();
    std::vector<Complex> scratch(spec.data().begin(), spec.data().end());
    for (const auto& v : scratch)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw DataIntegrityError("backward transform of a non-finite spectrum");
    Field3D out(g);
    fftw_execute_dft_c2r(plan_cache().get(g).c2r, reinterpret_cast<fftw_complex*>(scratch.data()),
                         out.data().data());
    return out;
}

SpectralField apply_multiplier(const SpectralField& spec,
                               const std::function<double(double, double, double)>& m) {
    const Grid& g = spec.grid();
    SpectralField out(g);
    for (int ix = 0; ix < g.nx; ++ix) {
        double kx = derivative_wavenumber(ix, g.nx, g.lx());
        for (int iy = 0; iy < g.ny; ++iy) {
            double ky = derivative_wavenumber(iy, g.ny, g.ly());
            for (int kp = 0; kp < g.npc(); ++kp) {
                double kz = derivative_wavenumber(kp, g.np, g.lp());
                out.at(ix, iy, kp) = m(kx, ky, kz) * spec.at(ix, iy, kp);
            }
        }
    }
    return out;
}

SpectralField derivative(const SpectralField& spec, Axis axis) {
    const Grid& g = spec.grid();
    SpectralField out(g);
    for (int ix = 0; ix < g.nx; ++ix) {
        double kx = derivative_wavenumber(ix, g.nx, g.lx());
        for (int iy = 0; iy < g.ny; ++iy) {
            double ky = derivative_wavenumber(iy, g.ny, g.ly());
            for (int kp = 0; kp < g.npc(); ++kp) {
                double k = 0.0;
                switch (axis) {
                case Axis::x: k = kx; break;
                case Axis::y: k = ky; break;
                case Axis::p: k = derivative_wavenumber(kp, g.np, g.lp()); break;
                }
                out.at(ix, iy, kp) = Complex(0.0, k) * spec.at(ix, iy, kp);
            }
        }
    }
    return out;
}

Field3D derivative(const Field3D& field, Axis axis) {
    return backward(derivative(forward(field), axis));
}

SpectralField horizontal_laplacian(const SpectralField& spec) {
    return apply_multiplier(spec, [](double kx, double ky, double) { return -(kx * kx + ky * ky); });
}

SpectralField dealias(const SpectralField& spec) {
    const Grid& g = spec.grid();
    SpectralField out = spec;
    const int cx = dealias_band(g.nx), cy = dealias_band(g.ny), cp = dealias_band(g.np);
    for (int ix = 0; ix < g.nx; ++ix) {
        bool kill_x = std::abs(mode_number(ix, g.nx)) > cx;
        for (int iy = 0; iy < g.ny; ++iy) {
            bool kill_xy = kill_x || std::abs(mode_number(iy, g.ny)) > cy;
            for (int kp = 0; kp < g.npc(); ++kp)
                if (kill_xy || kp > cp) out.at(ix, iy, kp) = 0.0;
        }
    }
    return out;
}

Field3D dealias(const Field3D& field) { return backward(dealias(forward(field))); }

bool is_dealiased(const SpectralField& spec, double tol) {
    SpectralField kept = dealias(spec);
    for (std::size_t i = 0; i < kept.data().size(); ++i)
        if (std::abs(spec.data()[i] - kept.data()[i]) > tol) return false;
    return true;
}

// ------------------------------------------------------------------- norms

double spectral_seminorm(const SpectralField& spec,
                         const std::function<double(double, double, double)>& weight) {
    const Grid& g = spec.grid();
    double sum = 0.0;
    for (int ix = 0; ix < g.nx; ++ix) {
        double kx = norm_wavenumber(ix, g.nx, g.lx());
        for (int iy = 0; iy < g.ny; ++iy) {
            double ky = norm_wavenumber(iy, g.ny, g.ly());
            for (int kp = 0; kp < g.npc(); ++kp) {
                double kz = norm_wavenumber(kp, g.np, g.lp());
                double mult = (kp == 0 || 2 * kp == g.np) ? 1.0 : 2.0;
                sum += mult * weight(kx * kx, ky * ky, kz * kz) * std::norm(spec.at(ix, iy, kp));
            }
        }
    }
    return std::sqrt(g.volume() * sum);
}

double sobolev_norm(const SpectralField& spec, int order) {
    if (order < 0 || order > 3) throw ParameterError("Sobolev order must be in {0,1,2,3}");
    return spectral_seminorm(spec, [order](double a, double b, double c) {
        return std::pow(1.0 + a + b + c, order);
    });
}

double sobolev_norm(const Field3D& field, int order) {
    return sobolev_norm(forward(field), order);
}

double integrate(const Field3D& f) {
    double s = 0.0;
    for (double v : f.data()) s += v;
    return s * f.grid().volume() / double(f.size());
}

double inner(const Field3D& f, const Field3D& g) {
    require_same_grid(f.grid(), g.grid());
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return s * f.grid().volume() / double(f.size());
}

double l2_norm_grid(const Field3D& f) { return std::sqrt(inner(f, f)); }

// ------------------------------------------------------------------ parity

Field3D parity_project(const Field3D& field, ParityClass cls) {
    if (cls == ParityClass::none) return field;
    const Grid& g = field.grid();
    const double sign = cls == ParityClass::even ? 1.0 : -1.0;
    Field3D out(g);
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ip = 0; ip < g.np; ++ip) {
                int mirror = (g.np - ip) % g.np;
                out.at(ix, iy, ip) = 0.5 * (field.at(ix, iy, ip) + sign * field.at(ix, iy, mirror));
            }
    return out;
}

double parity_deviation(const Field3D& field, ParityClass cls) {
    double n = l2_norm_grid(field);
    if (n == 0.0) return 0.0;
    return l2_norm_grid(field - parity_project(field, cls)) / n;
}

Field3D vertical_mean(const Field3D& field) {
    const Grid& g = field.grid();
    Field3D out(g);
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy) {
            double s = 0.0;
            for (int ip = 0; ip < g.np; ++ip) s += field.at(ix, iy, ip);
            s /= g.np;
            for (int ip = 0; ip < g.np; ++ip) out.at(ix, iy, ip) = s;
        }
    return out;
}

// ------------------------------------------------------- interpolation

double evaluate(const SpectralField& spec, double x, double y, double p) {
    const Grid& g = spec.grid();
    double sum = 0.0;
    for (int ix = 0; ix < g.nx; ++ix) {
        double kx = two_pi * mode_number(ix, g.nx) / g.lx();
        for (int iy = 0; iy < g.ny; ++iy) {
            double ky = two_pi * mode_number(iy, g.ny) / g.ly();
            for (int kp = 0; kp < g.npc(); ++kp) {
                double kz = two_pi * kp / g.lp();
                double mult = (kp == 0 || 2 * kp == g.np) ? 1.0 : 2.0;
                double phase = kx * x + ky * y + kz * (p - g.p0);
                sum += mult * (spec.at(ix, iy, kp) * Complex(std::cos(phase), std::sin(phase))).real();
            }
        }
    }
    return sum;
}

Field3D interpolate(const Field3D& field, const Grid& fine) {
    const Grid& g = field.grid();
    if (fine.nx < g.nx || fine.ny < g.ny || fine.np < g.np || fine.p0 != g.p0 || fine.p1 != g.p1)
        throw ParameterError("interpolation target must refine the source grid");
    SpectralField coarse = forward(field);
    SpectralField out(fine);
    // Nyquist content has no unique continuation and is dropped.
    for (int ix = 0; ix < g.nx; ++ix) {
        int jx = mode_number(ix, g.nx);
        if (2 * std::abs(jx) == g.nx) continue;
        for (int iy = 0; iy < g.ny; ++iy) {
            int jy = mode_number(iy, g.ny);
            if (2 * std::abs(jy) == g.ny) continue;
            for (int kp = 0; 2 * kp < g.np; ++kp) {
                int fx = (jx + fine.nx) % fine.nx;
                int fy = (jy + fine.ny) % fine.ny;
                out.at(fx, fy, kp) = coarse.at(ix, iy, kp);
            }
        }
    }
    return backward(out);
}

} // namespace mpes
