#pragma once

// Triply periodic pseudo-spectral representation on M = (0,1)^2 x (p0,p1).
//
// Physical fields are stored as nx*ny*np doubles, index order (ix, iy, ip)
// with ip fastest. Spectral fields hold the real-input transform, shape
// nx*ny*(np/2+1), normalised so that the mean mode equals the grid mean.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mpes {

using Complex = std::complex<double>;

enum class Axis { x, y, p };

enum class ParityClass { even, odd, none };

struct Grid {
    int nx = 16;
    int ny = 16;
    int np = 16;
    double p0 = 0.2;
    double p1 = 1.0;

    Grid() = default;
    Grid(int nx_, int ny_, int np_, double p0_, double p1_);

    /// Throws ParameterError unless every count is even and >= 8 and 0 < p0 < p1.
    void validate() const;

    std::size_t size() const { return std::size_t(nx) * ny * np; }
    int npc() const { return np / 2 + 1; }
    std::size_t spectral_size() const { return std::size_t(nx) * ny * npc(); }

    double lx() const { return 1.0; }
    double ly() const { return 1.0; }
    double lp() const { return p1 - p0; }
    double volume() const { return lx() * ly() * lp(); }
    double dx() const { return lx() / nx; }
    double dy() const { return ly() / ny; }
    double dp() const { return lp() / np; }

    double x(int ix) const { return ix * dx(); }
    double y(int iy) const { return iy * dy(); }
    double p(int ip) const { return p0 + ip * dp(); }
    /// p relative to the mid-level (p0+p1)/2.
    double ptilde(int ip) const { return p(ip) - 0.5 * (p0 + p1); }

    std::size_t index(int ix, int iy, int ip) const {
        return (std::size_t(ix) * ny + iy) * np + ip;
    }
    std::size_t spectral_index(int ix, int iy, int kp) const {
        return (std::size_t(ix) * ny + iy) * npc() + kp;
    }

    bool operator==(const Grid&) const = default;
};

/// Signed mode number of FFT slot i for length n; the Nyquist slot maps to +n/2.
inline int mode_number(int i, int n) { return i <= n / 2 ? i : i - n; }

/// Wavenumber used by differentiation (Nyquist slot -> 0).
double derivative_wavenumber(int i, int n, double period);
/// Wavenumber magnitude used by norms (Nyquist slot -> pi n / period).
double norm_wavenumber(int i, int n, double period);

class Field3D {
public:
    Field3D() = default;
    explicit Field3D(const Grid& grid, double value = 0.0);
    Field3D(const Grid& grid, std::vector<double> data);

    /// Samples f(x, y, p) at every grid node.
    static Field3D from_function(const Grid& grid,
                                 const std::function<double(double, double, double)>& f);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return data_.size(); }
    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(int ix, int iy, int ip) { return data_[grid_.index(ix, iy, ip)]; }
    double at(int ix, int iy, int ip) const { return data_[grid_.index(ix, iy, ip)]; }

    bool all_finite() const;
    double max_abs() const;

    Field3D& operator+=(const Field3D& o);
    Field3D& operator-=(const Field3D& o);
    Field3D& operator*=(double a);
    /// this += a * o
    Field3D& axpy(double a, const Field3D& o);

    friend Field3D operator+(Field3D a, const Field3D& b) { return a += b; }
    friend Field3D operator-(Field3D a, const Field3D& b) { return a -= b; }
    friend Field3D operator*(double a, Field3D f) { return f *= a; }
    friend Field3D operator*(const Field3D& a, const Field3D& b);

private:
    Grid grid_;
    std::vector<double> data_;
};

class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(const Grid& grid);
    SpectralField(const Grid& grid, std::vector<Complex> data);

    const Grid& grid() const { return grid_; }
    std::span<Complex> data() { return data_; }
    std::span<const Complex> data() const { return data_; }
    Complex& at(int ix, int iy, int kp) { return data_[grid_.spectral_index(ix, iy, kp)]; }
    Complex at(int ix, int iy, int kp) const { return data_[grid_.spectral_index(ix, iy, kp)]; }

    /// Sets mode (jx, jy, jp) and its conjugate partner so the field stays real.
    void set_mode(int jx, int jy, int jp, Complex value);
    /// Coefficient of mode (jx, jy, jp), reading the conjugate slot when jp < 0.
    Complex mode(int jx, int jy, int jp) const;

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(Complex a);

private:
    Grid grid_;
    std::vector<Complex> data_;
};

// Transforms. forward rejects non-finite input with DataIntegrityError.
SpectralField forward(const Field3D& field);
Field3D backward(const SpectralField& spec);

SpectralField derivative(const SpectralField& spec, Axis axis);
Field3D derivative(const Field3D& field, Axis axis);

/// Applies a real multiplier m(kx, ky, kp) (derivative wavenumbers) mode by mode.
SpectralField apply_multiplier(const SpectralField& spec,
                               const std::function<double(double, double, double)>& m);

/// Horizontal Laplacian (d_xx + d_yy).
SpectralField horizontal_laplacian(const SpectralField& spec);

/// Largest mode kept by dealiasing: products of two fields in this band do
/// not alias back into it (3 * band < n).
inline int dealias_band(int n) { return (n - 1) / 3; }

/// 2/3 rule: zero every mode with |j| > dealias_band(n) in any direction.
SpectralField dealias(const SpectralField& spec);
Field3D dealias(const Field3D& field);
bool is_dealiased(const SpectralField& spec, double tol = 0.0);

/// ||f||_{H^s}, s in {0,1,2,3}, with ||f||^2 = |M| sum (1+|k|^2)^s |f_k|^2.
double sobolev_norm(const SpectralField& spec, int order);
double sobolev_norm(const Field3D& field, int order);

/// sqrt(|M| sum w(kx^2, ky^2, kp^2) |f_k|^2) with norm wavenumbers; w >= 0.
double spectral_seminorm(const SpectralField& spec,
                         const std::function<double(double, double, double)>& weight);

/// Integral over M of f*g by grid quadrature (mean times volume).
double integrate(const Field3D& f);
double inner(const Field3D& f, const Field3D& g);
double l2_norm_grid(const Field3D& f);

/// Symmetric (even) or antisymmetric (odd) part about p~ = 0; `none` is identity.
Field3D parity_project(const Field3D& field, ParityClass cls);
/// ||f - parity_project(f)||_L2 / ||f||_L2, 0 for the zero field.
double parity_deviation(const Field3D& field, ParityClass cls);

/// Vertical (p) average of a field, returned as a field constant in p.
Field3D vertical_mean(const Field3D& field);

/// Evaluates the trigonometric interpolant of `field` at an arbitrary point.
double evaluate(const SpectralField& spec, double x, double y, double p);

/// Trigonometric interpolation onto a grid with the same domain and larger
/// (or equal) mode counts, by zero padding.
Field3D interpolate(const Field3D& field, const Grid& fine);

} // namespace mpes
