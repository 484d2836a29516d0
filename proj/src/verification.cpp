#include "mpes/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "mpes/errors.hpp"
#include "mpes/monitors.hpp"

namespace mpes {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

} // namespace

// ------------------------------------------------------------ random data

Field3D random_field(const Grid& grid, std::uint64_t seed, int band) {
    if (band < 0 || 2 * band >= std::min({grid.nx, grid.ny, grid.np}))
        throw ParameterError("random band must lie below the Nyquist mode");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    SpectralField s(grid);
    for (int jx = -band; jx <= band; ++jx)
        for (int jy = -band; jy <= band; ++jy)
            for (int jp = 0; jp <= band; ++jp) {
                double re = normal(rng), im = normal(rng);
                double decay = 1.0 / (1.0 + jx * jx + jy * jy + jp * jp);
                s.set_mode(jx, jy, jp, decay * Complex(re, im));
            }
    return backward(s);
}

FieldSet random_state(const Grid& grid, std::uint64_t seed, double amplitude, int band,
                      bool paper_parity) {
    FieldSet u(random_field(grid, seed, band), random_field(grid, seed + 1, band),
               random_field(grid, seed + 2, band), random_field(grid, seed + 3, band));
    if (paper_parity) {
        u.v1 = parity_project(u.v1, ParityClass::even);
        u.v2 = parity_project(u.v2, ParityClass::even);
        u.theta = parity_project(u.theta, ParityClass::odd);
        u.q = parity_project(u.q, ParityClass::even);
    }
    std::tie(u.v1, u.v2) = barotropic_project(u.v1, u.v2);
    auto scale = [amplitude](Field3D& f, double norm) {
        if (norm > 0.0) f *= amplitude / norm;
    };
    double vn = std::hypot(sobolev_norm(u.v1, 2), sobolev_norm(u.v2, 2));
    scale(u.v1, vn);
    scale(u.v2, vn);
    scale(u.theta, sobolev_norm(u.theta, 2));
    scale(u.q, sobolev_norm(u.q, 2));
    return u;
}

// ------------------------------------------------------ manufactured cases

std::string to_string(ManufacturedKind k) {
    switch (k) {
    case ManufacturedKind::rest: return "rest";
    case ManufacturedKind::steady: return "steady";
    case ManufacturedKind::smooth: return "smooth";
    case ManufacturedKind::rough: return "rough";
    }
    return "smooth";
}

ManufacturedKind manufactured_kind_from_string(const std::string& s) {
    if (s == "rest") return ManufacturedKind::rest;
    if (s == "steady") return ManufacturedKind::steady;
    if (s == "smooth") return ManufacturedKind::smooth;
    if (s == "rough") return ManufacturedKind::rough;
    throw ParameterError("unknown manufactured case '" + s + "'");
}

double ManufacturedCase::m(double t) const {
    switch (kind) {
    case ManufacturedKind::rest:
    case ManufacturedKind::steady: return 1.0;
    default: return (1.0 + t) * std::cos(t);
    }
}

double ManufacturedCase::dm(double t) const {
    switch (kind) {
    case ManufacturedKind::rest:
    case ManufacturedKind::steady: return 0.0;
    default: return std::cos(t) - (1.0 + t) * std::sin(t);
    }
}

namespace {

// a * cos(2 pi (jx x + jy y + jp phat) + phase), phat = (p - p0) / Lp.
struct Wave {
    int jx, jy, jp;
    double a, phase;
    double operator()(double x, double y, double phat) const {
        return a * std::cos(two_pi * (jx * x + jy * y + jp * phat) + phase);
    }
};

struct SmoothProfile {
    std::vector<Wave> v1, v2, theta, q;
};

// Fixed pseudo-random mode sets; amplitude 0.5^max|j| so that modes 6 and 7
// carry a visible share.
const SmoothProfile& smooth_profile() {
    static const SmoothProfile prof = [] {
        SmoothProfile p;
        std::mt19937_64 rng(7321);
        std::uniform_int_distribution<int> j7(-7, 7), jp7(1, 7);
        std::uniform_real_distribution<double> phase(0.0, two_pi), amp(0.5, 1.0);
        auto weight = [](int a, int b, int c) {
            return std::pow(0.5, std::max({std::abs(a), std::abs(b), std::abs(c)}));
        };
        // Streamfunction part: v = (-psi_y, psi_x), constant in p.
        for (int i = 0; i < 12; ++i) {
            int jx = j7(rng), jy = j7(rng);
            if (jx == 0 && jy == 0) jx = 1;
            double a = amp(rng) * weight(jx, jy, 0);
            double ph = phase(rng);
            // psi = a/(2 pi) cos(arg): -psi_y = a jy sin(arg), psi_x = -a jx sin(arg).
            double scale = 1.0 / std::max(std::abs(jx), std::abs(jy));
            p.v1.push_back({jx, jy, 0, a * jy * scale, ph - 0.5 * std::numbers::pi});
            p.v2.push_back({jx, jy, 0, -a * jx * scale, ph - 0.5 * std::numbers::pi});
        }
        // Modes with zero vertical mean.
        for (auto* list : {&p.v1, &p.v2})
            for (int i = 0; i < 12; ++i) {
                int jx = j7(rng), jy = j7(rng), jp = jp7(rng);
                list->push_back({jx, jy, jp, amp(rng) * weight(jx, jy, jp), phase(rng)});
            }
        for (auto* list : {&p.theta, &p.q})
            for (int i = 0; i < 16; ++i) {
                int jx = j7(rng), jy = j7(rng), jp = j7(rng);
                list->push_back({jx, jy, jp, amp(rng) * weight(jx, jy, jp), phase(rng)});
            }
        return p;
    }();
    return prof;
}

Field3D sample(const Grid& g, const std::vector<Wave>& waves) {
    return Field3D::from_function(g, [&](double x, double y, double p) {
        double phat = (p - g.p0) / g.lp();
        double s = 0.0;
        for (const Wave& w : waves) s += w(x, y, phat);
        return s;
    });
}

} // namespace

FieldSet ManufacturedCase::profile(const Grid& g) const {
    switch (kind) {
    case ManufacturedKind::rest: return FieldSet(g);
    case ManufacturedKind::rough: {
        auto rough = [&g](double sx, double sy) {
            return Field3D::from_function(g, [&](double x, double y, double p) {
                double phat = (p - g.p0) / g.lp();
                return std::abs(std::sin(std::numbers::pi * phat)) *
                       std::cos(two_pi * (sx * x + sy * y));
            });
        };
        return FieldSet(Field3D(g), Field3D(g), rough(1, 0), rough(0, 1));
    }
    default: {
        const SmoothProfile& p = smooth_profile();
        return FieldSet(sample(g, p.v1), sample(g, p.v2), sample(g, p.theta), sample(g, p.q));
    }
    }
}

FieldSet ManufacturedCase::exact(const Grid& grid, double t) const {
    FieldSet u = profile(grid);
    u *= m(t);
    return u;
}

ManufacturedSolution::ManufacturedSolution(const Model& model, ManufacturedCase c) : case_(c) {
    const Grid& g = model.grid();
    u_ = case_.profile(g);
    u_.for_each([&model](Field3D& f) { f = model.truncate(f); });
    std::tie(u_.v1, u_.v2) = barotropic_project(u_.v1, u_.v2);

    c0_ = model.tendency(FieldSet(g));
    FieldSet tp = model.tendency(u_);
    FieldSet tm = model.tendency(-1.0 * u_);
    lin_ = 0.5 * (tp - tm);
    quad_ = 0.5 * (tp + tm) - c0_;
}

FieldSet ManufacturedSolution::discrete_exact(double t) const { return case_.m(t) * u_; }

FieldSet ManufacturedSolution::forcing(double t) const {
    const double m = case_.m(t);
    FieldSet f = case_.dm(t) * u_;
    f -= c0_;
    f.axpy(-m, lin_);
    f.axpy(-m * m, quad_);
    return f;
}

Forcing ManufacturedSolution::as_forcing() const {
    return [self = *this](double t) { return self.forcing(t); };
}

FieldSet manufactured_forcing(const ManufacturedCase& c, double t, const Model& model) {
    FieldSet u = c.profile(model.grid());
    u.for_each([&model](Field3D& f) { f = model.truncate(f); });
    std::tie(u.v1, u.v2) = barotropic_project(u.v1, u.v2);
    FieldSet f = c.dm(t) * u;
    f -= model.tendency(c.m(t) * u);
    return f;
}

// ---------------------------------------------------------------- oracles

namespace {

int count_of(const Grid& g, Axis a) { return a == Axis::x ? g.nx : a == Axis::y ? g.ny : g.np; }
double h_of(const Grid& g, Axis a) { return a == Axis::x ? g.dx() : a == Axis::y ? g.dy() : g.dp(); }

// Periodic fourth-order centred stencils.
Field3D fd1(const Field3D& f, Axis a) {
    const Grid& g = f.grid();
    Field3D out(g);
    const int n = count_of(g, a);
    const double h = h_of(g, a);
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ip = 0; ip < g.np; ++ip) {
                int i[3] = {ix, iy, ip};
                int& k = i[a == Axis::x ? 0 : a == Axis::y ? 1 : 2];
                int k0 = k;
                auto val = [&](int off) {
                    k = ((k0 + off) % n + n) % n;
                    double v = f.at(i[0], i[1], i[2]);
                    k = k0;
                    return v;
                };
                out.at(ix, iy, ip) = (-val(2) + 8.0 * val(1) - 8.0 * val(-1) + val(-2)) / (12.0 * h);
            }
    return out;
}

Field3D fd2(const Field3D& f, Axis a) {
    const Grid& g = f.grid();
    Field3D out(g);
    const int n = count_of(g, a);
    const double h = h_of(g, a);
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ip = 0; ip < g.np; ++ip) {
                int i[3] = {ix, iy, ip};
                int& k = i[a == Axis::x ? 0 : a == Axis::y ? 1 : 2];
                int k0 = k;
                auto val = [&](int off) {
                    k = ((k0 + off) % n + n) % n;
                    double v = f.at(i[0], i[1], i[2]);
                    k = k0;
                    return v;
                };
                out.at(ix, iy, ip) =
                    (-val(2) + 16.0 * val(1) - 30.0 * val(0) + 16.0 * val(-1) - val(-2)) / (12.0 * h * h);
            }
    return out;
}

Field3D times_profile(const Field3D& f, const std::function<double(double)>& w) {
    const Grid& g = f.grid();
    Field3D out(g);
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ip = 0; ip < g.np; ++ip) out.at(ix, iy, ip) = w(g.p(ip)) * f.at(ix, iy, ip);
    return out;
}

Field3D restrict_to(const Field3D& fine, const Grid& coarse, int r) {
    Field3D out(coarse);
    for (int ix = 0; ix < coarse.nx; ++ix)
        for (int iy = 0; iy < coarse.ny; ++iy)
            for (int ip = 0; ip < coarse.np; ++ip)
                out.at(ix, iy, ip) = fine.at(r * ix, r * iy, r * ip);
    return out;
}

Field3D fd_viscosity(const Field3D& f, const PhysParams& par, double mu, double nu, bool conj) {
    auto c = [&par](double p) { return par.c(p); };
    auto s = [&par](double p) { return par.s(p); };
    Field3D h = fd2(f, Axis::x) + fd2(f, Axis::y);
    h *= -mu;
    Field3D inner = conj ? times_profile(f, s) : f;
    Field3D v = fd1(times_profile(fd1(inner, Axis::p), c), Axis::p);
    if (conj) v = times_profile(v, s);
    v *= -nu;
    return h + v;
}

} // namespace

Field3D fd_oracle(const std::string& op, const std::vector<Field3D>& inputs, const Model& model,
                  int refine, Axis axis) {
    static const std::vector<std::string> known = {"derivative",      "viscosity_v", "viscosity_theta",
                                                   "viscosity_q",     "omega",       "phi"};
    if (std::find(known.begin(), known.end(), op) == known.end())
        throw std::invalid_argument("fd_oracle: unknown operator '" + op + "'");
    if (refine < 2 || refine % 2 != 0) throw std::invalid_argument("fd_oracle: refine must be even");
    const std::size_t needed = op == "omega" ? 2 : 1;
    if (inputs.size() < needed) throw std::invalid_argument("fd_oracle: missing input field");

    const Grid& g = inputs[0].grid();
    const PhysParams& par = model.params();
    Grid fine(refine * g.nx, refine * g.ny, refine * g.np, g.p0, g.p1);
    Field3D a = interpolate(inputs[0], fine);

    Field3D result(fine);
    if (op == "derivative") {
        result = fd1(a, axis);
    } else if (op == "viscosity_v") {
        result = fd_viscosity(a, par, par.mu_v, par.nu_v, false);
    } else if (op == "viscosity_q") {
        result = fd_viscosity(a, par, par.mu_q, par.nu_q, false);
    } else if (op == "viscosity_theta") {
        result = fd_viscosity(a, par, par.mu_theta, par.nu_theta, true);
    } else if (op == "omega") {
        Field3D div = fd1(a, Axis::x) + fd1(interpolate(inputs[1], fine), Axis::y);
        const double h = fine.dp();
        for (int ix = 0; ix < fine.nx; ++ix)
            for (int iy = 0; iy < fine.ny; ++iy) {
                double acc = 0.0;
                result.at(ix, iy, 0) = 0.0;
                for (int k = 2; k < fine.np; k += 2) {
                    acc += h / 3.0 *
                           (div.at(ix, iy, k - 2) + 4.0 * div.at(ix, iy, k - 1) + div.at(ix, iy, k));
                    result.at(ix, iy, k) = -acc;
                }
            }
    } else { // phi
        const double h = fine.dp();
        const int n = fine.np;
        const double kappa = par.kappa();
        for (int ix = 0; ix < fine.nx; ++ix)
            for (int iy = 0; iy < fine.ny; ++iy) {
                std::vector<double> integrand(n + 1);
                for (int k = 0; k <= n; ++k) {
                    double p = g.p0 + k * h;
                    double th = a.at(ix, iy, k % n) + par.theta_h(p);
                    integrand[k] = par.R * th * std::pow(p / par.p0, kappa) / p;
                }
                double surface = par.phi_s(fine.x(ix), fine.y(iy));
                double acc = 0.0;
                for (int k = n - 2; k >= 0; k -= 2) {
                    acc += h / 3.0 * (integrand[k] + 4.0 * integrand[k + 1] + integrand[k + 2]);
                    result.at(ix, iy, k) = surface + acc;
                }
            }
    }
    return restrict_to(result, g, refine);
}

double max_error(const FieldSet& a, const FieldSet& b) {
    return (a - b).max_abs();
}

// ------------------------------------------------------ convergence suite

bool ConvergenceReport::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ConvergenceRow& r) { return r.pass; });
}

double manufactured_error(const Grid& grid, const PhysParams& params, ManufacturedKind kind,
                          Scheme scheme, double dt, double t_end, bool against_closed_form) {
    Model model(grid, params);
    ManufacturedSolution ms(model, ManufacturedCase{kind});
    StepConfig cfg;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.scheme = scheme;
    Trajectory traj = run(ms.initial_state(), model, cfg, ms.as_forcing(), {}, 1L << 40);
    if (traj.blowup) return std::numeric_limits<double>::infinity();
    FieldSet reference = against_closed_form ? ManufacturedCase{kind}.exact(grid, traj.final_state.t)
                                             : ms.discrete_exact(traj.final_state.t);
    return max_error(traj.final_state.u, reference);
}

ConvergenceReport convergence_suite(const ConvergenceConfig& cfg) {
    ConvergenceReport rep;
    const double inf = std::numeric_limits<double>::infinity();
    auto grid_of = [&cfg](int n) { return Grid(n, n, n, cfg.params.p0, cfg.params.p1); };

    std::vector<double> spatial;
    for (int n : cfg.sizes) {
        double e = manufactured_error(grid_of(n), cfg.params, cfg.kind, Scheme::imex_cnab2,
                                      cfg.spatial_dt, cfg.t_end, true);
        spatial.push_back(e);
        rep.rows.push_back({"spatial_error_N" + std::to_string(n), e, 0.0, inf, std::isfinite(e)});
    }
    if (spatial.size() >= 2) {
        double drop = spatial.front() / spatial.back();
        rep.rows.push_back({"spatial_drop_N" + std::to_string(cfg.sizes.front()) + "_N" +
                                std::to_string(cfg.sizes.back()),
                            drop, 100.0, inf, drop >= 100.0});
    }

    auto temporal = [&](Scheme scheme, const std::vector<double>& dts, double t_end, double lo,
                        double hi, const std::string& tag) {
        std::vector<double> errs;
        for (double dt : dts) {
            double e = manufactured_error(grid_of(cfg.temporal_n), cfg.params, cfg.kind, scheme, dt,
                                          t_end, false);
            errs.push_back(e);
            rep.rows.push_back({tag + "_error_dt" + std::to_string(dt), e, 0.0, inf, std::isfinite(e)});
        }
        for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
            double ratio = errs[i] / errs[i + 1];
            rep.rows.push_back({tag + "_ratio_" + std::to_string(i), ratio, lo, hi,
                                ratio >= lo && ratio <= hi});
        }
    };
    temporal(Scheme::imex_cnab2, cfg.cnab2_dts, cfg.t_end, 3.2, 4.8, "cnab2");
    temporal(Scheme::erk4, cfg.erk4_dts, cfg.erk4_t_end, 12.0, 20.0, "erk4");
    return rep;
}

} // namespace mpes

// -------------------------------------------------------- invariant checks

namespace mpes {

namespace {

double h1(const Field3D& a, const Field3D& b) { return std::hypot(sobolev_norm(a, 1), sobolev_norm(b, 1)); }

ConvergenceRow upper_row(const std::string& name, double value, double tol) {
    return {name, value, 0.0, tol, std::isfinite(value) && value <= tol};
}

std::pair<Field3D, Field3D> random_velocity(const Grid& g, std::uint64_t seed, int band) {
    return barotropic_project(random_field(g, seed, band), random_field(g, seed + 1, band));
}

} // namespace

int resolvable_band(const Grid& grid, const ModelOptions& options) {
    int n = std::min({grid.nx, grid.ny, grid.np});
    return options.dealias ? dealias_band(n) : n / 2 - 1;
}

ConvergenceRow skew_symmetry_check(const Model& model, int pairs, std::uint64_t seed) {
    const Grid& g = model.grid();
    const int band = resolvable_band(g, model.options());
    double worst = 0.0;
    for (int i = 0; i < pairs; ++i) {
        std::uint64_t base = seed + 10 * std::uint64_t(i);
        auto [v1, v2] = random_velocity(g, base, band);
        Field3D s = random_field(g, base + 2, band);
        double hs = sobolev_norm(s, 1);
        double r = advection_skew_residual(model, v1, v2, s) / (h1(v1, v2) * hs * hs);
        worst = std::max(worst, std::isfinite(r) ? std::abs(r) : std::numeric_limits<double>::infinity());
    }
    return upper_row("skew_symmetry", worst, 1e-10);
}

ConvergenceRow coriolis_work_check(const Model& model, int samples, std::uint64_t seed) {
    const Grid& g = model.grid();
    const int band = resolvable_band(g, model.options());
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        auto [v1, v2] = random_velocity(g, seed + 10 * std::uint64_t(i), band);
        auto [c1, c2] = model.coriolis(v1, v2);
        double norm2 = inner(v1, v1) + inner(v2, v2);
        worst = std::max(worst, std::abs(inner(c1, v1) + inner(c2, v2)) / norm2);
    }
    return upper_row("coriolis_work", worst, 1e-12);
}

std::vector<ConvergenceRow> monotonicity_check(const Model& model, const StepConfig& time,
                                               std::uint64_t seed, double amplitude) {
    const Grid& g = model.grid();
    State s0(random_state(g, seed, amplitude, resolvable_band(g, model.options())), 0.0);
    double prev[2] = {l2_norm_grid(s0.u.theta), l2_norm_grid(s0.u.q)};
    double growth[2] = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    auto observer = [&](const State& s, long step) {
        if (step == 0) return;
        double now[2] = {l2_norm_grid(s.u.theta), l2_norm_grid(s.u.q)};
        for (int k = 0; k < 2; ++k) {
            growth[k] = std::max(growth[k], (now[k] - prev[k]) / prev[k]);
            prev[k] = now[k];
        }
    };
    Trajectory tr = run(s0, model, time, {}, observer, 1);
    const double bad = tr.blowup ? std::numeric_limits<double>::infinity() : 0.0;
    return {upper_row("monotonicity_theta", growth[0] + bad, 1e-10),
            upper_row("monotonicity_q", growth[1] + bad, 1e-10)};
}

std::vector<ConvergenceRow> budget_check(const Model& model, const StepConfig& time,
                                         std::uint64_t seed, double amplitude, int band) {
    const Grid& g = model.grid();
    State s0(random_state(g, seed, amplitude, band), 0.0);
    std::vector<NormReport> series;
    auto observer = [&](const State& s, long) { series.push_back(norm_report(s, model)); };
    Trajectory tr = run(s0, model, time, {}, observer, 1);

    double worst[3] = {0.0, 0.0, 0.0};
    if (tr.blowup || series.size() < 3) {
        std::fill(worst, worst + 3, std::numeric_limits<double>::infinity());
    } else {
        for (const BudgetSample& b : energy_budget(series)) {
            const BudgetComponent* c[3] = {&b.v, &b.theta, &b.q};
            for (int k = 0; k < 3; ++k)
                if (c[k]->max_term > 0.0)
                    worst[k] = std::max(worst[k], std::abs(c[k]->residual) / c[k]->max_term);
        }
    }
    return {upper_row("budget_v", worst[0], 1e-6), upper_row("budget_theta", worst[1], 1e-6),
            upper_row("budget_q", worst[2], 1e-6)};
}

ConvergenceRow hydrostatic_check(const Model& model, int samples, std::uint64_t seed) {
    const Grid& g = model.grid();
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        Field3D theta = random_field(g, seed + std::uint64_t(i), resolvable_band(g, model.options()));
        Field3D phi = model.phi(theta);
        double r = l2_norm_grid(model.hydrostatic_residual(phi, theta)) /
                   l2_norm_grid(model.T_from_theta(theta));
        worst = std::max(worst, r);
    }
    return upper_row("hydrostatic", worst, 1e-10);
}

ConvergenceReport invariant_suite(const InvariantConfig& cfg) {
    auto grid_of = [&cfg](int n) { return Grid(n, n, n, cfg.params.p0, cfg.params.p1); };
    Model model(grid_of(cfg.n), cfg.params, cfg.options);
    Model skew_model(grid_of(cfg.skew_n), cfg.params, cfg.options);

    ConvergenceReport rep;
    rep.rows.push_back(skew_symmetry_check(skew_model, cfg.skew_pairs, cfg.seed));
    rep.rows.push_back(coriolis_work_check(model, 10, cfg.seed));
    for (auto& r : monotonicity_check(model, cfg.monotonicity_time, cfg.seed, cfg.monotonicity_amplitude))
        rep.rows.push_back(r);
    for (auto& r : budget_check(model, cfg.budget_time, cfg.seed, cfg.budget_amplitude, cfg.budget_band))
        rep.rows.push_back(r);
    rep.rows.push_back(hydrostatic_check(model, 10, cfg.seed));
    return rep;
}

} // namespace mpes
