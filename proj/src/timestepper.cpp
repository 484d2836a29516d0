#include "mpes/timestepper.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "mpes/errors.hpp"

namespace mpes {

std::string to_string(Scheme s) {
    return s == Scheme::imex_cnab2 ? "imex_cnab2" : "erk4_fully_explicit";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "imex_cnab2") return Scheme::imex_cnab2;
    if (s == "erk4_fully_explicit" || s == "erk4") return Scheme::erk4;
    throw ConfigError("time.scheme", "unknown scheme '" + s + "'");
}

void StepConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time.dt", "must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("time.t_end", "must be >= 0");
    if (!(cfl_target > 0.0) || cfl_target > 1.0)
        throw ConfigError("time.cfl_target", "must lie in (0, 1]");
}

namespace {

// Diagonal of the constant-coefficient diffusion split, one entry per spectral slot.
std::vector<double> diffusion_diagonal(const Grid& g, double mu, double nu_cbar) {
    std::vector<double> out(g.spectral_size());
    for (int ix = 0; ix < g.nx; ++ix) {
        double kx = derivative_wavenumber(ix, g.nx, g.lx());
        for (int iy = 0; iy < g.ny; ++iy) {
            double ky = derivative_wavenumber(iy, g.ny, g.ly());
            for (int kp = 0; kp < g.npc(); ++kp) {
                double kz = derivative_wavenumber(kp, g.np, g.lp());
                out[g.spectral_index(ix, iy, kp)] = mu * (kx * kx + ky * ky) + nu_cbar * kz * kz;
            }
        }
    }
    return out;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

// (1 + factor * lambda)^-1 or (1 + factor * lambda) applied slot by slot.
Field3D diagonal_apply(const Field3D& f, const std::vector<double>& lambda, double factor,
                       bool invert) {
    SpectralField s = forward(f);
    auto data = s.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        double m = 1.0 + factor * lambda[i];
        data[i] = invert ? data[i] / m : data[i] * m;
    }
    return backward(s);
}

} // namespace

Stepper::Stepper(const Model& model, const StepConfig& config, Forcing forcing)
    : model_(model), config_(config), forcing_(std::move(forcing)) {
    config_.validate();
    const PhysParams& p = model.params();
    const Grid& g = model.grid();
    std::vector<double> s2c(g.np);
    for (int ip = 0; ip < g.np; ++ip)
        s2c[ip] = model.s_nodes()[ip] * model.s_nodes()[ip] * model.c_nodes()[ip];
    double cbar = mean(model.c_nodes());
    lambda_.v = diffusion_diagonal(g, p.mu_v, p.nu_v * cbar);
    lambda_.theta = diffusion_diagonal(g, p.mu_theta, p.nu_theta * mean(s2c));
    lambda_.q = diffusion_diagonal(g, p.mu_q, p.nu_q * cbar);

    if (config_.scheme == Scheme::erk4 && config_.dt * max_diffusion_rate() > rk4_real_axis_limit)
        throw ConfigError("time.dt", "exceeds the explicit stability bound " +
                                         std::to_string(rk4_real_axis_limit / max_diffusion_rate()) +
                                         " for erk4_fully_explicit");
}

double Stepper::max_diffusion_rate() const {
    const Grid& g = model_.grid();
    const PhysParams& p = model_.params();
    double cmax = 0.0, s2cmax = 0.0;
    for (int ip = 0; ip < g.np; ++ip) {
        double c = model_.c_nodes()[ip], s = model_.s_nodes()[ip];
        cmax = std::max(cmax, c);
        s2cmax = std::max(s2cmax, s * s * c);
    }
    int jx = model_.options().dealias ? dealias_band(g.nx) : g.nx / 2 - 1;
    int jy = model_.options().dealias ? dealias_band(g.ny) : g.ny / 2 - 1;
    int jp = model_.options().dealias ? dealias_band(g.np) : g.np / 2 - 1;
    const double tp = 2.0 * std::numbers::pi;
    double kx = tp * jx / g.lx(), ky = tp * jy / g.ly(), kp = tp * jp / g.lp();
    double h2 = kx * kx + ky * ky;
    return std::max({p.mu_v * h2 + p.nu_v * cmax * kp * kp,
                     p.mu_theta * h2 + p.nu_theta * s2cmax * kp * kp,
                     p.mu_q * h2 + p.nu_q * cmax * kp * kp});
}

FieldSet Stepper::forcing_at(double t) const {
    return forcing_ ? forcing_(t) : FieldSet(model_.grid());
}

FieldSet Stepper::implicit_apply(const FieldSet& u, double factor) const {
    return {diagonal_apply(u.v1, lambda_.v, factor, false),
            diagonal_apply(u.v2, lambda_.v, factor, false),
            diagonal_apply(u.theta, lambda_.theta, factor, false),
            diagonal_apply(u.q, lambda_.q, factor, false)};
}

FieldSet Stepper::implicit_solve(const FieldSet& rhs, double factor) const {
    return {diagonal_apply(rhs.v1, lambda_.v, factor, true),
            diagonal_apply(rhs.v2, lambda_.v, factor, true),
            diagonal_apply(rhs.theta, lambda_.theta, factor, true),
            diagonal_apply(rhs.q, lambda_.q, factor, true)};
}

// Everything except the implicit diagonal: T(u) + f + Lambda u.
FieldSet Stepper::explicit_term(const FieldSet& u, double t) const {
    FieldSet f;
    const FieldSet* fp = nullptr;
    if (forcing_) {
        f = forcing_(t);
        fp = &f;
    }
    FieldSet e = model_.tendency(u, fp);
    e += implicit_apply(u, 1.0) - u;
    return e;
}

State Stepper::step_cnab2(const State& s, double dt) {
    FieldSet en = explicit_term(s.u, s.t);
    FieldSet next;
    if (!history_) {
        // Bootstrap: ten Crank-Nicolson / Heun substeps (second order, so the
        // first step does not leave an O(dt^2) footprint on the history).
        const int sub = 10;
        const double h = dt / sub;
        FieldSet u = s.u;
        FieldSet e = en;
        for (int i = 0; i < sub; ++i) {
            const double t = s.t + i * h;
            if (i > 0) e = explicit_term(u, t);
            FieldSet base = implicit_apply(u, -0.5 * h);
            FieldSet rhs = base;
            rhs.axpy(h, e);
            FieldSet pred = implicit_solve(rhs, 0.5 * h);
            rhs = std::move(base);
            rhs.axpy(0.5 * h, e);
            rhs.axpy(0.5 * h, explicit_term(pred, t + h));
            u = implicit_solve(rhs, 0.5 * h);
        }
        next = std::move(u);
    } else {
        double r = dt / history_->dt;
        FieldSet rhs = implicit_apply(s.u, -0.5 * dt);
        rhs.axpy(dt * (1.0 + 0.5 * r), en);
        rhs.axpy(-dt * 0.5 * r, history_->explicit_term);
        next = implicit_solve(rhs, 0.5 * dt);
    }
    history_ = History{std::move(en), dt};
    return State(std::move(next), s.t + dt);
}

State Stepper::step_erk4(const State& s, double dt) {
    auto rhs = [this](const FieldSet& u, double t) {
        FieldSet f;
        const FieldSet* fp = nullptr;
        if (forcing_) {
            f = forcing_(t);
            fp = &f;
        }
        return model_.tendency(u, fp);
    };
    FieldSet k1 = rhs(s.u, s.t);
    FieldSet k2 = rhs(s.u + (0.5 * dt) * k1, s.t + 0.5 * dt);
    FieldSet k3 = rhs(s.u + (0.5 * dt) * k2, s.t + 0.5 * dt);
    FieldSet k4 = rhs(s.u + dt * k3, s.t + dt);
    FieldSet next = s.u;
    next.axpy(dt / 6.0, k1);
    next.axpy(dt / 3.0, k2);
    next.axpy(dt / 3.0, k3);
    next.axpy(dt / 6.0, k4);
    return State(std::move(next), s.t + dt);
}

State Stepper::step(const State& s, std::optional<double> dt_opt) {
    if (!s.u.all_finite()) throw BlowupError("non-finite state before step", s.t);
    double dt = dt_opt.value_or(config_.dt);
    State out;
    try {
        out = config_.scheme == Scheme::imex_cnab2 ? step_cnab2(s, dt) : step_erk4(s, dt);
    } catch (const DataIntegrityError& e) {
        throw BlowupError(std::string("non-finite values during step: ") + e.what(), s.t);
    }
    if (!out.u.all_finite()) throw BlowupError("non-finite state after step", s.t);
    std::tie(out.u.v1, out.u.v2) = barotropic_project(out.u.v1, out.u.v2);
    return out;
}

double cfl_dt(const State& s, double cfl_target, double dt_max) {
    const Grid& g = s.grid();
    Field3D w = diagnose_omega(s.u.v1, s.u.v2);
    double rate = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        rate = std::max(rate, std::abs(s.u.v1[i]) / g.dx() + std::abs(s.u.v2[i]) / g.dy() +
                                  std::abs(w[i]) / g.dp());
    if (rate == 0.0) return dt_max;
    return std::min(dt_max, cfl_target / rate);
}

std::uint64_t checksum(const FieldSet& u) {
    std::uint64_t h = 1469598103934665603ull;
    u.for_each([&h](const Field3D& f) {
        for (double v : f.data()) {
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &v, sizeof v);
            for (unsigned char b : bytes) {
                h ^= b;
                h *= 1099511628211ull;
            }
        }
    });
    return h;
}

Trajectory run(const State& initial, const Model& model, const StepConfig& config,
               const Forcing& forcing, const Observer& observer, long every) {
    config.validate();
    if (every < 1) every = 1;
    Stepper stepper(model, config, forcing);
    Trajectory traj;
    State state = initial;
    auto record = [&](const State& s, long k) {
        traj.times.push_back(s.t);
        traj.checksums.push_back(checksum(s.u));
        if (observer) observer(s, k);
    };
    const double scale = std::max(initial.u.max_abs(), 1.0);
    const double t_end = initial.t + config.t_end;
    record(state, 0);
    traj.last_good_time = state.t;

    long nsteps = 0;
    double dt = config.dt;
    if (!config.adapt) {
        nsteps = long(std::ceil(config.t_end / config.dt - 1e-9));
        if (nsteps > 0) dt = config.t_end / double(nsteps);
    }

    try {
        for (long k = 1;; ++k) {
            if (config.adapt) {
                if (state.t >= t_end - 1e-12 * std::max(1.0, std::abs(t_end))) break;
                dt = std::min(cfl_dt(state, config.cfl_target, config.dt), t_end - state.t);
            } else if (k > nsteps) {
                break;
            }
            State next = stepper.step(state, dt);
            if (!config.adapt) next.t = initial.t + double(k) * dt;
            if (next.u.max_abs() > 1e8 * scale)
                throw BlowupError("state exceeded 1e8 times its initial size", state.t);
            state = std::move(next);
            traj.last_good_time = state.t;
            bool last = config.adapt ? state.t >= t_end - 1e-12 * std::max(1.0, std::abs(t_end))
                                     : k == nsteps;
            if (k % every == 0 || last) record(state, k);
        }
    } catch (const BlowupError& e) {
        traj.blowup = true;
        traj.error = e.what();
        traj.last_good_time = e.last_good_time();
    }
    traj.final_state = state;
    return traj;
}

} // namespace mpes
