#include "mpes/monitors.hpp"

#include <algorithm>
#include <cmath>

#include "mpes/errors.hpp"

namespace mpes {

namespace {

double sq(double x) { return x * x; }

double hnorm(const SpectralField& f, int order) { return sobolev_norm(f, order); }

// ||d_p f||_{H^s} from the spectrum of f.
double pnorm(const SpectralField& f, int order) {
    return spectral_seminorm(f, [order](double a, double b, double c) {
        return c * std::pow(1.0 + a + b + c, order);
    });
}

// Horizontal seminorm sqrt(sum (kx^2+ky^2)^h kp^(2v) |f_k|^2).
double hsemi(const SpectralField& f, int h, int v) {
    return spectral_seminorm(f, [h, v](double a, double b, double c) {
        return std::pow(a + b, h) * std::pow(c, v);
    });
}

double vnorm(double a, double b) { return std::hypot(a, b); }

void put_scalar_norms(NormReport& r, const std::string& name, const SpectralField& f) {
    for (int s = 0; s <= 3; ++s)
        r.values[name + (s == 0 ? ".L2" : ".H" + std::to_string(s))] = hnorm(f, s);
}

void put_vector_norms(NormReport& r, const std::string& name, const SpectralField& a,
                      const SpectralField& b) {
    for (int s = 0; s <= 3; ++s)
        r.values[name + (s == 0 ? ".L2" : ".H" + std::to_string(s))] =
            vnorm(hnorm(a, s), hnorm(b, s));
}

} // namespace

const std::vector<std::string>& norm_report_keys() {
    static const std::vector<std::string> keys = {
        "v.L2", "v.H1", "v.H2", "v.H3",
        "theta.L2", "theta.H1", "theta.H2", "theta.H3",
        "q.L2", "q.H1", "q.H2", "q.H3",
        "vp.L2", "vp.H1", "vp.H2", "vp.w",
        "thetap.L2", "thetap.H1", "thetap.H2", "thetap.w",
        "qp.L2", "qp.H1", "qp.H2", "qp.w",
        "lap_vp.w",
        "grad_v", "lap_v", "grad_lap_v",
        "grad_theta", "lap_theta", "grad_lap_theta", "grad_thetap", "lap_thetap",
        "div_residual", "omega_top",
        "hydrostatic_residual", "hydrostatic_gradient_residual", "T.L2", "gradT.L2",
        "parity.v", "parity.theta", "parity.q",
        "E.v", "E.theta", "E.q",
        "diss_h.v", "diss_p.v", "diss_h.theta", "diss_p.theta", "diss_h.q", "diss_p.q",
        "pressure_work", "coupling", "coriolis_work",
        "forcing_work.v", "forcing_work.theta", "forcing_work.q",
        "fv.H1", "fv_p.L2", "ftheta.H1", "ftheta_p.L2", "fq.H1", "fq_p.L2",
        "budget_residual",
    };
    return keys;
}

NormReport norm_report(const State& s, const Model& model, const FieldSet* forcing) {
    const Grid& g = s.grid();
    const PhysParams& par = model.params();
    const FieldSet& u = s.u;
    NormReport r;
    r.t = s.t;

    SpectralField v1 = forward(u.v1), v2 = forward(u.v2), th = forward(u.theta), q = forward(u.q);
    put_vector_norms(r, "v", v1, v2);
    put_scalar_norms(r, "theta", th);
    put_scalar_norms(r, "q", q);

    Field3D v1p = backward(derivative(v1, Axis::p)), v2p = backward(derivative(v2, Axis::p));
    Field3D thp = backward(derivative(th, Axis::p)), qp = backward(derivative(q, Axis::p));
    for (int k = 0; k <= 2; ++k) {
        std::string suffix = k == 0 ? ".L2" : ".H" + std::to_string(k);
        r.values["vp" + suffix] = vnorm(pnorm(v1, k), pnorm(v2, k));
        r.values["thetap" + suffix] = pnorm(th, k);
        r.values["qp" + suffix] = pnorm(q, k);
    }
    r.values["vp.w"] = vnorm(weighted_norm_w(v1p, par), weighted_norm_w(v2p, par));
    r.values["thetap.w"] = weighted_norm_w(thp, par);
    r.values["qp.w"] = weighted_norm_w(qp, par);
    auto lap_p = [](const SpectralField& f) {
        return backward(horizontal_laplacian(derivative(f, Axis::p)));
    };
    r.values["lap_vp.w"] = vnorm(weighted_norm_w(lap_p(v1), par), weighted_norm_w(lap_p(v2), par));

    r.values["grad_v"] = vnorm(hsemi(v1, 1, 0), hsemi(v2, 1, 0));
    r.values["lap_v"] = vnorm(hsemi(v1, 2, 0), hsemi(v2, 2, 0));
    r.values["grad_lap_v"] = vnorm(hsemi(v1, 3, 0), hsemi(v2, 3, 0));
    r.values["grad_theta"] = hsemi(th, 1, 0);
    r.values["lap_theta"] = hsemi(th, 2, 0);
    r.values["grad_lap_theta"] = hsemi(th, 3, 0);
    r.values["grad_thetap"] = hsemi(th, 1, 1);
    r.values["lap_thetap"] = hsemi(th, 2, 1);

    // Constraint residuals.
    r.values["div_residual"] = barotropic_divergence(u.v1, u.v2);
    Field3D div = backward(derivative(v1, Axis::x) += derivative(v2, Axis::y));
    Field3D div_mean = vertical_mean(div);
    r.values["omega_top"] = g.lp() * div_mean.max_abs();

    Field3D omega = model.omega(u.v1, u.v2);
    Field3D phi = model.phi(u.theta);
    Field3D T = model.T_from_theta(u.theta);
    r.values["hydrostatic_residual"] = l2_norm_grid(model.hydrostatic_residual(phi, u.theta));
    r.values["hydrostatic_gradient_residual"] =
        vnorm(l2_norm_grid(model.hydrostatic_gradient_residual(phi, u.theta, Axis::x)),
              l2_norm_grid(model.hydrostatic_gradient_residual(phi, u.theta, Axis::y)));
    r.values["T.L2"] = l2_norm_grid(T);
    {
        SpectralField Th = forward(T);
        r.values["gradT.L2"] = hsemi(Th, 1, 0);
    }

    r.values["parity.v"] = vnorm(parity_deviation(u.v1, ParityClass::even) * l2_norm_grid(u.v1),
                                 parity_deviation(u.v2, ParityClass::even) * l2_norm_grid(u.v2)) /
                           std::max(vnorm(l2_norm_grid(u.v1), l2_norm_grid(u.v2)), 1e-300);
    r.values["parity.theta"] = parity_deviation(u.theta, ParityClass::odd);
    r.values["parity.q"] = parity_deviation(u.q, ParityClass::even);

    // Energies and the terms of their balances.
    r.values["E.v"] = 0.5 * (inner(u.v1, u.v1) + inner(u.v2, u.v2));
    r.values["E.theta"] = 0.5 * inner(u.theta, u.theta);
    r.values["E.q"] = 0.5 * inner(u.q, u.q);
    r.values["diss_h.v"] = par.mu_v * sq(r.values["grad_v"]);
    r.values["diss_p.v"] = par.nu_v * sq(r.values["vp.w"]);
    r.values["diss_h.theta"] = par.mu_theta * sq(r.values["grad_theta"]);
    {
        std::vector<double> s = model.s_nodes();
        Field3D st(g);
        for (int ix = 0; ix < g.nx; ++ix)
            for (int iy = 0; iy < g.ny; ++iy)
                for (int ip = 0; ip < g.np; ++ip) st.at(ix, iy, ip) = s[ip] * u.theta.at(ix, iy, ip);
        Field3D dst = backward(derivative(model.truncate(forward(st)), Axis::p));
        r.values["diss_p.theta"] = par.nu_theta * sq(weighted_norm_w(dst, par));
    }
    r.values["diss_h.q"] = par.mu_q * sq(hsemi(q, 1, 0));
    r.values["diss_p.q"] = par.nu_q * sq(r.values["qp.w"]);

    auto [gx, gy] = model.pressure_gradient(phi);
    r.values["pressure_work"] = -(inner(u.v1, gx) + inner(u.v2, gy));
    {
        Field3D rtp(g);
        for (int ix = 0; ix < g.nx; ++ix)
            for (int iy = 0; iy < g.ny; ++iy)
                for (int ip = 0; ip < g.np; ++ip)
                    rtp.at(ix, iy, ip) = par.R * T.at(ix, iy, ip) / g.p(ip);
        r.values["coupling"] = inner(rtp, omega);
    }
    auto [c1, c2] = model.coriolis(u.v1, u.v2);
    r.values["coriolis_work"] = inner(u.v1, c1) + inner(u.v2, c2);

    FieldSet zero;
    const FieldSet& f = forcing ? *forcing : (zero = FieldSet(g));
    r.values["forcing_work.v"] = inner(u.v1, f.v1) + inner(u.v2, f.v2);
    r.values["forcing_work.theta"] = inner(u.theta, f.theta);
    r.values["forcing_work.q"] = inner(u.q, f.q);
    SpectralField f1 = forward(f.v1), f2 = forward(f.v2), ft = forward(f.theta), fq = forward(f.q);
    r.values["fv.H1"] = vnorm(hnorm(f1, 1), hnorm(f2, 1));
    r.values["fv_p.L2"] = vnorm(pnorm(f1, 0), pnorm(f2, 0));
    r.values["ftheta.H1"] = hnorm(ft, 1);
    r.values["ftheta_p.L2"] = pnorm(ft, 0);
    r.values["fq.H1"] = hnorm(fq, 1);
    r.values["fq_p.L2"] = pnorm(fq, 0);
    r.values["budget_residual"] = 0.0;
    return r;
}

// ------------------------------------------------------------------ budgets

namespace {

double uniform_spacing(const std::vector<NormReport>& series) {
    if (series.size() < 3) throw ParameterError("energy budget needs at least three samples");
    double dt = series[1].t - series[0].t;
    if (!(dt > 0.0)) throw ParameterError("sample times must increase");
    for (std::size_t i = 1; i < series.size(); ++i) {
        double d = series[i].t - series[i - 1].t;
        if (std::abs(d - dt) > 1e-9 * dt) throw ParameterError("energy budget needs uniform sampling");
    }
    return dt;
}

} // namespace

std::vector<BudgetSample> energy_budget(const std::vector<NormReport>& series) {
    const double dt = uniform_spacing(series);
    std::vector<BudgetSample> out;
    for (std::size_t i = 1; i + 1 < series.size(); ++i) {
        const NormReport& r = series[i];
        auto component = [&](const std::string& name, double work, double coupling,
                             double coriolis) {
            BudgetComponent c;
            c.dEdt = (series[i + 1].at("E." + name) - series[i - 1].at("E." + name)) / (2.0 * dt);
            c.diss_h = r.at("diss_h." + name);
            c.diss_p = r.at("diss_p." + name);
            c.work = work;
            c.coupling = coupling;
            c.coriolis = coriolis;
            c.forcing = r.at("forcing_work." + name);
            c.residual = c.dEdt - (-c.diss_h - c.diss_p + c.work + c.forcing);
            c.max_term = std::max({std::abs(c.dEdt), c.diss_h, c.diss_p, std::abs(c.work),
                                   std::abs(c.forcing)});
            return c;
        };
        BudgetSample b;
        b.t = r.t;
        b.v = component("v", r.at("pressure_work"), r.at("coupling"), r.at("coriolis_work"));
        b.theta = component("theta", 0.0, 0.0, 0.0);
        b.q = component("q", 0.0, 0.0, 0.0);
        out.push_back(b);
    }
    return out;
}

std::vector<GronwallSample> gronwall_series(const std::vector<NormReport>& series,
                                            const PhysParams& par) {
    const double dt = uniform_spacing(series);
    const double mu1 = std::min(par.mu_v, par.nu_v);
    const double mu2 = std::pow(par.p0 / par.p1, 2.0 * par.kappa()) *
                       std::min(par.mu_theta, par.nu_theta);
    std::vector<GronwallSample> out;
    for (std::size_t i = 1; i + 1 < series.size(); ++i) {
        const NormReport& r = series[i];
        auto ddt = [&](const std::string& key) {
            return (sq(series[i + 1].at(key)) - sq(series[i - 1].at(key))) / (2.0 * dt);
        };
        double v1 = sq(r.at("v.H1")), v2 = sq(r.at("v.H2")), v3 = sq(r.at("v.H3"));
        double vp1 = sq(r.at("vp.H1")), vp2 = sq(r.at("vp.H2"));
        double t1 = sq(r.at("theta.H1")), t2 = sq(r.at("theta.H2")), t3 = sq(r.at("theta.H3"));
        double tp1 = sq(r.at("thetap.H1")), tp2 = sq(r.at("thetap.H2"));
        double growth = 1.0 + v2 + v1 * v2;

        GronwallSample s;
        s.t = r.t;
        s.lhs[0] = ddt("vp.H1") + mu1 * vp2;
        s.rhs[0] = growth * vp1 + v1 + v1 * v1 + t1 + sq(r.at("fv_p.L2"));

        s.lhs[1] = ddt("thetap.H1") + mu2 * tp2;
        s.rhs[1] = growth * tp1 + t1 + vp1 * t2 + sq(r.at("ftheta_p.L2"));

        s.lhs[2] = ddt("lap_v") + mu1 * (sq(r.at("grad_lap_v")) + sq(r.at("lap_vp.w")));
        s.rhs[2] = t2 + sq(r.at("fv.H1")) + 0.5 * mu1 * v3 + (1.0 + v2 + v1 * vp1 + vp2) * v2;

        s.lhs[3] = 0.5 * ddt("lap_theta") +
                   0.75 * mu2 * (sq(r.at("grad_lap_theta")) + sq(r.at("lap_thetap")));
        s.rhs[3] = (v2 + v3) * t2 + sq(r.at("grad_theta")) + sq(r.at("grad_thetap")) +
                   sq(r.at("lap_theta")) + sq(r.at("ftheta.H1")) + 0.25 * mu2 * t3;
        out.push_back(s);
    }
    return out;
}

// ------------------------------------------------------------------- probes

double trilinear_form(const Field3D& f, const Field3D& g, const Field3D& h) {
    const Grid& gr = f.grid();
    const double dp = gr.dp();
    double sum = 0.0;
    for (int ix = 0; ix < gr.nx; ++ix)
        for (int iy = 0; iy < gr.ny; ++iy) {
            double F = 0.0, GH = 0.0;
            for (int ip = 0; ip < gr.np; ++ip) {
                F += f.at(ix, iy, ip) * dp;
                GH += g.at(ix, iy, ip) * h.at(ix, iy, ip) * dp;
            }
            sum += F * GH;
        }
    return sum * gr.dx() * gr.dy();
}

double trilinear_bound(const Field3D& f, const Field3D& g, const Field3D& h) {
    auto parts = [](const Field3D& a) {
        SpectralField s = forward(a);
        return std::pair{hnorm(s, 0), hsemi(s, 1, 0)};
    };
    auto [fn, fg] = parts(f);
    auto [hn, hg] = parts(h);
    double gn = l2_norm_grid(g);
    return std::sqrt(fn) * (std::sqrt(fn) + std::sqrt(fg)) * gn * std::sqrt(hn) *
           (std::sqrt(hn) + std::sqrt(hg));
}

std::pair<double, double> minkowski_probe(const Field3D& v1, const Field3D& v2) {
    const Grid& g = v1.grid();
    Field3D omega = diagnose_omega(v1, v2);
    Field3D div = derivative(v1, Axis::x) + derivative(v2, Axis::y);
    double lhs = l2_norm_grid(omega);
    double integral = 0.0;
    for (int ip = 0; ip < g.np; ++ip) {
        double layer = 0.0;
        for (int ix = 0; ix < g.nx; ++ix)
            for (int iy = 0; iy < g.ny; ++iy) layer += sq(div.at(ix, iy, ip));
        integral += std::sqrt(layer * g.dx() * g.dy()) * g.dp();
    }
    return {lhs, std::sqrt(g.lp()) * integral};
}

double advection_skew_residual(const Model& model, const Field3D& v1, const Field3D& v2,
                               const Field3D& s) {
    Field3D omega = model.omega(v1, v2);
    return inner(model.advect(v1, v2, omega, s), s);
}

} // namespace mpes
