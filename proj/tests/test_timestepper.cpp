#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "mpes/errors.hpp"
#include "mpes/timestepper.hpp"
#include "mpes/verification.hpp"

using namespace mpes;

namespace {

constexpr double tp = 2.0 * std::numbers::pi;

PhysParams constant_coefficients() {
    PhysParams p;
    p.theta_bar = Profile::proportional(2.0);
    p.cp = std::numeric_limits<double>::infinity();
    p.nu_q = 0.02;
    return p;
}

// Resting fluid carrying one humidity mode: pure diffusion, decays like
// exp(-lambda t) with lambda from the constant-coefficient operator.
struct DecayCase {
    Grid grid{16, 16, 16, 0.2, 1.0};
    PhysParams par = constant_coefficients();
    double kp = tp * 2 / 0.8;
    double lambda() const {
        double c = std::pow(par.g / (par.R * 2.0), 2);
        return par.mu_q * tp * tp * 10 + par.nu_q * c * kp * kp;
    }
    Field3D mode() const {
        return Field3D::from_function(grid, [this](double x, double y, double p) {
            return std::cos(tp * (x + 3 * y)) * std::sin(kp * (p - 0.2));
        });
    }
    double error(Scheme scheme, double dt, double t_end) const {
        Model model(grid, par);
        State s(grid, 0.0);
        s.u.q = mode();
        Trajectory tr = run(s, model, {dt, t_end, scheme, 0.5, false});
        REQUIRE_FALSE(tr.blowup);
        return (tr.final_state.u.q - std::exp(-lambda() * t_end) * mode()).max_abs();
    }
};

} // namespace

TEST_CASE("scheme names") {
    CHECK(scheme_from_string("imex_cnab2") == Scheme::imex_cnab2);
    CHECK(scheme_from_string("erk4_fully_explicit") == Scheme::erk4);
    CHECK(scheme_from_string(to_string(Scheme::erk4)) == Scheme::erk4);
    CHECK_THROWS_AS(scheme_from_string("euler"), ConfigError);
}

TEST_CASE("step configuration validation names the key") {
    StepConfig c;
    c.dt = 0.0;
    try {
        c.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "time.dt");
    }
    c = StepConfig();
    c.t_end = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("erk4 refuses a step beyond its diffusive stability bound") {
    Grid g(16, 16, 16, 0.2, 1.0);
    Model model(g, PhysParams());
    Stepper probe(model, {1e-4, 1.0, Scheme::imex_cnab2, 0.5, false});
    double limit = rk4_real_axis_limit / probe.max_diffusion_rate();
    CHECK_NOTHROW(Stepper(model, {0.9 * limit, 1.0, Scheme::erk4, 0.5, false}));
    CHECK_THROWS_AS(Stepper(model, {1.1 * limit, 1.0, Scheme::erk4, 0.5, false}), ConfigError);
    CHECK_NOTHROW(Stepper(model, {1.1 * limit, 1.0, Scheme::imex_cnab2, 0.5, false}));
}

TEST_CASE("diffusive decay converges at second order for CNAB2") {
    DecayCase d;
    double e1 = d.error(Scheme::imex_cnab2, 0.02, 1.0);
    double e2 = d.error(Scheme::imex_cnab2, 0.01, 1.0);
    CHECK(e2 < 1e-3);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("diffusive decay converges at fourth order for ERK4") {
    DecayCase d;
    double e1 = d.error(Scheme::erk4, 0.02, 1.0);
    double e2 = d.error(Scheme::erk4, 0.01, 1.0);
    CHECK(e2 < 1e-6);
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("the two schemes agree on a nonlinear run") {
    Grid g(16, 16, 16, 0.2, 1.0);
    Model model(g, PhysParams());
    State s(random_state(g, 4, 1.0, 4), 0.0);
    Trajectory a = run(s, model, {1e-3, 0.2, Scheme::imex_cnab2, 0.5, false});
    Trajectory b = run(s, model, {1e-3, 0.2, Scheme::erk4, 0.5, false});
    CHECK(max_error(a.final_state.u, b.final_state.u) < 1e-5 * s.u.max_abs());
}

TEST_CASE("run lands on t_end and samples at the requested cadence") {
    Grid g(16, 16, 16, 0.2, 1.0);
    Model model(g, PhysParams());
    std::vector<long> seen;
    Trajectory tr = run(State(g, 0.5), model, {0.03, 0.1, Scheme::imex_cnab2, 0.5, false}, {},
                        [&](const State&, long k) { seen.push_back(k); }, 2);
    // ceil(0.1 / 0.03) = 4 steps of 0.025.
    CHECK(seen == std::vector<long>{0, 2, 4});
    CHECK(tr.final_state.t == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(tr.times.size() == 3);
}

TEST_CASE("runs are bitwise reproducible") {
    Grid g(16, 16, 16, 0.2, 1.0);
    Model model(g, PhysParams());
    State s(random_state(g, 9, 1.0, 4), 0.0);
    StepConfig c{1e-3, 0.02, Scheme::imex_cnab2, 0.5, false};
    Trajectory a = run(s, model, c), b = run(s, model, c);
    CHECK(a.checksums == b.checksums);
    State s2(random_state(g, 10, 1.0, 4), 0.0);
    CHECK(run(s2, model, c).checksums.back() != a.checksums.back());
}

TEST_CASE("blowup is reported with the last good time") {
    Grid g(16, 16, 16, 0.2, 1.0);
    Model model(g, PhysParams());
    Forcing huge = [&g](double t) {
        FieldSet f(g);
        f.q = Field3D(g, t > 0.05 ? 1e12 : 0.0);
        return f;
    };
    Trajectory tr = run(State(g, 0.0), model, {0.01, 1.0, Scheme::imex_cnab2, 0.5, false}, huge);
    CHECK(tr.blowup);
    CHECK(tr.last_good_time > 0.0);
    CHECK(tr.last_good_time < 0.1);
    CHECK_FALSE(tr.error.empty());

    Forcing nan = [&g](double) {
        FieldSet f(g);
        f.theta[0] = std::numeric_limits<double>::quiet_NaN();
        return f;
    };
    Stepper st(model, {0.01, 1.0, Scheme::erk4, 0.5, false}, nan);
    CHECK_THROWS_AS(st.step(State(g, 0.0)), BlowupError);
}

TEST_CASE("CFL time step") {
    Grid g(16, 16, 16, 0.2, 1.0);
    State rest(g, 0.0);
    CHECK(cfl_dt(rest, 0.5, 0.1) == 0.1);
    State moving(g, 0.0);
    moving.u.v1 = Field3D(g, 2.0);
    // |v1| / dx = 32, so dt = 0.5 / 32.
    CHECK(cfl_dt(moving, 0.5, 1.0) == doctest::Approx(0.5 / 32.0));
}

TEST_CASE("adaptive runs finish exactly at t_end") {
    Grid g(16, 16, 16, 0.2, 1.0);
    Model model(g, PhysParams());
    State s(random_state(g, 2, 1.0, 4), 0.0);
    Trajectory tr = run(s, model, {0.01, 0.05, Scheme::imex_cnab2, 0.5, true});
    CHECK_FALSE(tr.blowup);
    CHECK(tr.final_state.t == doctest::Approx(0.05).epsilon(1e-12));
}
