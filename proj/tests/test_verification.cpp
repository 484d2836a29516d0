#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mpes/errors.hpp"
#include "mpes/monitors.hpp"
#include "mpes/verification.hpp"

using namespace mpes;

namespace {

constexpr double tp = 2.0 * std::numbers::pi;

Grid grid_n(int n) { return Grid(n, n, n, 0.2, 1.0); }

double rel(const FieldSet& a, const FieldSet& b) { return max_error(a, b) / (b.max_abs() + 1e-300); }

} // namespace

TEST_CASE("random state: normalisation, projection and parity") {
    Grid g = grid_n(16);
    FieldSet u = random_state(g, 3, 2.5, 4, true);
    CHECK(std::hypot(sobolev_norm(u.v1, 2), sobolev_norm(u.v2, 2)) == doctest::Approx(2.5));
    CHECK(sobolev_norm(u.theta, 2) == doctest::Approx(2.5));
    CHECK(sobolev_norm(u.q, 2) == doctest::Approx(2.5));
    CHECK(barotropic_divergence(u.v1, u.v2) < 1e-12);
    CHECK(parity_deviation(u.v1, ParityClass::even) < 1e-13);
    CHECK(parity_deviation(u.theta, ParityClass::odd) < 1e-13);
    CHECK(parity_deviation(u.q, ParityClass::even) < 1e-13);
    CHECK(max_error(random_state(g, 3, 2.5, 4, true), u) == 0.0);
}

TEST_CASE("manufactured case names and modulation") {
    for (auto k : {ManufacturedKind::rest, ManufacturedKind::steady, ManufacturedKind::smooth, ManufacturedKind::rough})
        CHECK(manufactured_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(manufactured_kind_from_string("wavy"), ParameterError);
    ManufacturedCase smooth{ManufacturedKind::smooth};
    CHECK(smooth.m(0.0) == 1.0);
    for (double t : {0.0, 0.3, 1.7}) {
        double h = 1e-5;
        CHECK(smooth.dm(t) == doctest::Approx((smooth.m(t + h) - smooth.m(t - h)) / (2 * h)).epsilon(1e-8));
    }
    ManufacturedCase steady{ManufacturedKind::steady};
    CHECK(steady.m(2.0) == 1.0);
    CHECK(steady.dm(2.0) == 0.0);
    CHECK(ManufacturedCase{ManufacturedKind::rest}.profile(grid_n(16)).max_abs() == 0.0);
}

TEST_CASE("smooth profile: closed form and vanishing barotropic divergence") {
    Grid g = grid_n(16);
    ManufacturedCase c{ManufacturedKind::smooth};
    FieldSet u = c.profile(g);
    CHECK(u.max_abs() > 0.1);
    CHECK(barotropic_divergence(dealias(u.v1), dealias(u.v2)) < 1e-12 * u.max_abs());
    CHECK(max_error(c.exact(g, 0.4), c.m(0.4) * u) < 1e-15);
    // The profile is resolution independent: sampling at 32 and restricting gives the 16 values.
    FieldSet fine = c.profile(grid_n(32));
    CHECK(std::abs(fine.theta.at(2, 4, 6) - u.theta.at(1, 2, 3)) < 1e-14);
}

TEST_CASE("dual route: manufactured forcing from the quadratic expansion and directly") {
    Grid g = grid_n(16);
    PhysParams par;
    par.phi_s = {0.3, 1, 1};
    par.theta_h = Profile::linear(0.1, 0.2);
    Model model(g, par);
    for (auto kind : {ManufacturedKind::rest, ManufacturedKind::steady, ManufacturedKind::smooth,
                      ManufacturedKind::rough}) {
        CAPTURE(to_string(kind));
        ManufacturedSolution ms(model, {kind});
        for (double t : {0.0, 0.35, 1.2}) {
            FieldSet direct = manufactured_forcing({kind}, t, model);
            FieldSet expanded = ms.forcing(t);
            CHECK(max_error(direct, expanded) <= 1e-11 * (direct.max_abs() + 1.0));
        }
    }
}

TEST_CASE("the discrete exact solution satisfies the forced system") {
    Grid g = grid_n(16);
    Model model(g, PhysParams());
    ManufacturedSolution ms(model, {ManufacturedKind::smooth});
    const double t = 0.6;
    // d/dt (m P U) = tendency(m P U) + F.
    FieldSet f = ms.forcing(t);
    FieldSet lhs = ms.manufactured_case().dm(t) * ms.discrete_exact(0.0); // m(0) = 1
    FieldSet rhs = model.tendency(ms.discrete_exact(t), &f);
    CHECK(rel(rhs, lhs) < 1e-11);
}

TEST_CASE("manufactured runs converge in time at the design orders") {
    PhysParams par;
    Grid g = grid_n(12);
    auto err = [&](Scheme s, double dt, double t_end) {
        return manufactured_error(g, par, ManufacturedKind::smooth, s, dt, t_end, false);
    };
    double c1 = err(Scheme::imex_cnab2, 2e-3, 0.1), c2 = err(Scheme::imex_cnab2, 1e-3, 0.1);
    CHECK(c1 / c2 == doctest::Approx(4.0).epsilon(0.2));
    double r1 = err(Scheme::erk4, 0.04, 0.4), r2 = err(Scheme::erk4, 0.02, 0.4);
    CHECK(r1 / r2 == doctest::Approx(16.0).epsilon(0.25));
}

TEST_CASE("finite-difference oracle: single-mode derivative and fourth-order accuracy") {
    Grid g = grid_n(16);
    Model model(g, PhysParams());
    Field3D f = Field3D::from_function(g, [](double x, double y, double p) {
        return std::sin(tp * 3 * x + tp * y) * std::cos(tp * (p - 0.2) / 0.8);
    });
    Field3D exact = Field3D::from_function(g, [](double x, double y, double p) {
        return tp * 3 * std::cos(tp * 3 * x + tp * y) * std::cos(tp * (p - 0.2) / 0.8);
    });
    double e2 = (fd_oracle("derivative", {f}, model, 2, Axis::x) - exact).max_abs();
    double e4 = (fd_oracle("derivative", {f}, model, 4, Axis::x) - exact).max_abs();
    CHECK(e4 < 1e-3 * exact.max_abs());
    CHECK(e2 / e4 == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("finite-difference oracle rejects bad requests") {
    Grid g = grid_n(16);
    Model model(g, PhysParams());
    Field3D f(g);
    CHECK_THROWS_AS(fd_oracle("curl", {f}, model), std::invalid_argument);
    CHECK_THROWS_AS(fd_oracle("derivative", {f}, model, 3), std::invalid_argument);
    CHECK_THROWS_AS(fd_oracle("omega", {f}, model), std::invalid_argument);
}

TEST_CASE("resolvable band") {
    Grid g = grid_n(32);
    CHECK(resolvable_band(g, ModelOptions{}) == 10);
    CHECK(resolvable_band(g, ModelOptions{false, false}) == 15);
}

TEST_CASE("invariant checks pass on the model and catch injected defects") {
    Grid g = grid_n(16);
    PhysParams par;
    Model good(g, par), no_dealias(g, par, {false, false}), bad_coriolis(g, par, {true, true});
    CHECK(skew_symmetry_check(good, 10, 1).pass);
    CHECK_FALSE(skew_symmetry_check(no_dealias, 10, 1).pass);
    CHECK(coriolis_work_check(good, 5, 1).pass);
    CHECK_FALSE(coriolis_work_check(bad_coriolis, 5, 1).pass);
    CHECK(hydrostatic_check(good, 3, 1).pass);
    for (const auto& r : monotonicity_check(good, {1e-3, 0.1, Scheme::imex_cnab2, 0.5, false}, 1, 1.0)) {
        CAPTURE(r.name);
        CHECK(r.pass);
        CHECK(r.value < 0.0);
    }
}

TEST_CASE("convergence report rows") {
    ConvergenceReport rep;
    rep.rows.push_back({"a", 1.0, 0.0, 2.0, true});
    CHECK(rep.all_pass());
    rep.rows.push_back({"b", 3.0, 0.0, 2.0, false});
    CHECK_FALSE(rep.all_pass());
}
