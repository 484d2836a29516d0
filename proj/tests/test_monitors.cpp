#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "mpes/errors.hpp"
#include "mpes/monitors.hpp"
#include "mpes/verification.hpp"

using namespace mpes;

namespace {

constexpr double tp = 2.0 * std::numbers::pi;

Grid grid_n(int n) { return Grid(n, n, n, 0.2, 1.0); }

NormReport sample(double t, double ev) {
    NormReport r;
    r.t = t;
    for (const auto& k : norm_report_keys()) r.values[k] = 0.0;
    r.values["E.v"] = ev;
    return r;
}

} // namespace

TEST_CASE("report keys are fixed and unique") {
    const auto& keys = norm_report_keys();
    CHECK(std::set<std::string>(keys.begin(), keys.end()).size() == keys.size());
    Grid g = grid_n(16);
    Model model(g, PhysParams());
    NormReport r = norm_report(State(random_state(g, 1, 1.0, 4), 0.3), model);
    CHECK(r.values.size() == keys.size());
    for (const auto& k : keys) {
        CAPTURE(k);
        CHECK(r.values.count(k) == 1);
        CHECK(std::isfinite(r.at(k)));
    }
    CHECK(r.t == 0.3);
    CHECK_THROWS_AS(r.at("no.such.key"), std::out_of_range);
}

TEST_CASE("the zero state has all-zero norms") {
    Grid g = grid_n(16);
    Model model(g, PhysParams());
    NormReport r = norm_report(State(g, 0.0), model);
    for (const auto& [k, v] : r.values) {
        CAPTURE(k);
        CHECK(v == 0.0);
    }
}

TEST_CASE("energies and dissipation of a single mode") {
    Grid g = grid_n(16);
    PhysParams par;
    par.theta_bar = Profile::proportional(2.0);
    par.cp = std::numeric_limits<double>::infinity();
    Model model(g, par);
    State s(g, 0.0);
    const double kp = tp / g.lp();
    s.u.q = Field3D::from_function(g, [&](double x, double, double p) {
        return std::cos(tp * 2 * x) * std::cos(kp * (p - g.p0));
    });
    NormReport r = norm_report(s, model);
    const double vol = g.volume();
    CHECK(r.at("E.q") == doctest::Approx(0.5 * vol / 4.0));
    CHECK(r.at("diss_h.q") == doctest::Approx(par.mu_q * tp * tp * 4 * vol / 4.0));
    // c = (g / 2R)^2 is constant here.
    CHECK(r.at("diss_p.q") == doctest::Approx(par.nu_q * 0.25 * kp * kp * vol / 4.0));
    CHECK(r.at("q.L2") == doctest::Approx(std::sqrt(vol / 4.0)));
    CHECK(r.at("qp.L2") == doctest::Approx(kp * std::sqrt(vol / 4.0)));
}

TEST_CASE("pressure work balances the thermal coupling") {
    // -<v, grad Phi> = -<omega, R T / p> after integrating by parts.
    Grid g = grid_n(24);
    PhysParams par;
    par.cp = std::numeric_limits<double>::infinity();
    Model model(g, par);
    FieldSet u = random_state(g, 3, 1.0, 3);
    NormReport r = norm_report(State(u, 0.0), model);
    CHECK(r.at("pressure_work") == doctest::Approx(-r.at("coupling")).epsilon(1e-2));
}

TEST_CASE("parity deviations are reported") {
    Grid g = grid_n(16);
    Model model(g, PhysParams());
    NormReport sym = norm_report(State(random_state(g, 2, 1.0, 4, true), 0.0), model);
    CHECK(sym.at("parity.v") < 1e-13);
    CHECK(sym.at("parity.theta") < 1e-13);
    CHECK(sym.at("parity.q") < 1e-13);
    NormReport gen = norm_report(State(random_state(g, 2, 1.0, 4, false), 0.0), model);
    CHECK(gen.at("parity.theta") > 0.1);
}

TEST_CASE("energy budget needs uniform sampling") {
    std::vector<NormReport> s{sample(0.0, 1.0), sample(0.1, 1.0)};
    CHECK_THROWS_AS(energy_budget(s), ParameterError);
    s.push_back(sample(0.25, 1.0));
    CHECK_THROWS_AS(energy_budget(s), ParameterError);
}

TEST_CASE("energy budget of a synthetic exponential decay") {
    // E = exp(-2t) with diss_h = 2E: the centred difference leaves an O(dt^2) residual.
    std::vector<NormReport> s;
    const double dt = 1e-3;
    for (int i = 0; i < 5; ++i) {
        double t = i * dt;
        NormReport r = sample(t, std::exp(-2 * t));
        r.values["diss_h.v"] = 2 * std::exp(-2 * t);
        s.push_back(r);
    }
    auto b = energy_budget(s);
    REQUIRE(b.size() == 3);
    for (const auto& x : b) {
        CHECK(x.t == doctest::Approx(s[&x - &b[0] + 1].t));
        CHECK(std::abs(x.v.residual) < 2.0 * 4.0 * dt * dt / 6.0 * 1.01);
        CHECK(x.v.max_term == doctest::Approx(std::abs(x.v.dEdt)).epsilon(1e-5));
    }
}

TEST_CASE("budgets of a model run close to the time-discretisation error") {
    Grid g = grid_n(16);
    Model model(g, PhysParams());
    for (const auto& row : budget_check(model, {1e-4, 0.005, Scheme::imex_cnab2, 0.5, false}, 7, 1.0, 3)) {
        CAPTURE(row.name);
        CHECK(row.pass);
    }
}

TEST_CASE("trilinear form with constant fields") {
    Grid g = grid_n(16);
    Field3D f(g, 2.0), gg(g, 3.0), h(g, -0.5);
    // int_{M'} (int f dp)(int g h dp) = 2 * 3 * (-0.5) * Lp^2.
    CHECK(trilinear_form(f, gg, h) == doctest::Approx(-3.0 * g.lp() * g.lp()));
}

TEST_CASE("trilinear form of separable fields") {
    Grid g = grid_n(16);
    Field3D f = Field3D::from_function(g, [](double x, double, double) { return std::cos(tp * x); });
    Field3D gg = Field3D::from_function(g, [](double x, double, double p) {
        return std::cos(tp * x) * (1.0 + std::sin(tp * (p - 0.2) / 0.8));
    });
    Field3D h(g, 1.0);
    CHECK(trilinear_form(f, gg, h) == doctest::Approx(0.5 * g.lp() * g.lp()));
}

TEST_CASE("property: trilinear ratio is finite and bounded on random data") {
    Grid g = grid_n(16);
    for (std::uint64_t s = 1; s <= 20; ++s) {
        Field3D f = random_field(g, 3 * s, 4), gg = random_field(g, 3 * s + 1, 4), h = random_field(g, 3 * s + 2, 4);
        double ratio = std::abs(trilinear_form(f, gg, h)) / trilinear_bound(f, gg, h);
        CHECK(std::isfinite(ratio));
        CHECK(ratio < 1.0);
    }
}

TEST_CASE("Minkowski probe: closed form for one baroclinic mode") {
    Grid g = grid_n(16);
    const double lp = g.lp();
    Field3D v1 = Field3D::from_function(g, [&](double x, double, double p) {
        return std::sin(tp * x) * std::cos(tp * (p - g.p0) / lp);
    });
    auto [lhs, rhs] = minkowski_probe(v1, Field3D(g));
    CHECK(lhs == doctest::Approx(std::pow(lp, 1.5) / 2.0));
    // int |cos| over one period is 2 Lp / pi; discrete sums of |cos| are not
    // exact, hence the looser tolerance.
    CHECK(rhs == doctest::Approx(std::sqrt(lp) * tp / std::sqrt(2.0) * 2.0 * lp / std::numbers::pi).epsilon(2e-2));
    CHECK(lhs <= rhs);
}

TEST_CASE("property: Minkowski inequality holds on random projected fields") {
    Grid g = grid_n(16);
    for (std::uint64_t s = 1; s <= 20; ++s) {
        auto [v1, v2] = barotropic_project(random_field(g, 2 * s, 5), random_field(g, 2 * s + 1, 5));
        auto [lhs, rhs] = minkowski_probe(v1, v2);
        CHECK(lhs <= rhs);
    }
}

TEST_CASE("Gronwall series are finite along a run") {
    Grid g = grid_n(16);
    Model model(g, PhysParams());
    std::vector<NormReport> series;
    run(State(random_state(g, 5, 1.0, 4), 0.0), model, {1e-3, 0.02, Scheme::imex_cnab2, 0.5, false}, {},
        [&](const State& s, long) { series.push_back(norm_report(s, model)); });
    auto gs = gronwall_series(series, model.params());
    CHECK(gs.size() == series.size() - 2);
    for (const auto& s : gs)
        for (int k = 0; k < 4; ++k) {
            CHECK(std::isfinite(s.lhs[k]));
            CHECK(s.rhs[k] > 0.0);
        }
}
