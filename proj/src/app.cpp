#include "mpes/app.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>

#include "mpes/checkpoint.hpp"
#include "mpes/errors.hpp"
#include "mpes/output.hpp"
#include "mpes/verification.hpp"

namespace mpes {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

std::string resolve(const std::string& out_dir, const std::string& path) {
    if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
    return (std::filesystem::path(out_dir) / path).string();
}

RunConfig load(const CommonOptions& opts) {
    RunConfig cfg = opts.config_path.empty() ? parse_config("") : load_config(opts.config_path);
    if (opts.seed) cfg.initial.seed = *opts.seed;
    return cfg;
}

ManufacturedKind case_of(const std::string& key, const std::string& name) {
    try {
        return manufactured_kind_from_string(name);
    } catch (const ParameterError& e) {
        throw ConfigError(key, e.what());
    }
}

State load_state(const std::string& key, const std::string& path, const Grid& grid) {
    Checkpoint cp;
    try {
        cp = read_checkpoint(path);
    } catch (const DataIntegrityError& e) {
        throw ConfigError(key, e.what());
    }
    const Grid& g = cp.state.grid();
    if (g.nx != grid.nx || g.ny != grid.ny || g.np != grid.np || g.p0 != grid.p0 || g.p1 != grid.p1)
        throw ConfigError(key, "grid of '" + path + "' does not match the configured grid");
    return cp.state;
}

// Runs a body that reports through exit codes, mapping the error types.
template <class F>
int guarded(std::ostream& log, F&& body) {
    try {
        return body();
    } catch (const BlowupError& e) {
        log << "blowup: " << e.what() << " (last good t = " << e.last_good_time() << ")\n";
        return exit_blowup;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
    } catch (const ParameterError& e) {
        log << "parameter error: " << e.what() << "\n";
    } catch (const ConstraintError& e) {
        log << "constraint error: " << e.what() << "\n";
    } catch (const DataIntegrityError& e) {
        log << "data error: " << e.what() << "\n";
    }
    return exit_error;
}

void print_rows(std::ostream& log, const std::vector<ConvergenceRow>& rows) {
    for (const auto& r : rows)
        log << (r.pass ? "PASS " : "FAIL ") << r.name << " = " << r.value << "  [" << r.lo << ", "
            << r.hi << "]\n";
}

} // namespace

State make_initial_state(const RunConfig& cfg, const Model& model) {
    const Grid& g = model.grid();
    const InitialSpec& in = cfg.initial;
    State s(g, 0.0);
    switch (in.kind) {
    case InitialSpec::Kind::rest: break;
    case InitialSpec::Kind::random_smooth:
        s.u = random_state(g, in.seed, in.amplitude, in.band, in.paper_parity);
        break;
    case InitialSpec::Kind::file: s = load_state("initial.kind", in.argument, g); break;
    case InitialSpec::Kind::manufactured:
        s = ManufacturedSolution(model, {case_of("initial.kind", in.argument)}).initial_state();
        break;
    }
    if (in.paper_parity && in.kind != InitialSpec::Kind::random_smooth) {
        s.u.v1 = parity_project(s.u.v1, ParityClass::even);
        s.u.v2 = parity_project(s.u.v2, ParityClass::even);
        s.u.theta = parity_project(s.u.theta, ParityClass::odd);
        s.u.q = parity_project(s.u.q, ParityClass::even);
    }
    return s;
}

Forcing make_forcing(const RunConfig& cfg, const Model& model) {
    switch (cfg.forcing.kind) {
    case ForcingSpec::Kind::zero: return {};
    case ForcingSpec::Kind::manufactured: {
        auto ms = std::make_shared<ManufacturedSolution>(
            model, ManufacturedCase{case_of("forcing.kind", cfg.forcing.argument)});
        return [ms](double t) { return ms->forcing(t); };
    }
    case ForcingSpec::Kind::file: {
        auto f = std::make_shared<FieldSet>(load_state("forcing.kind", cfg.forcing.argument, model.grid()).u);
        return [f](double) { return *f; };
    }
    }
    return {};
}

void fill_budget_residual(std::vector<NormReport>& series) {
    for (auto& r : series) r.values["budget_residual"] = nan_value;
    // Budgets need uniform spacing; a short final interval is left out.
    for (std::size_t n = series.size(); n >= 3 && n + 1 >= series.size(); --n) {
        std::vector<NormReport> head(series.begin(), series.begin() + long(n));
        std::vector<BudgetSample> budget;
        try {
            budget = energy_budget(head);
        } catch (const ParameterError&) {
            continue;
        }
        for (std::size_t i = 0; i < budget.size(); ++i) {
            double worst = 0.0;
            for (const BudgetComponent* c : {&budget[i].v, &budget[i].theta, &budget[i].q})
                if (c->max_term > 0.0) worst = std::max(worst, std::abs(c->residual) / c->max_term);
            series[i + 1].values["budget_residual"] = worst;
        }
        return;
    }
}

RunResult execute_run(const RunConfig& cfg, const std::string& out_dir) {
    Model model(cfg.grid, cfg.physics);
    State s0 = make_initial_state(cfg, model);
    Forcing forcing = make_forcing(cfg, model);
    const std::string ckpt = resolve(out_dir, cfg.output.checkpoint_path);

    RunResult res;
    auto report = [&](const State& s) {
        if (!forcing) return norm_report(s, model);
        FieldSet f = forcing(s.t);
        return norm_report(s, model, &f);
    };
    auto observer = [&](const State& s, long step) {
        if (step % cfg.output.norms_every == 0) res.series.push_back(report(s));
        if (!ckpt.empty() && cfg.output.checkpoint_every > 0 && step > 0 &&
            step % cfg.output.checkpoint_every == 0)
            write_checkpoint(ckpt, cfg, s);
    };
    res.trajectory = run(s0, model, cfg.time, forcing, observer, 1);

    const State& last = res.trajectory.final_state;
    if (!res.trajectory.blowup && (res.series.empty() || res.series.back().t != last.t))
        res.series.push_back(report(last));
    if (!ckpt.empty() && !res.trajectory.blowup) write_checkpoint(ckpt, cfg, last);
    fill_budget_residual(res.series);
    write_table(resolve(out_dir, cfg.output.norms_path), norm_table(res.series));
    return res;
}

int run_command(const CommonOptions& opts, std::ostream& log) {
    return guarded(log, [&] {
        RunConfig cfg = load(opts);
        RunResult res = execute_run(cfg, opts.out_dir);
        const Trajectory& tr = res.trajectory;
        if (tr.blowup) {
            log << "blowup: " << tr.error << " (last good t = " << tr.last_good_time << ")\n";
            return exit_blowup;
        }
        if (!opts.quiet) {
            const NormReport& r = res.series.back();
            log << "completed t = " << tr.final_state.t << " in " << tr.times.size() - 1
                << " steps; v.H2 = " << r.at("v.H2") << ", theta.H2 = " << r.at("theta.H2")
                << ", q.H2 = " << r.at("q.H2") << "\n";
        }
        return exit_ok;
    });
}

int verify_command(const CommonOptions& opts, const std::vector<std::string>& suites,
                   const std::string& mutate, std::ostream& log) {
    return guarded(log, [&]() -> int {
        if (suites.empty()) throw ConfigError("suites", "no suite selected");
        for (const auto& s : suites)
            if (s != "convergence" && s != "invariants" && s != "mutation")
                throw ConfigError("suites", "unknown suite '" + s + "'");
        if (!mutate.empty() && mutate != "coriolis" && mutate != "dealias")
            throw ConfigError("mutate", "expected coriolis or dealias");

        RunConfig cfg = load(opts);
        const std::uint64_t seed = opts.seed.value_or(1);
        auto has = [&](const char* s) { return std::find(suites.begin(), suites.end(), s) != suites.end(); };
        auto mutated = [](const std::string& m) {
            ModelOptions o;
            if (m == "coriolis") o.coriolis_component_bug = true;
            if (m == "dealias") o.dealias = false;
            return o;
        };

        std::vector<ConvergenceRow> rows;
        if (has("convergence")) {
            ConvergenceConfig cc;
            cc.params = cfg.physics;
            auto rep = convergence_suite(cc);
            rows.insert(rows.end(), rep.rows.begin(), rep.rows.end());
        }
        if (has("invariants")) {
            InvariantConfig ic;
            ic.params = cfg.physics;
            ic.seed = seed;
            ic.options = mutated(mutate);
            auto rep = invariant_suite(ic);
            rows.insert(rows.end(), rep.rows.begin(), rep.rows.end());
        }
        if (has("mutation")) {
            // Each mutation must be caught by at least one invariant.
            for (const char* m : {"coriolis", "dealias"}) {
                InvariantConfig ic;
                ic.params = cfg.physics;
                ic.seed = seed;
                ic.options = mutated(m);
                auto rep = invariant_suite(ic);
                double caught = 0.0;
                for (const auto& r : rep.rows) caught += r.pass ? 0.0 : 1.0;
                rows.push_back({std::string("mutation_") + m + "_caught", caught, 1.0,
                                std::numeric_limits<double>::infinity(), caught >= 1.0});
            }
        }
        write_rows(resolve(opts.out_dir, "verify.ndjson"), rows);
        bool ok = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; });
        if (!opts.quiet || !ok) print_rows(log, rows);
        log << (ok ? "verify: all checks passed\n" : "verify: FAILED\n");
        return ok ? exit_ok : exit_error;
    });
}

int probe_command(const CommonOptions& opts, const std::string& kind, int samples, std::ostream& log) {
    return guarded(log, [&]() -> int {
        if (kind != "trilinear" && kind != "minkowski" && kind != "gronwall")
            throw ConfigError("kind", "unknown probe kind '" + kind + "'");
        if (samples < 1) throw ConfigError("samples", "must be >= 1");
        RunConfig cfg = load(opts);
        const Grid& g = cfg.grid;
        const std::uint64_t seed = opts.seed.value_or(cfg.initial.seed);
        const int band = dealias_band(std::min({g.nx, g.ny, g.np}));
        Table table;

        if (kind == "trilinear") {
            table.columns = {"sample", "lhs", "rhs", "ratio"};
            double worst = 0.0;
            for (int i = 0; i < samples; ++i) {
                std::uint64_t b = seed + 3 * std::uint64_t(i);
                Field3D f = random_field(g, b, band), gg = random_field(g, b + 1, band),
                        h = random_field(g, b + 2, band);
                double lhs = std::abs(trilinear_form(f, gg, h)), rhs = trilinear_bound(f, gg, h);
                table.rows.push_back({double(i), lhs, rhs, lhs / rhs});
                worst = std::max(worst, lhs / rhs);
            }
            log << "trilinear: max ratio = " << worst << " over " << samples << " samples\n";
        } else if (kind == "minkowski") {
            table.columns = {"sample", "lhs", "rhs", "violation"};
            int violations = 0;
            for (int i = 0; i < samples; ++i) {
                std::uint64_t b = seed + 2 * std::uint64_t(i);
                auto [v1, v2] = barotropic_project(random_field(g, b, band), random_field(g, b + 1, band));
                auto [lhs, rhs] = minkowski_probe(v1, v2);
                bool bad = !(lhs <= rhs);
                violations += bad;
                table.rows.push_back({double(i), lhs, rhs, bad ? 1.0 : 0.0});
            }
            log << "minkowski: " << violations << " violations over " << samples << " samples\n";
        } else {
            RunResult res = execute_run(cfg, opts.out_dir);
            if (res.trajectory.blowup) {
                log << "blowup: " << res.trajectory.error << "\n";
                return exit_blowup;
            }
            table.columns = {"t"};
            for (const char* n : gronwall_names) {
                table.columns.push_back(std::string("lhs_") + n);
                table.columns.push_back(std::string("rhs_") + n);
            }
            std::array<double, 4> fitted{};
            for (const GronwallSample& s : gronwall_series(res.series, cfg.physics)) {
                std::vector<double> row{s.t};
                for (int k = 0; k < 4; ++k) {
                    row.push_back(s.lhs[k]);
                    row.push_back(s.rhs[k]);
                    if (s.rhs[k] > 0.0) fitted[k] = std::max(fitted[k], s.lhs[k] / s.rhs[k]);
                }
                table.rows.push_back(std::move(row));
            }
            for (int k = 0; k < 4; ++k)
                log << "gronwall " << gronwall_names[k] << ": fitted C* = " << fitted[k] << "\n";
        }
        write_table(resolve(opts.out_dir, "probe_" + kind + ".ndjson"), table);
        return exit_ok;
    });
}

} // namespace mpes
