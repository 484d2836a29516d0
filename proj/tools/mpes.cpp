#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mpes/app.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Primitive-equation pseudo-spectral solver"};
    app.require_subcommand(1);

    mpes::CommonOptions opts;
    std::uint64_t seed = 0;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "Configuration file (defaults if omitted)");
        sub->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
        sub->add_option("--seed", seed, "Random seed override");
        sub->add_flag("--quiet", opts.quiet, "Only report failures");
    };

    auto* run = app.add_subcommand("run", "Integrate the configured experiment");
    common(run);

    auto* verify = app.add_subcommand("verify", "Convergence, invariant and mutation suites");
    common(verify);
    std::string suites = "convergence,invariants,mutation";
    std::string mutate;
    verify->add_option("--suites", suites, "Comma-separated suites")->capture_default_str();
    verify->add_option("--mutate", mutate, "Inject a defect: coriolis or dealias");

    auto* probe = app.add_subcommand("probe", "Inequality probes");
    common(probe);
    std::string kind;
    int samples = 100;
    probe->add_option("kind", kind, "trilinear, minkowski or gronwall")->required();
    probe->add_option("--samples", samples, "Random samples")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : mpes::exit_error;
    }
    for (auto* sub : {run, verify, probe})
        if (sub->count("--seed")) opts.seed = seed;

    if (*run) return mpes::run_command(opts, std::cerr);
    if (*verify) {
        std::vector<std::string> list;
        std::stringstream ss(suites);
        for (std::string item; std::getline(ss, item, ',');)
            if (!item.empty()) list.push_back(item);
        return mpes::verify_command(opts, list, mutate, std::cerr);
    }
    return mpes::probe_command(opts, kind, samples, std::cerr);
}
