#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "mpes/app.hpp"
#include "mpes/checkpoint.hpp"
#include "mpes/config.hpp"
#include "mpes/errors.hpp"
#include "mpes/output.hpp"
#include "mpes/verification.hpp"

using namespace mpes;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("mpes_test_cli_io_" + std::to_string(::getpid())) / name;
    fs::create_directories(dir);
    return dir;
}

std::string config_key_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<accepted>";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("defaults parse from an empty file") {
    RunConfig c = parse_config("# nothing\n\n");
    CHECK(c == RunConfig{});
}

TEST_CASE("config values are applied") {
    RunConfig c = parse_config(R"(
grid.nx = 24   # trailing comment
grid.ny = 16
grid.np = 12
domain.p0 = 0.1
domain.p1 = 0.9
physics.preset = physical
physics.cp = inf
physics.theta_bar.kind = proportional
physics.theta_bar.a = 300
physics.phi_s.amp = 2.5
time.scheme = erk4_fully_explicit
time.adapt = true
forcing.kind = manufactured:smooth
initial.kind = random_smooth:7, 0.5, 3
initial.symmetry = paper_parity
output.norms_every = 10
)");
    CHECK(c.grid.nx == 24);
    CHECK(c.grid.np == 12);
    CHECK(c.physics.p0 == 0.1);
    CHECK(c.physics.R == 287.0);
    CHECK(std::isinf(c.physics.cp));
    CHECK(c.physics.theta_bar == Profile::proportional(300.0));
    CHECK(c.physics.phi_s.amp == 2.5);
    CHECK(c.time.scheme == Scheme::erk4);
    CHECK(c.time.adapt);
    CHECK(c.forcing.kind == ForcingSpec::Kind::manufactured);
    CHECK(c.forcing.argument == "smooth");
    CHECK(c.initial.kind == InitialSpec::Kind::random_smooth);
    CHECK(c.initial.seed == 7);
    CHECK(c.initial.amplitude == 0.5);
    CHECK(c.initial.band == 3);
    CHECK(c.initial.paper_parity);
    CHECK(c.output.norms_every == 10);
}

TEST_CASE("config errors name the offending key") {
    CHECK(config_key_of("domain.p0 = 1.0\ndomain.p1 = 1.0\n") == "domain.p0");
    CHECK(config_key_of("domain.p0 = 0.5\ndomain.p1 = 0.4\n") == "domain.p0");
    CHECK(config_key_of("grid.nx = 15\n") == "grid.nx");
    CHECK(config_key_of("grid.colour = blue\n") == "grid.colour");
    CHECK(config_key_of("grid.nx = 16\ngrid.nx = 16\n") == "grid.nx");
    CHECK(config_key_of("time.dt = fast\n") == "time.dt");
    CHECK(config_key_of("time.dt = -1\n") == "time.dt");
    CHECK(config_key_of("time.scheme = euler\n") == "time.scheme");
    CHECK(config_key_of("physics.mu_v = 0\n") == "physics.mu_v");
    CHECK(config_key_of("physics.theta_bar.kind = cubic\n") == "physics.theta_bar.kind");
    CHECK(config_key_of("forcing.kind = lots\n") == "forcing.kind");
    CHECK(config_key_of("initial.kind = random_smooth:1,2\n") == "initial.kind");
    CHECK(config_key_of("initial.kind = random_smooth:1,1,8\n") == "initial.kind");
    CHECK(config_key_of("initial.symmetry = mirror\n") == "initial.symmetry");
    CHECK(config_key_of("output.norms_every = 0\n") == "output.norms_every");
    CHECK(config_key_of("physics.preset = martian\n") == "physics.preset");
    CHECK(config_key_of("grid.nx 16\n") == "");
}

TEST_CASE("property: parse, serialize, parse is the identity") {
    std::vector<std::string> texts = {
        "",
        "physics.preset = physical\nphysics.f_cor = 1e-4\n",
        "physics.cp = inf\nphysics.theta_h.kind = linear\nphysics.theta_h.a = 0.1\nphysics.theta_h.b = "
        "0.30000000000000004\n",
        "time.dt = 0.1\ntime.t_end = 0.7\nforcing.kind = file:/tmp/f.bin\ninitial.kind = file:/tmp/i.bin\n",
        "initial.kind = random_smooth:18446744073709551,1e-3,2\noutput.checkpoint_path = c.bin\n"
        "output.checkpoint_every = 5\n",
        "initial.kind = manufactured:rough\nphysics.phi_s.jx = -2\nphysics.phi_s.jy = 3\n",
    };
    for (const auto& t : texts) {
        CAPTURE(t);
        RunConfig a = parse_config(t);
        std::string s = serialize_config(a);
        RunConfig b = parse_config(s);
        CHECK(a == b);
        CHECK(serialize_config(b) == s);
    }
}

TEST_CASE("checkpoint round trip is bit exact") {
    fs::path dir = scratch("ckpt");
    RunConfig cfg = parse_config("grid.nx = 12\ngrid.ny = 10\ngrid.np = 8\nphysics.cp = inf\n");
    Grid g = cfg.grid;
    State s(random_state(g, 4, 1.0, 3), 0.1 + 0.2);
    s.u.q[5] = -0.0;
    s.u.theta[7] = 1e-310;
    std::string path = (dir / "a.mpes").string();
    write_checkpoint(path, cfg, s);
    Checkpoint cp = read_checkpoint(path);
    CHECK(cp.config == cfg);
    CHECK(cp.state.t == s.t);
    CHECK(checksum(cp.state.u) == checksum(s.u));
    CHECK(std::signbit(cp.state.u.q[5]));

    std::string bytes = slurp(path);
    CHECK(bytes.substr(0, 4) == "MPES");
    CHECK(bytes[4] == 1);
    CHECK(bytes[8] == 12);
    CHECK(bytes[12] == 10);
    CHECK(bytes[16] == 8);
    std::uint64_t len = 0;
    for (int i = 7; i >= 0; --i) len = (len << 8) | static_cast<unsigned char>(bytes[20 + i]);
    CHECK(bytes.substr(28, 6) == "# t = ");
    CHECK(bytes.size() == 28 + len + 4 * 8 * g.size());
}

TEST_CASE("corrupt checkpoints are rejected") {
    fs::path dir = scratch("corrupt");
    RunConfig cfg = parse_config("grid.nx = 8\ngrid.ny = 8\ngrid.np = 8\n");
    State s(random_state(cfg.grid, 1, 1.0, 2), 0.0);
    std::string good = (dir / "good.mpes").string();
    write_checkpoint(good, cfg, s);
    std::string bytes = slurp(good);

    auto write = [&](const std::string& name, const std::string& content) {
        std::string p = (dir / name).string();
        std::ofstream(p, std::ios::binary) << content;
        return p;
    };
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(read_checkpoint(write("magic", bad_magic)), DataIntegrityError);
    std::string bad_version = bytes;
    bad_version[4] = 9;
    CHECK_THROWS_AS(read_checkpoint(write("version", bad_version)), DataIntegrityError);
    CHECK_THROWS_AS(read_checkpoint(write("short", bytes.substr(0, bytes.size() - 3))), DataIntegrityError);
    CHECK_THROWS_AS(read_checkpoint(write("long", bytes + "x")), DataIntegrityError);
    std::string bad_dims = bytes;
    bad_dims[8] = 16;
    CHECK_THROWS_AS(read_checkpoint(write("dims", bad_dims)), DataIntegrityError);
    std::string nan = bytes;
    for (int i = 0; i < 8; ++i) nan[nan.size() - 8 + i] = char(0xff);
    CHECK_THROWS_AS(read_checkpoint(write("nan", nan)), DataIntegrityError);
    CHECK_THROWS_AS(read_checkpoint((dir / "missing").string()), DataIntegrityError);
}

TEST_CASE("tables are written as NDJSON with a CSV mirror") {
    fs::path dir = scratch("table");
    std::string path = (dir / "out.ndjson").string();
    CHECK(csv_mirror_path(path) == (dir / "out.csv").string());
    write_table(path, {{"t", "x"}, {{0.0, 1.5}, {0.1, std::nan("")}}});
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    auto j = nlohmann::json::parse(line);
    CHECK(j["t"] == 0.0);
    CHECK(j["x"] == 1.5);
    std::getline(in, line);
    CHECK(nlohmann::json::parse(line)["x"].is_null());
    std::string csv = slurp(dir / "out.csv");
    CHECK(csv.rfind("t,x\n0,1.5\n", 0) == 0);
}

TEST_CASE("run command: zero state gives all-zero norms") {
    fs::path dir = scratch("run_zero");
    std::string cfg = (dir / "zero.cfg").string();
    std::ofstream(cfg) << "grid.nx = 8\ngrid.ny = 8\ngrid.np = 8\ntime.dt = 0.01\ntime.t_end = 0.03\n"
                          "output.checkpoint_path = final.mpes\n";
    std::ostringstream log;
    CHECK(run_command({cfg, dir.string(), std::nullopt, true}, log) == exit_ok);
    std::ifstream in(dir / "norms.ndjson");
    int lines = 0;
    for (std::string line; std::getline(in, line); ++lines) {
        auto j = nlohmann::json::parse(line);
        for (auto& [k, v] : j.items())
            if (k != "t" && !v.is_null()) CHECK(v.get<double>() == 0.0);
    }
    CHECK(lines == 4);
    CHECK(fs::exists(dir / "norms.csv"));
    Checkpoint cp = read_checkpoint((dir / "final.mpes").string());
    CHECK(cp.state.t == doctest::Approx(0.03));
    CHECK(cp.state.u.max_abs() == 0.0);
}

TEST_CASE("run command: restart from a checkpoint continues the trajectory") {
    fs::path dir = scratch("restart");
    std::string base = "grid.nx = 8\ngrid.ny = 8\ngrid.np = 8\ntime.dt = 0.01\n";
    RunConfig full = parse_config(base + "time.t_end = 0.04\ninitial.kind = random_smooth:3,1,2\n");
    RunResult a = execute_run(full, dir.string());

    RunConfig first = parse_config(base + "time.t_end = 0.02\ninitial.kind = random_smooth:3,1,2\n"
                                          "output.checkpoint_path = half.mpes\n");
    execute_run(first, dir.string());
    RunConfig second = parse_config(base + "time.t_end = 0.02\ninitial.kind = file:" +
                                    (dir / "half.mpes").string() + "\n");
    RunResult b = execute_run(second, dir.string());
    CHECK(b.trajectory.final_state.t == doctest::Approx(0.04));
    // The restart bootstraps the multistep history again, so agreement is to
    // the scheme's accuracy rather than bitwise.
    CHECK(max_error(a.trajectory.final_state.u, b.trajectory.final_state.u) < 1e-5);
}

TEST_CASE("run command: configuration problems exit 1 naming the key") {
    fs::path dir = scratch("run_bad");
    std::string cfg = (dir / "bad.cfg").string();
    std::ofstream(cfg) << "domain.p0 = 1.0\ndomain.p1 = 0.5\n";
    std::ostringstream log;
    CHECK(run_command({cfg, dir.string(), std::nullopt, true}, log) == exit_error);
    CHECK(log.str().find("domain.p0") != std::string::npos);

    std::ofstream(cfg) << "initial.kind = file:" << (dir / "absent.mpes").string() << "\n";
    std::ostringstream log2;
    CHECK(run_command({cfg, dir.string(), std::nullopt, true}, log2) == exit_error);
    CHECK(log2.str().find("initial.kind") != std::string::npos);

    std::ostringstream log3;
    CHECK(run_command({(dir / "nope.cfg").string(), dir.string(), std::nullopt, true}, log3) == exit_error);
}

TEST_CASE("run command: blowup exits 2") {
    fs::path dir = scratch("run_blowup");
    // A forcing file with a huge constant drives the state past the blowup threshold.
    RunConfig fc = parse_config("grid.nx = 8\ngrid.ny = 8\ngrid.np = 8\n");
    State f(fc.grid, 0.0);
    f.u.q = Field3D(fc.grid, 1e12);
    write_checkpoint((dir / "force.mpes").string(), fc, f);
    std::string cfg = (dir / "blow.cfg").string();
    std::ofstream(cfg) << "grid.nx = 8\ngrid.ny = 8\ngrid.np = 8\ntime.dt = 0.01\ntime.t_end = 0.1\n"
                          "forcing.kind = file:" << (dir / "force.mpes").string() << "\n";
    std::ostringstream log;
    CHECK(run_command({cfg, dir.string(), std::nullopt, true}, log) == exit_blowup);
    CHECK(log.str().find("blowup") != std::string::npos);
}

TEST_CASE("verify and probe argument errors exit 1") {
    fs::path dir = scratch("verify");
    std::ostringstream log;
    CHECK(verify_command({"", dir.string(), std::nullopt, true}, {}, "", log) == exit_error);
    CHECK(verify_command({"", dir.string(), std::nullopt, true}, {"everything"}, "", log) == exit_error);
    CHECK(verify_command({"", dir.string(), std::nullopt, true}, {"invariants"}, "gravity", log) == exit_error);
    CHECK(probe_command({"", dir.string(), std::nullopt, true}, "sobolev", 10, log) == exit_error);
}

TEST_CASE("probes write their series") {
    fs::path dir = scratch("probe");
    std::string cfg = (dir / "p.cfg").string();
    std::ofstream(cfg) << "grid.nx = 12\ngrid.ny = 12\ngrid.np = 12\n"
                          "time.dt = 0.001\ntime.t_end = 0.01\ninitial.kind = random_smooth:1,1,2\n";
    std::ostringstream log;
    CHECK(probe_command({cfg, dir.string(), 3, true}, "minkowski", 10, log) == exit_ok);
    CHECK(log.str().find("0 violations") != std::string::npos);
    CHECK(probe_command({cfg, dir.string(), 3, true}, "trilinear", 10, log) == exit_ok);
    CHECK(probe_command({cfg, dir.string(), 3, true}, "gronwall", 1, log) == exit_ok);
    for (const char* k : {"minkowski", "trilinear", "gronwall"}) {
        CAPTURE(k);
        CHECK(fs::exists(dir / (std::string("probe_") + k + ".ndjson")));
        CHECK(fs::exists(dir / (std::string("probe_") + k + ".csv")));
    }
}

TEST_CASE("verify runs the invariant suite and flags a mutation") {
    fs::path dir = scratch("verify_inv");
    std::ostringstream log;
    CHECK(verify_command({"", dir.string(), std::nullopt, true}, {"invariants"}, "", log) == exit_ok);
    CHECK(fs::exists(dir / "verify.ndjson"));
    std::ostringstream log2;
    CHECK(verify_command({"", dir.string(), std::nullopt, true}, {"invariants"}, "coriolis", log2) == exit_error);
    CHECK(log2.str().find("FAIL coriolis_work") != std::string::npos);
}
