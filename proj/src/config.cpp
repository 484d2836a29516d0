#include "mpes/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include "mpes/errors.hpp"

namespace mpes {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || std::isnan(out))
        throw ConfigError(key, "expected a number, got '" + v + "'");
    return out;
}

long to_long(const std::string& key, const std::string& v) {
    long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::pair<std::string, std::string> split_kind(const std::string& v) {
    auto colon = v.find(':');
    if (colon == std::string::npos) return {v, ""};
    return {v.substr(0, colon), v.substr(colon + 1)};
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Entry {
    std::string key;
    Setter set;
    Getter get;
};

template <class Ref>
Entry real_entry(const std::string& key, Ref ref) {
    return {key, [ref](RunConfig& c, const std::string& k, const std::string& v) { ref(c) = to_double(k, v); },
            [ref](const RunConfig& c) { return fmt(ref(const_cast<RunConfig&>(c))); }};
}

template <class Ref>
Entry int_entry(const std::string& key, Ref ref) {
    return {key,
            [ref](RunConfig& c, const std::string& k, const std::string& v) {
                ref(c) = static_cast<std::remove_reference_t<decltype(ref(c))>>(to_long(k, v));
            },
            [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

void profile_entries(std::vector<Entry>& out, const std::string& name, Profile PhysParams::*member) {
    out.push_back({"physics." + name + ".kind",
                   [member](RunConfig& c, const std::string& k, const std::string& v) {
                       try {
                           (c.physics.*member).kind = profile_kind_from_string(v);
                       } catch (const ParameterError& e) {
                           throw ConfigError(k, e.what());
                       }
                   },
                   [member](const RunConfig& c) { return to_string((c.physics.*member).kind); }});
    out.push_back(real_entry("physics." + name + ".a",
                             [member](RunConfig& c) -> double& { return (c.physics.*member).a; }));
    out.push_back(real_entry("physics." + name + ".b",
                             [member](RunConfig& c) -> double& { return (c.physics.*member).b; }));
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = [] {
        std::vector<Entry> t;
        t.push_back(int_entry("grid.nx", [](RunConfig& c) -> int& { return c.grid.nx; }));
        t.push_back(int_entry("grid.ny", [](RunConfig& c) -> int& { return c.grid.ny; }));
        t.push_back(int_entry("grid.np", [](RunConfig& c) -> int& { return c.grid.np; }));
        t.push_back(real_entry("domain.p0", [](RunConfig& c) -> double& { return c.grid.p0; }));
        t.push_back(real_entry("domain.p1", [](RunConfig& c) -> double& { return c.grid.p1; }));
        auto phys = [&t](const std::string& name, double PhysParams::*m) {
            t.push_back(real_entry("physics." + name,
                                   [m](RunConfig& c) -> double& { return c.physics.*m; }));
        };
        phys("R", &PhysParams::R);
        phys("cp", &PhysParams::cp);
        phys("g", &PhysParams::g);
        phys("f_cor", &PhysParams::f_cor);
        phys("mu_v", &PhysParams::mu_v);
        phys("nu_v", &PhysParams::nu_v);
        phys("mu_theta", &PhysParams::mu_theta);
        phys("nu_theta", &PhysParams::nu_theta);
        phys("mu_q", &PhysParams::mu_q);
        phys("nu_q", &PhysParams::nu_q);
        profile_entries(t, "theta_bar", &PhysParams::theta_bar);
        profile_entries(t, "theta_h", &PhysParams::theta_h);
        t.push_back(real_entry("physics.phi_s.amp", [](RunConfig& c) -> double& { return c.physics.phi_s.amp; }));
        t.push_back(int_entry("physics.phi_s.jx", [](RunConfig& c) -> int& { return c.physics.phi_s.jx; }));
        t.push_back(int_entry("physics.phi_s.jy", [](RunConfig& c) -> int& { return c.physics.phi_s.jy; }));

        t.push_back(real_entry("time.dt", [](RunConfig& c) -> double& { return c.time.dt; }));
        t.push_back(real_entry("time.t_end", [](RunConfig& c) -> double& { return c.time.t_end; }));
        t.push_back({"time.scheme",
                     [](RunConfig& c, const std::string&, const std::string& v) {
                         c.time.scheme = scheme_from_string(v);
                     },
                     [](const RunConfig& c) { return to_string(c.time.scheme); }});
        t.push_back(real_entry("time.cfl_target", [](RunConfig& c) -> double& { return c.time.cfl_target; }));
        t.push_back({"time.adapt",
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         c.time.adapt = to_bool(k, v);
                     },
                     [](const RunConfig& c) { return std::string(c.time.adapt ? "true" : "false"); }});

        t.push_back({"forcing.kind",
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         auto [kind, arg] = split_kind(v);
                         if (kind == "zero" && arg.empty()) {
                             c.forcing = {ForcingSpec::Kind::zero, ""};
                         } else if (kind == "manufactured" && !arg.empty()) {
                             c.forcing = {ForcingSpec::Kind::manufactured, arg};
                         } else if (kind == "file" && !arg.empty()) {
                             c.forcing = {ForcingSpec::Kind::file, arg};
                         } else {
                             throw ConfigError(k, "expected zero, manufactured:<case> or file:<path>");
                         }
                     },
                     [](const RunConfig& c) -> std::string {
                         switch (c.forcing.kind) {
                         case ForcingSpec::Kind::zero: return "zero";
                         case ForcingSpec::Kind::manufactured: return "manufactured:" + c.forcing.argument;
                         case ForcingSpec::Kind::file: return "file:" + c.forcing.argument;
                         }
                         return "zero";
                     }});

        t.push_back({"initial.kind",
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         auto [kind, arg] = split_kind(v);
                         InitialSpec& s = c.initial;
                         if (kind == "rest" && arg.empty()) {
                             s.kind = InitialSpec::Kind::rest;
                         } else if (kind == "random_smooth") {
                             std::vector<std::string> parts;
                             std::stringstream ss(arg);
                             for (std::string item; std::getline(ss, item, ',');) parts.push_back(trim(item));
                             if (parts.size() != 3)
                                 throw ConfigError(k, "expected random_smooth:<seed>,<amplitude>,<band>");
                             long seed = to_long(k, parts[0]);
                             if (seed < 0) throw ConfigError(k, "seed must be nonnegative");
                             s.kind = InitialSpec::Kind::random_smooth;
                             s.seed = std::uint64_t(seed);
                             s.amplitude = to_double(k, parts[1]);
                             s.band = int(to_long(k, parts[2]));
                             if (!(s.amplitude >= 0.0)) throw ConfigError(k, "amplitude must be >= 0");
                             if (s.band < 1) throw ConfigError(k, "band must be >= 1");
                         } else if (kind == "file" && !arg.empty()) {
                             s.kind = InitialSpec::Kind::file;
                             s.argument = arg;
                         } else if (kind == "manufactured" && !arg.empty()) {
                             s.kind = InitialSpec::Kind::manufactured;
                             s.argument = arg;
                         } else {
                             throw ConfigError(k, "expected rest, random_smooth:<seed>,<amp>,<band>, "
                                                  "file:<path> or manufactured:<case>");
                         }
                     },
                     [](const RunConfig& c) -> std::string {
                         const InitialSpec& s = c.initial;
                         switch (s.kind) {
                         case InitialSpec::Kind::rest: return "rest";
                         case InitialSpec::Kind::random_smooth:
                             return "random_smooth:" + std::to_string(s.seed) + "," + fmt(s.amplitude) +
                                    "," + std::to_string(s.band);
                         case InitialSpec::Kind::file: return "file:" + s.argument;
                         case InitialSpec::Kind::manufactured: return "manufactured:" + s.argument;
                         }
                         return "rest";
                     }});
        t.push_back({"initial.symmetry",
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         if (v == "none") c.initial.paper_parity = false;
                         else if (v == "paper_parity") c.initial.paper_parity = true;
                         else throw ConfigError(k, "expected none or paper_parity");
                     },
                     [](const RunConfig& c) {
                         return std::string(c.initial.paper_parity ? "paper_parity" : "none");
                     }});

        t.push_back({"output.norms_path",
                     [](RunConfig& c, const std::string&, const std::string& v) { c.output.norms_path = v; },
                     [](const RunConfig& c) { return c.output.norms_path; }});
        t.push_back(int_entry("output.norms_every", [](RunConfig& c) -> long& { return c.output.norms_every; }));
        t.push_back({"output.checkpoint_path",
                     [](RunConfig& c, const std::string&, const std::string& v) {
                         c.output.checkpoint_path = v;
                     },
                     [](const RunConfig& c) { return c.output.checkpoint_path; }});
        t.push_back(int_entry("output.checkpoint_every",
                              [](RunConfig& c) -> long& { return c.output.checkpoint_every; }));
        return t;
    }();
    return table;
}

void validate(const RunConfig& c) {
    for (auto [n, key] : {std::pair{c.grid.nx, "grid.nx"}, {c.grid.ny, "grid.ny"}, {c.grid.np, "grid.np"}})
        if (n < 8 || n % 2 != 0) throw ConfigError(key, "must be even and >= 8");
    if (!(c.grid.p0 > 0.0)) throw ConfigError("domain.p0", "must be positive");
    if (!(c.grid.p1 > c.grid.p0)) throw ConfigError("domain.p0", "must be smaller than domain.p1");
    if (!std::isfinite(c.grid.p1)) throw ConfigError("domain.p1", "must be finite");

    const PhysParams& p = c.physics;
    auto positive = [](double v, const char* key) {
        if (!(v > 0.0)) throw ConfigError(key, "must be positive");
    };
    positive(p.R, "physics.R");
    positive(p.cp, "physics.cp");
    positive(p.g, "physics.g");
    positive(p.mu_v, "physics.mu_v");
    positive(p.nu_v, "physics.nu_v");
    positive(p.mu_theta, "physics.mu_theta");
    positive(p.nu_theta, "physics.nu_theta");
    positive(p.mu_q, "physics.mu_q");
    positive(p.nu_q, "physics.nu_q");
    if (!std::isfinite(p.f_cor)) throw ConfigError("physics.f_cor", "must be finite");
    if (!(p.theta_bar(p.p0) > 0.0) || !(p.theta_bar(p.p1) > 0.0))
        throw ConfigError("physics.theta_bar.a", "theta_bar must be positive on [p0, p1]");
    if (!std::isfinite(p.theta_h(p.p0)) || !std::isfinite(p.theta_h(p.p1)))
        throw ConfigError("physics.theta_h.a", "theta_h must be bounded");
    if (!std::isfinite(p.phi_s.amp)) throw ConfigError("physics.phi_s.amp", "must be finite");

    c.time.validate();
    if (c.output.norms_every < 1) throw ConfigError("output.norms_every", "must be >= 1");
    if (c.output.checkpoint_every < 0) throw ConfigError("output.checkpoint_every", "must be >= 0");
    if (c.initial.kind == InitialSpec::Kind::random_smooth &&
        2 * c.initial.band >= std::min({c.grid.nx, c.grid.ny, c.grid.np}))
        throw ConfigError("initial.kind", "random band must lie below the Nyquist mode");
}

} // namespace

RunConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> values;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (values.count(key)) throw ConfigError(key, "given more than once");
        values[key] = value;
    }

    RunConfig c;
    if (auto it = values.find("physics.preset"); it != values.end()) {
        if (it->second == "physical") c.physics = PhysParams::physical_preset();
        else if (it->second != "default") throw ConfigError(it->first, "expected default or physical");
        values.erase(it);
    }
    const auto& table = entries();
    for (const auto& [key, value] : values) {
        auto e = std::find_if(table.begin(), table.end(), [&](const Entry& x) { return x.key == key; });
        if (e == table.end()) throw ConfigError(key, "unknown key");
        e->set(c, key, value);
    }
    c.physics.p0 = c.grid.p0;
    c.physics.p1 = c.grid.p1;
    validate(c);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& config) {
    std::string out;
    for (const Entry& e : entries()) out += e.key + " = " + e.get(config) + "\n";
    return out;
}

} // namespace mpes
