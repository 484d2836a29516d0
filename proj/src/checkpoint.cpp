#include "mpes/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "mpes/errors.hpp"

namespace mpes {

namespace {

constexpr char magic[4] = {'M', 'P', 'E', 'S'};
constexpr char time_tag[] = "# t = ";

template <class U>
void put_le(std::vector<unsigned char>& out, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

class Reader {
public:
    Reader(const std::vector<unsigned char>& buf, const std::string& path) : buf_(buf), path_(path) {}

    template <class U>
    U le() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) v |= U(buf_[pos_ + i]) << (8 * i);
        pos_ += sizeof(U);
        return v;
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == buf_.size(); }
    [[noreturn]] void fail(const std::string& what) const {
        throw DataIntegrityError("checkpoint '" + path_ + "': " + what);
    }

private:
    void need(std::size_t n) const {
        if (buf_.size() - pos_ < n) fail("truncated");
    }
    const std::vector<unsigned char>& buf_;
    std::string path_;
    std::size_t pos_ = 0;
};

} // namespace

void write_checkpoint(const std::string& path, const RunConfig& config, const State& state) {
    const Grid& g = state.grid();
    if (g.nx != config.grid.nx || g.ny != config.grid.ny || g.np != config.grid.np)
        throw DataIntegrityError("checkpoint: state grid does not match the configuration");

    char tline[64];
    std::snprintf(tline, sizeof tline, "%s%.17g\n", time_tag, state.t);
    std::string text = tline + serialize_config(config);

    std::vector<unsigned char> out(magic, magic + 4);
    put_le<std::uint32_t>(out, checkpoint_version);
    put_le<std::uint32_t>(out, std::uint32_t(g.nx));
    put_le<std::uint32_t>(out, std::uint32_t(g.ny));
    put_le<std::uint32_t>(out, std::uint32_t(g.np));
    put_le<std::uint64_t>(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
    for (const Field3D* f : {&state.u.v1, &state.u.v2, &state.u.theta, &state.u.q})
        for (double v : f->data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));

    std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw DataIntegrityError("checkpoint: cannot open '" + tmp + "' for writing");
        os.write(reinterpret_cast<const char*>(out.data()), std::streamsize(out.size()));
        if (!os) throw DataIntegrityError("checkpoint: write to '" + tmp + "' failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw DataIntegrityError("checkpoint: cannot move '" + tmp + "' to '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataIntegrityError("checkpoint '" + path + "': cannot open");
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    Reader r(buf, path);

    if (r.bytes(4) != std::string(magic, 4)) r.fail("bad magic");
    if (auto v = r.le<std::uint32_t>(); v != checkpoint_version)
        r.fail("unsupported version " + std::to_string(v));
    auto nx = r.le<std::uint32_t>(), ny = r.le<std::uint32_t>(), np = r.le<std::uint32_t>();
    auto len = r.le<std::uint64_t>();
    if (len > buf.size()) r.fail("truncated");
    std::string text = r.bytes(std::size_t(len));

    Checkpoint cp;
    try {
        cp.config = parse_config(text);
    } catch (const ConfigError& e) {
        r.fail(std::string("embedded configuration: ") + e.what());
    }
    const Grid& g = cp.config.grid;
    if (std::uint32_t(g.nx) != nx || std::uint32_t(g.ny) != ny || std::uint32_t(g.np) != np)
        r.fail("grid header disagrees with embedded configuration");

    double t = 0.0;
    if (text.rfind(time_tag, 0) == 0) {
        std::string tv = text.substr(sizeof time_tag - 1, text.find('\n') - (sizeof time_tag - 1));
        char* end = nullptr;
        t = std::strtod(tv.c_str(), &end);
        if (end == tv.c_str() || *end != '\0') r.fail("bad time line");
    }

    cp.state = State(g, t);
    for (Field3D* f : {&cp.state.u.v1, &cp.state.u.v2, &cp.state.u.theta, &cp.state.u.q})
        for (double& v : f->data()) v = std::bit_cast<double>(r.le<std::uint64_t>());
    if (!r.done()) r.fail("trailing bytes");
    if (!cp.state.u.all_finite()) r.fail("non-finite field values");
    return cp;
}

} // namespace mpes
