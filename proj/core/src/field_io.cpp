#include "lbctl/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "lbctl/errors.hpp"

namespace lbctl {

static_assert(std::endian::native == std::endian::little, "dump format assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'L', 'B', 'C', 'F', 'I', 'E', 'L', 'D'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T x) {
    os.write(reinterpret_cast<const char*>(&x), sizeof x);
}

void put_string(std::ostream& os, const std::string& s) {
    put(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <class T>
T get(std::istream& is) {
    T x{};
    if (!is.read(reinterpret_cast<char*>(&x), sizeof x)) throw IoError("field dump truncated");
    return x;
}

std::string get_string(std::istream& is) {
    const auto n = get<std::uint32_t>(is);
    if (n > (1u << 20)) throw IoError("field dump: implausible string length");
    std::string s(n, '\0');
    if (n && !is.read(s.data(), n)) throw IoError("field dump truncated");
    return s;
}

std::vector<double> copy(std::span<const double> xs) { return {xs.begin(), xs.end()}; }

FieldRecord header(const std::string& kind, const GridSpec& g, double t) {
    FieldRecord r;
    r.kind = kind;
    r.time = t;
    r.nx = g.nx();
    r.ny = g.ny();
    r.lx = g.lx();
    r.ly = g.ly();
    return r;
}

void fill(std::span<double> dst, const std::vector<double>& src, const std::string& name) {
    if (src.size() != dst.size()) throw ShapeError("field dump: array '" + name + "' has the wrong length");
    std::copy(src.begin(), src.end(), dst.begin());
}

void expect_kind(const FieldRecord& r, const char* kind) {
    if (r.kind != kind) throw IoError("field dump: expected kind '" + std::string(kind) + "', found '" + r.kind + "'");
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

}  // namespace

const std::vector<double>& FieldRecord::array(const std::string& name) const {
    for (const auto& [n, a] : arrays)
        if (n == name) return a;
    throw IoError("field dump: no array '" + name + "'");
}

void write_record(std::ostream& os, const FieldRecord& r) {
    os.write(kMagic, sizeof kMagic);
    put(os, kVersion);
    put_string(os, r.kind);
    put(os, static_cast<std::uint64_t>(r.nx));
    put(os, static_cast<std::uint64_t>(r.ny));
    put(os, r.lx);
    put(os, r.ly);
    put(os, r.time);
    put(os, static_cast<std::uint32_t>(r.arrays.size()));
    for (const auto& [name, a] : r.arrays) {
        put_string(os, name);
        put(os, static_cast<std::uint64_t>(a.size()));
        os.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
    }
    if (!os) throw IoError("field dump: write failed");
}

FieldRecord read_record(std::istream& is) {
    char magic[sizeof kMagic];
    if (!is.read(magic, sizeof magic)) throw IoError("field dump truncated");
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw IoError("not a field dump");
    if (get<std::uint32_t>(is) != kVersion) throw IoError("field dump: unsupported version");
    FieldRecord r;
    r.kind = get_string(is);
    r.nx = get<std::uint64_t>(is);
    r.ny = get<std::uint64_t>(is);
    r.lx = get<double>(is);
    r.ly = get<double>(is);
    r.time = get<double>(is);
    const auto count = get<std::uint32_t>(is);
    const std::uint64_t limit = 4 * (r.nx + 1) * (r.ny + 1) + 16;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = get_string(is);
        const auto n = get<std::uint64_t>(is);
        if (n > limit) throw IoError("field dump: implausible array length");
        std::vector<double> a(n);
        if (n && !is.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(n * sizeof(double))))
            throw IoError("field dump truncated");
        r.arrays.emplace_back(std::move(name), std::move(a));
    }
    return r;
}

std::vector<FieldRecord> read_records(std::istream& is) {
    std::vector<FieldRecord> out;
    while (is.peek() != std::char_traits<char>::eof()) out.push_back(read_record(is));
    return out;
}

FieldRecord to_record(const State& s, double t) {
    FieldRecord r = header("state", s.y.grid(), t);
    r.arrays = {{"u", copy(s.y.u_values())},
                {"v", copy(s.y.v_values())},
                {"theta", copy(s.theta.values())},
                {"p", copy(s.pressure.values())}};
    return r;
}

FieldRecord to_record(const AdjointState& s, double t) {
    FieldRecord r = header("adjoint", s.phi.grid(), t);
    r.arrays = {{"phi_u", copy(s.phi.u_values())},
                {"phi_v", copy(s.phi.v_values())},
                {"psi", copy(s.psi.values())},
                {"pi", copy(s.pi.values())}};
    return r;
}

FieldRecord to_record(const VelocityField& v, const ScalarField& v0, double t) {
    FieldRecord r = header("control", v.grid(), t);
    r.arrays = {{"v_u", copy(v.u_values())}, {"v_v", copy(v.v_values())}, {"v0", copy(v0.values())}};
    return r;
}

State state_from_record(const FieldRecord& r) {
    expect_kind(r, "state");
    State s(r.grid());
    fill(s.y.u_values(), r.array("u"), "u");
    fill(s.y.v_values(), r.array("v"), "v");
    fill(s.theta.values(), r.array("theta"), "theta");
    fill(s.pressure.values(), r.array("p"), "p");
    return s;
}

AdjointState adjoint_from_record(const FieldRecord& r) {
    expect_kind(r, "adjoint");
    AdjointState s(r.grid());
    fill(s.phi.u_values(), r.array("phi_u"), "phi_u");
    fill(s.phi.v_values(), r.array("phi_v"), "phi_v");
    fill(s.psi.values(), r.array("psi"), "psi");
    fill(s.pi.values(), r.array("pi"), "pi");
    return s;
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream os = open_out(path);
    for (std::size_t k = 0; k < traj.states.size(); ++k) write_record(os, to_record(traj.states[k], traj.time.t(k)));
}

void write_adjoint(const std::filesystem::path& path, const AdjointTrajectory& adj) {
    std::ofstream os = open_out(path);
    for (std::size_t k = 0; k < adj.states.size(); ++k) write_record(os, to_record(adj.states[k], adj.time.t(k)));
}

void write_controls(const std::filesystem::path& path, const ControlTrajectory& c, const TimeGrid& tg) {
    std::ofstream os = open_out(path);
    for (std::size_t k = 0; k < c.size(); ++k) write_record(os, to_record(c.v[k], c.v0[k], tg.t(k)));
}

std::vector<FieldRecord> read_dump(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return read_records(is);
}

}  // namespace lbctl
