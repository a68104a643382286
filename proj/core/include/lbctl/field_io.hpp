#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lbctl/adjoint.hpp"
#include "lbctl/forward.hpp"

namespace lbctl {

/// One snapshot in the binary dump format. Layout (little endian):
///   "LBCFIELD" u32 version | kind | u64 nx, ny | f64 lx, ly, time |
///   u32 count, then per array: name, u64 length, raw doubles.
/// Strings are u32 length + bytes. Values are stored bit for bit.
struct FieldRecord {
    std::string kind;  // "state", "adjoint" or "control"
    double time = 0.0;
    std::size_t nx = 0, ny = 0;
    double lx = 1.0, ly = 1.0;
    std::vector<std::pair<std::string, std::vector<double>>> arrays;

    GridSpec grid() const { return GridSpec(nx, ny, lx, ly); }
    const std::vector<double>& array(const std::string& name) const;
};

void write_record(std::ostream& os, const FieldRecord& r);
/// Throws IoError on a truncated or foreign stream.
FieldRecord read_record(std::istream& is);
std::vector<FieldRecord> read_records(std::istream& is);

FieldRecord to_record(const State& s, double t);
FieldRecord to_record(const AdjointState& s, double t);
FieldRecord to_record(const VelocityField& v, const ScalarField& v0, double t);

State state_from_record(const FieldRecord& r);
AdjointState adjoint_from_record(const FieldRecord& r);

/// Whole-trajectory dumps, one record per time level.
void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);
void write_adjoint(const std::filesystem::path& path, const AdjointTrajectory& adj);
void write_controls(const std::filesystem::path& path, const ControlTrajectory& c, const TimeGrid& tg);
std::vector<FieldRecord> read_dump(const std::filesystem::path& path);

}  // namespace lbctl
