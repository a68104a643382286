#include "lbctl/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lbctl/errors.hpp"
#include "lbctl/hash.hpp"

namespace lbctl {

GridSpec::GridSpec(std::size_t nx, std::size_t ny, double lx, double ly)
    : nx_(nx), ny_(ny), lx_(lx), ly_(ly), hx_(0.0), hy_(0.0) {
    if (nx < 8 || ny < 8)
        throw DomainError("grid needs at least 8 cells per direction, got " + std::to_string(nx) +
                          "x" + std::to_string(ny));
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
        throw DomainError("grid extents must be positive and finite");
    hx_ = lx / static_cast<double>(nx);
    hy_ = ly / static_cast<double>(ny);
}

double GridSpec::first_eigenvalue() const noexcept {
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    return pi2 * (1.0 / (lx_ * lx_) + 1.0 / (ly_ * ly_));
}

std::uint64_t GridSpec::hash() const noexcept {
    return Fnv1a()
        .add(std::string_view("grid"))
        .add(static_cast<std::uint64_t>(nx_))
        .add(static_cast<std::uint64_t>(ny_))
        .add(lx_)
        .add(ly_)
        .value();
}

TimeGrid::TimeGrid(double horizon, std::size_t nt) : horizon_(horizon), nt_(nt), dt_(0.0) {
    if (nt < 16) throw DomainError("time grid needs at least 16 steps, got " + std::to_string(nt));
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("time horizon must be positive");
    dt_ = horizon / static_cast<double>(nt);
}

std::uint64_t TimeGrid::hash() const noexcept {
    return Fnv1a().add(std::string_view("time")).add(horizon_).add(static_cast<std::uint64_t>(nt_)).value();
}

}  // namespace lbctl
