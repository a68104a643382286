#pragma once

#include <cstddef>
#include <cstdint>

namespace lbctl {

/// Uniform MAC grid on the rectangle [0, lx] x [0, ly] with nx x ny cells.
///
/// Pressure and temperature live at cell centres, the x-velocity on the
/// vertical faces and the y-velocity on the horizontal faces.
class GridSpec {
public:
    GridSpec(std::size_t nx, std::size_t ny, double lx = 1.0, double ly = 1.0);

    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }
    double lx() const noexcept { return lx_; }
    double ly() const noexcept { return ly_; }
    double hx() const noexcept { return hx_; }
    double hy() const noexcept { return hy_; }
    double cell_area() const noexcept { return hx_ * hy_; }

    std::size_t cells() const noexcept { return nx_ * ny_; }

    double xc(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * hx_; }
    double yc(std::size_t j) const noexcept { return (static_cast<double>(j) + 0.5) * hy_; }
    double xf(std::size_t i) const noexcept { return static_cast<double>(i) * hx_; }
    double yf(std::size_t j) const noexcept { return static_cast<double>(j) * hy_; }

    /// Smallest Dirichlet-Laplacian eigenvalue of the continuous rectangle.
    double first_eigenvalue() const noexcept;

    std::uint64_t hash() const noexcept;

    friend bool operator==(const GridSpec& a, const GridSpec& b) noexcept {
        return a.nx_ == b.nx_ && a.ny_ == b.ny_ && a.lx_ == b.lx_ && a.ly_ == b.ly_;
    }

private:
    std::size_t nx_;
    std::size_t ny_;
    double lx_;
    double ly_;
    double hx_;
    double hy_;
};

/// Uniform partition of [0, T] into nt steps.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t nt);

    double horizon() const noexcept { return horizon_; }
    std::size_t nt() const noexcept { return nt_; }
    double dt() const noexcept { return dt_; }
    double t(std::size_t k) const noexcept { return static_cast<double>(k) * dt_; }

    std::uint64_t hash() const noexcept;

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) noexcept {
        return a.horizon_ == b.horizon_ && a.nt_ == b.nt_;
    }

private:
    double horizon_;
    std::size_t nt_;
    double dt_;
};

}  // namespace lbctl
