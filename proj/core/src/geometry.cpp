#include "lbctl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lbctl/errors.hpp"

namespace lbctl {

namespace {

// Smooth transition: 0 for tau <= 0, 1 for tau >= 1.
double smooth_step(double tau) noexcept {
    if (tau <= 0.0) return 0.0;
    if (tau >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / tau);
    const double b = std::exp(-1.0 / (1.0 - tau));
    return a / (a + b);
}

double axis_cutoff(double d, double inner, double outer) noexcept {
    if (d <= inner) return 1.0;
    if (d >= outer) return 0.0;
    return smooth_step((outer - d) / (outer - inner));
}

}  // namespace

void ControlPatch::validate(const GridSpec& grid) const {
    if (!(inner_margin > 0.0 && inner_margin < 1.0)) throw GeometryError("inner_margin must lie in (0,1)");
    const double ext[2] = {grid.lx(), grid.ly()};
    for (int d = 0; d < 2; ++d) {
        if (!(half_widths[d] > 0.0)) throw GeometryError("patch half widths must be positive");
        if (!(center[d] - half_widths[d] > 0.0 && center[d] + half_widths[d] < ext[d]))
            throw GeometryError("control patch must lie strictly inside the domain");
    }
}

bool ControlPatch::in_omega(double x, double y) const noexcept {
    return std::abs(x - center[0]) < half_widths[0] && std::abs(y - center[1]) < half_widths[1];
}

bool ControlPatch::in_omega0(double x, double y) const noexcept {
    const double f = 1.0 - inner_margin;
    return std::abs(x - center[0]) < f * half_widths[0] && std::abs(y - center[1]) < f * half_widths[1];
}

Eta0 build_eta0(const GridSpec& grid, const ControlPatch& patch) {
    patch.validate(grid);
    const double lx = grid.lx(), ly = grid.ly();
    if (!patch.in_omega0(0.5 * lx, 0.5 * ly))
        throw GeometryError("omega0 must contain the domain centre (critical point of the eta0 profile)");
    const double norm = 16.0 / (lx * lx * ly * ly);
    auto profile = [=](double x, double y) { return norm * x * (lx - x) * y * (ly - y); };

    Eta0 e{grid, {}, ScalarField(grid), 1.0, 0.0};
    const std::size_t nx = grid.nx(), ny = grid.ny();
    e.nodes.resize((nx + 1) * (ny + 1));
    for (std::size_t j = 0; j <= ny; ++j)
        for (std::size_t i = 0; i <= nx; ++i) {
            // boundary nodes are exactly zero through the vanishing factor
            const double x = i == nx ? lx : grid.xf(i);
            const double y = j == ny ? ly : grid.yf(j);
            e.nodes[j * (nx + 1) + i] = profile(x, y);
        }
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) e.cells(i, j) = profile(grid.xc(i), grid.yc(j));
    // normalised analytically: the sup over the closed domain is 1 even when
    // the centre is not a grid point
    e.eta_sup = 1.0;

    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            if (patch.in_omega0(grid.xc(i), grid.yc(j))) continue;
            const double gx = (e.node(i + 1, j) + e.node(i + 1, j + 1) - e.node(i, j) - e.node(i, j + 1)) /
                              (2.0 * grid.hx());
            const double gy = (e.node(i, j + 1) + e.node(i + 1, j + 1) - e.node(i, j) - e.node(i + 1, j)) /
                              (2.0 * grid.hy());
            margin = std::min(margin, std::hypot(gx, gy));
        }
    e.grad_margin = margin;
    return e;
}

double cutoff_value(const ControlPatch& p, double x, double y) noexcept {
    const double f = 1.0 - p.inner_margin;
    return axis_cutoff(std::abs(x - p.center[0]), f * p.half_widths[0], p.half_widths[0]) *
           axis_cutoff(std::abs(y - p.center[1]), f * p.half_widths[1], p.half_widths[1]);
}

ScalarField cutoff_1omega(const GridSpec& grid, const ControlPatch& patch) {
    patch.validate(grid);
    return ScalarField::sample(grid, [&](double x, double y) { return cutoff_value(patch, x, y); });
}

VelocityField cutoff_faces(const GridSpec& grid, const ControlPatch& patch) {
    patch.validate(grid);
    auto f = [&](double x, double y) { return cutoff_value(patch, x, y); };
    return VelocityField::sample(grid, f, f);
}

}  // namespace lbctl
