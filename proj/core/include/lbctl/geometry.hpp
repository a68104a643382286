#pragma once

#include <array>
#include <vector>

#include "lbctl/fields.hpp"

namespace lbctl {

/// Rectangular control region omega and the inner region omega0 sharing its
/// centre. omega0 has half widths (1 - inner_margin) * half_widths.
struct ControlPatch {
    std::array<double, 2> center{0.5, 0.5};
    std::array<double, 2> half_widths{0.15, 0.15};
    double inner_margin = 0.5;

    /// Throws GeometryError unless omega0 is strictly inside omega and omega
    /// strictly inside the domain.
    void validate(const GridSpec& grid) const;

    bool in_omega(double x, double y) const noexcept;
    bool in_omega0(double x, double y) const noexcept;
    double area() const noexcept { return 4.0 * half_widths[0] * half_widths[1]; }
};

/// Positive profile vanishing on the boundary, normalised to max 1.
struct Eta0 {
    GridSpec grid;
    std::vector<double> nodes;  // (nx+1) x (ny+1), index j*(nx+1)+i
    ScalarField cells;          // profile at cell centres
    double eta_sup = 1.0;
    /// min |grad eta0| over cell centres outside omega0
    double grad_margin = 0.0;

    double node(std::size_t i, std::size_t j) const noexcept { return nodes[j * (grid.nx() + 1) + i]; }
};

/// Product profile x(lx-x) y(ly-y), maximal at the domain centre, which
/// omega0 must contain (GeometryError otherwise).
Eta0 build_eta0(const GridSpec& grid, const ControlPatch& patch);

/// C-infinity cutoff: 1 on omega0, in (0,1) on omega \ omega0, 0 outside omega.
double cutoff_value(const ControlPatch& patch, double x, double y) noexcept;

/// Cutoff sampled at cell centres.
ScalarField cutoff_1omega(const GridSpec& grid, const ControlPatch& patch);

/// Cutoff sampled at the velocity faces (boundary-normal faces are zero).
VelocityField cutoff_faces(const GridSpec& grid, const ControlPatch& patch);

}  // namespace lbctl
