#pragma once

#include "lbctl/fields.hpp"
#include "lbctl/viscosity.hpp"

// Second-order MAC stencils. Homogeneous Dirichlet conditions for velocity
// and temperature are imposed through the stored (zero) boundary-normal faces
// and odd ghost reflection across the walls for tangential neighbours.
namespace lbctl::ops {

/// Face-centred gradient; boundary-normal faces are zero.
VelocityField grad(const ScalarField& f);

/// Cell-centred divergence, the negative transpose of grad().
ScalarField div(const VelocityField& w);

/// Dirichlet 5-point Laplacian (ghost reflection at the walls).
ScalarField laplacian(const ScalarField& f);

/// Componentwise Dirichlet Laplacian of a staggered velocity.
VelocityField laplacian(const VelocityField& w);

/// div(grad(f)): the Neumann Laplacian used by the pressure projection.
ScalarField pressure_laplacian(const ScalarField& f);

/// Cell-centred velocity gradient. Normal derivatives are exact at the
/// centre; tangential ones average the four surrounding corner values.
GradientTensor gradient_tensor(const VelocityField& w);

/// Symmetrised gradient Dy = (grad y + grad y^T)/2 at cell centres.
struct Deformation {
    ScalarField d11;
    ScalarField d12;
    ScalarField d22;
};
Deformation deformation(const VelocityField& w);

/// Viscous heating Dy : grad y, evaluated from the same cell-centred
/// gradient so that it equals |Dy|^2 >= 0 up to roundoff.
ScalarField heating(const VelocityField& w);

/// Centred, divergence-form convection div(carrier (x) w); skew-symmetric
/// whenever the carrier is discretely divergence-free.
VelocityField advect_velocity(const VelocityField& w, const VelocityField& carrier);
ScalarField advect_scalar(const ScalarField& f, const VelocityField& carrier);

/// Pointwise products (used to restrict fields with a cutoff).
ScalarField hadamard(const ScalarField& f, const ScalarField& g);
VelocityField hadamard(const VelocityField& w, const VelocityField& g);

/// Buoyancy transfer: cell scalar -> y-faces (average of the two adjacent cells).
VelocityField cells_to_vertical_faces(const ScalarField& f);
/// Transpose of cells_to_vertical_faces() in the midpoint inner products.
ScalarField vertical_faces_to_cells(const VelocityField& w);

double l2_inner(const ScalarField& f, const ScalarField& g);
double l2_inner(const VelocityField& a, const VelocityField& b);
double l2_norm(const ScalarField& f);
double l2_norm(const VelocityField& w);
double max_abs(const ScalarField& f);
double max_abs(const VelocityField& w);

/// Discrete H1 seminorm consistent with summation by parts:
/// h1_seminorm(f)^2 == -<laplacian(f), f>.
double h1_seminorm(const ScalarField& f);
double h1_seminorm(const VelocityField& w);

/// (sum |f|^p h^2)^(1/p).
double lp_norm(const ScalarField& f, double p);

/// Cell-centred |grad w|^2 (sum of the four gradient components squared).
ScalarField grad_sq(const VelocityField& w);
/// Cell-centred |grad f|^2 for a scalar, from the averaged face gradients.
ScalarField grad_sq(const ScalarField& f);

/// Nonlocal viscosity coefficient of a velocity field (or of a scalar's
/// gradient, for the temperature law of the Lp system).
double nonlocal_viscosity(const VelocityField& w, const ViscosityLaw& law);
double nonlocal_viscosity(const ScalarField& f, const ViscosityLaw& law);

}  // namespace lbctl::ops
