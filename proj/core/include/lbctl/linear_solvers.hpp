#pragma once

#include <cstddef>
#include <vector>

#include "lbctl/fields.hpp"

namespace lbctl {

enum class SolverBackend { Spectral, Pcg };

struct SolverOptions {
    SolverBackend backend = SolverBackend::Spectral;
    double tol = 1e-10;  // relative residual, PCG only
    std::size_t max_iters = 20000;
    /// relative residual of the divergence-free CG in stokes()
    double stokes_tol = 1e-13;
};

/// Orthonormal eigenbasis of a 1-D second-difference operator.
/// q is n x n row-major (q[i*n + k] = k-th eigenvector at point i) and
/// lambda[k] >= 0 are the eigenvalues of the negative second difference.
struct AxisBasis {
    enum class Kind { CellDirichlet, CellNeumann, FaceDirichlet };

    std::size_t n = 0;
    std::vector<double> q;
    std::vector<double> lambda;

    /// cells: number of cells along the axis; FaceDirichlet has cells-1 points.
    static AxisBasis make(Kind kind, std::size_t cells, double h);
};

/// Solves the constant-coefficient elliptic problems of one time step:
/// Dirichlet Helmholtz (I - c Lap) for temperature and each velocity
/// component, and the Neumann pressure Poisson problem of the projection.
///
/// The spectral backend diagonalises the separable operators with dense
/// sine/cosine bases; it is exact up to roundoff and exactly symmetric, which
/// the discrete adjoint relies on. The PCG backend (Jacobi preconditioner) is
/// the iterative alternative and is cross-checked against it in the tests.
class EllipticSolver {
public:
    explicit EllipticSolver(const GridSpec& grid, SolverOptions opts = {});

    const GridSpec& grid() const noexcept { return grid_; }
    const SolverOptions& options() const noexcept { return opts_; }

    /// x with (I - c Lap) x = b, c >= 0.
    ScalarField helmholtz(const ScalarField& b, double c) const;
    VelocityField helmholtz(const VelocityField& b, double c) const;

    /// Zero-mean phi with div(grad(phi)) = rhs - mean(rhs).
    ScalarField poisson_neumann(const ScalarField& rhs) const;

    /// Leray projection w - grad(phi), div(grad phi) = div(w). The potential
    /// phi is written to *potential when requested.
    VelocityField project(const VelocityField& w, ScalarField* potential = nullptr) const;

    /// Divergence-free y and pressure p with (I - c Lap) y + grad p = b.
    /// CG on the divergence-free subspace, preconditioned by P (I - c Lap)^-1 P.
    VelocityField stokes(const VelocityField& b, double c, ScalarField* pressure = nullptr) const;

private:
    GridSpec grid_;
    SolverOptions opts_;
    AxisBasis cell_dir_x_, cell_dir_y_;
    AxisBasis cell_neu_x_, cell_neu_y_;
    AxisBasis face_dir_x_, face_dir_y_;
};

struct ProjectionResult {
    VelocityField velocity;
    ScalarField potential;
};

/// Projects w onto discretely divergence-free fields. Throws
/// LinearSolverError when max |div| exceeds tol * ||w||.
ProjectionResult project_div_free(const VelocityField& w, double tol,
                                  SolverBackend backend = SolverBackend::Spectral);

}  // namespace lbctl
