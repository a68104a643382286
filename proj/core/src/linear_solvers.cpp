#include "lbctl/linear_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "lbctl/errors.hpp"
#include "lbctl/operators.hpp"

namespace lbctl {

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
    return s;
}

void remove_mean(Vec& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    for (double& v : x) v -= m;
}

// Jacobi-preconditioned CG for an SPD (or, with singular=true, positive
// semidefinite with constant null space) operator.
Vec pcg(const std::function<Vec(const Vec&)>& apply, const Vec& diag, Vec b, bool singular, double tol,
        std::size_t max_iters) {
    if (singular) remove_mean(b);
    Vec x(b.size(), 0.0);
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) return x;
    Vec r = b;
    Vec z(b.size());
    for (std::size_t n = 0; n < z.size(); ++n) z[n] = r[n] / diag[n];
    if (singular) remove_mean(z);
    Vec p = z;
    double rz = dot(r, z);
    double rnorm = bnorm;
    for (std::size_t it = 0; it < max_iters; ++it) {
        Vec ap = apply(p);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) throw LinearSolverError("PCG breakdown", rnorm / bnorm, it);
        const double a = rz / pap;
        for (std::size_t n = 0; n < x.size(); ++n) {
            x[n] += a * p[n];
            r[n] -= a * ap[n];
        }
        rnorm = std::sqrt(dot(r, r));
        if (rnorm <= tol * bnorm) {
            if (singular) remove_mean(x);
            return x;
        }
        for (std::size_t n = 0; n < z.size(); ++n) z[n] = r[n] / diag[n];
        if (singular) remove_mean(z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t n = 0; n < p.size(); ++n) p[n] = z[n] + beta * p[n];
    }
    throw LinearSolverError("PCG did not converge", rnorm / bnorm, max_iters);
}

// out = Qy^T * in * Qx for in stored with rows along y (ny x nx row-major).
void to_modes(const AxisBasis& bx, const AxisBasis& by, const double* in, double* out, Vec& tmp) {
    const std::size_t nx = bx.n, ny = by.n;
    tmp.assign(nx * ny, 0.0);
    for (std::size_t j = 0; j < ny; ++j) {
        const double* row = in + j * nx;
        double* trow = tmp.data() + j * nx;
        for (std::size_t i = 0; i < nx; ++i) {
            const double f = row[i];
            const double* qi = bx.q.data() + i * nx;
            for (std::size_t k = 0; k < nx; ++k) trow[k] += f * qi[k];
        }
    }
    std::fill(out, out + nx * ny, 0.0);
    for (std::size_t j = 0; j < ny; ++j) {
        const double* trow = tmp.data() + j * nx;
        const double* qj = by.q.data() + j * ny;
        for (std::size_t ky = 0; ky < ny; ++ky) {
            const double w = qj[ky];
            double* orow = out + ky * nx;
            for (std::size_t k = 0; k < nx; ++k) orow[k] += w * trow[k];
        }
    }
}

// Inverse of to_modes (the bases are orthonormal).
void from_modes(const AxisBasis& bx, const AxisBasis& by, const double* in, double* out, Vec& tmp) {
    const std::size_t nx = bx.n, ny = by.n;
    tmp.assign(nx * ny, 0.0);
    for (std::size_t ky = 0; ky < ny; ++ky) {
        const double* irow = in + ky * nx;
        for (std::size_t j = 0; j < ny; ++j) {
            const double w = by.q[j * ny + ky];
            double* trow = tmp.data() + j * nx;
            for (std::size_t k = 0; k < nx; ++k) trow[k] += w * irow[k];
        }
    }
    for (std::size_t j = 0; j < ny; ++j) {
        const double* trow = tmp.data() + j * nx;
        double* orow = out + j * nx;
        for (std::size_t i = 0; i < nx; ++i) {
            const double* qi = bx.q.data() + i * nx;
            double s = 0.0;
            for (std::size_t k = 0; k < nx; ++k) s += qi[k] * trow[k];
            orow[i] = s;
        }
    }
}

// Solves diag(shift + scale*(lx + ly)) in the separable eigenbasis; modes
// where that symbol vanishes are set to zero.
void spectral_solve(const AxisBasis& bx, const AxisBasis& by, double shift, double scale, Vec& data) {
    Vec modes(data.size()), tmp;
    to_modes(bx, by, data.data(), modes.data(), tmp);
    for (std::size_t ky = 0; ky < by.n; ++ky) {
        for (std::size_t kx = 0; kx < bx.n; ++kx) {
            const double sym = shift + scale * (bx.lambda[kx] + by.lambda[ky]);
            double& m = modes[ky * bx.n + kx];
            m = sym == 0.0 ? 0.0 : m / sym;
        }
    }
    from_modes(bx, by, modes.data(), data.data(), tmp);
}

// Packing helpers: only the unknowns (interior faces for velocity).
Vec pack_u(const VelocityField& w) {
    const GridSpec& g = w.grid();
    Vec out;
    out.reserve((g.nx() - 1) * g.ny());
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 1; i < g.nx(); ++i) out.push_back(w.u(i, j));
    return out;
}

Vec pack_v(const VelocityField& w) {
    const GridSpec& g = w.grid();
    Vec out;
    out.reserve(g.nx() * (g.ny() - 1));
    for (std::size_t j = 1; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) out.push_back(w.v(i, j));
    return out;
}

void unpack_u(const Vec& x, VelocityField& w) {
    const GridSpec& g = w.grid();
    std::size_t n = 0;
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 1; i < g.nx(); ++i) w.u(i, j) = x[n++];
}

void unpack_v(const Vec& x, VelocityField& w) {
    const GridSpec& g = w.grid();
    std::size_t n = 0;
    for (std::size_t j = 1; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) w.v(i, j) = x[n++];
}

Vec to_vec(const ScalarField& f) { return Vec(f.values().begin(), f.values().end()); }

ScalarField from_vec(const GridSpec& g, const Vec& x) {
    ScalarField f(g);
    std::copy(x.begin(), x.end(), f.values().begin());
    return f;
}

}  // namespace

AxisBasis AxisBasis::make(Kind kind, std::size_t cells, double h) {
    AxisBasis b;
    const std::size_t n = kind == Kind::FaceDirichlet ? cells - 1 : cells;
    const double pi = std::numbers::pi;
    const double nc = static_cast<double>(cells);
    b.n = n;
    b.q.assign(n * n, 0.0);
    b.lambda.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double mode = 0.0;
        switch (kind) {
            case Kind::CellDirichlet: mode = static_cast<double>(k + 1); break;
            case Kind::CellNeumann: mode = static_cast<double>(k); break;
            case Kind::FaceDirichlet: mode = static_cast<double>(k + 1); break;
        }
        const double s = std::sin(pi * mode / (2.0 * nc));
        b.lambda[k] = 4.0 / (h * h) * s * s;
        double norm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double val = 0.0;
            const double ii = static_cast<double>(i);
            switch (kind) {
                case Kind::CellDirichlet: val = std::sin(pi * mode * (ii + 0.5) / nc); break;
                case Kind::CellNeumann: val = std::cos(pi * mode * (ii + 0.5) / nc); break;
                case Kind::FaceDirichlet: val = std::sin(pi * mode * (ii + 1.0) / nc); break;
            }
            b.q[i * n + k] = val;
            norm2 += val * val;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t i = 0; i < n; ++i) b.q[i * n + k] *= inv;
    }
    return b;
}

EllipticSolver::EllipticSolver(const GridSpec& grid, SolverOptions opts)
    : grid_(grid),
      opts_(opts),
      cell_dir_x_(AxisBasis::make(AxisBasis::Kind::CellDirichlet, grid.nx(), grid.hx())),
      cell_dir_y_(AxisBasis::make(AxisBasis::Kind::CellDirichlet, grid.ny(), grid.hy())),
      cell_neu_x_(AxisBasis::make(AxisBasis::Kind::CellNeumann, grid.nx(), grid.hx())),
      cell_neu_y_(AxisBasis::make(AxisBasis::Kind::CellNeumann, grid.ny(), grid.hy())),
      face_dir_x_(AxisBasis::make(AxisBasis::Kind::FaceDirichlet, grid.nx(), grid.hx())),
      face_dir_y_(AxisBasis::make(AxisBasis::Kind::FaceDirichlet, grid.ny(), grid.hy())) {
    if (!(opts_.tol > 0.0)) throw DomainError("solver tolerance must be positive");
}

ScalarField EllipticSolver::helmholtz(const ScalarField& b, double c) const {
    if (!(b.grid() == grid_)) throw ShapeError("helmholtz: grid mismatch");
    if (!(c >= 0.0)) throw DomainError("helmholtz coefficient must be >= 0");
    Vec x = to_vec(b);
    if (opts_.backend == SolverBackend::Spectral) {
        spectral_solve(cell_dir_x_, cell_dir_y_, 1.0, c, x);
        return from_vec(grid_, x);
    }
    const std::size_t nx = grid_.nx(), ny = grid_.ny();
    const double ihx2 = 1.0 / (grid_.hx() * grid_.hx()), ihy2 = 1.0 / (grid_.hy() * grid_.hy());
    Vec diag(x.size());
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i)
            diag[j * nx + i] = 1.0 + c * ((i == 0 || i + 1 == nx ? 3.0 : 2.0) * ihx2 +
                                          (j == 0 || j + 1 == ny ? 3.0 : 2.0) * ihy2);
    auto apply = [&](const Vec& p) {
        ScalarField f = from_vec(grid_, p);
        ScalarField lap = ops::laplacian(f);
        f.axpy(-c, lap);
        return to_vec(f);
    };
    return from_vec(grid_, pcg(apply, diag, x, false, opts_.tol, opts_.max_iters));
}

VelocityField EllipticSolver::helmholtz(const VelocityField& b, double c) const {
    if (!(b.grid() == grid_)) throw ShapeError("helmholtz: grid mismatch");
    if (!(c >= 0.0)) throw DomainError("helmholtz coefficient must be >= 0");
    VelocityField out(grid_);
    Vec xu = pack_u(b), xv = pack_v(b);
    if (opts_.backend == SolverBackend::Spectral) {
        spectral_solve(face_dir_x_, cell_dir_y_, 1.0, c, xu);
        spectral_solve(cell_dir_x_, face_dir_y_, 1.0, c, xv);
        unpack_u(xu, out);
        unpack_v(xv, out);
        return out;
    }
    const std::size_t nx = grid_.nx(), ny = grid_.ny();
    const double ihx2 = 1.0 / (grid_.hx() * grid_.hx()), ihy2 = 1.0 / (grid_.hy() * grid_.hy());
    Vec du, dv;
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 1; i < nx; ++i)
            du.push_back(1.0 + c * (2.0 * ihx2 + (j == 0 || j + 1 == ny ? 3.0 : 2.0) * ihy2));
    for (std::size_t j = 1; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i)
            dv.push_back(1.0 + c * ((i == 0 || i + 1 == nx ? 3.0 : 2.0) * ihx2 + 2.0 * ihy2));
    auto apply_u = [&](const Vec& p) {
        VelocityField f(grid_);
        unpack_u(p, f);
        VelocityField r = f;
        r.axpy(-c, ops::laplacian(f));
        return pack_u(r);
    };
    auto apply_v = [&](const Vec& p) {
        VelocityField f(grid_);
        unpack_v(p, f);
        VelocityField r = f;
        r.axpy(-c, ops::laplacian(f));
        return pack_v(r);
    };
    unpack_u(pcg(apply_u, du, xu, false, opts_.tol, opts_.max_iters), out);
    unpack_v(pcg(apply_v, dv, xv, false, opts_.tol, opts_.max_iters), out);
    return out;
}

ScalarField EllipticSolver::poisson_neumann(const ScalarField& rhs) const {
    if (!(rhs.grid() == grid_)) throw ShapeError("poisson: grid mismatch");
    Vec x = to_vec(rhs);
    if (opts_.backend == SolverBackend::Spectral) {
        // div grad has symbol -(lx + ly); the constant mode is dropped
        spectral_solve(cell_neu_x_, cell_neu_y_, 0.0, -1.0, x);
        remove_mean(x);
        return from_vec(grid_, x);
    }
    const std::size_t nx = grid_.nx(), ny = grid_.ny();
    const double ihx2 = 1.0 / (grid_.hx() * grid_.hx()), ihy2 = 1.0 / (grid_.hy() * grid_.hy());
    Vec diag(x.size());
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i)
            diag[j * nx + i] = (double(i > 0) + double(i + 1 < nx)) * ihx2 + (double(j > 0) + double(j + 1 < ny)) * ihy2;
    // solve -DG phi = -rhs, which is positive semidefinite
    for (double& v : x) v = -v;
    auto apply = [&](const Vec& p) {
        Vec r = to_vec(ops::pressure_laplacian(from_vec(grid_, p)));
        for (double& v : r) v = -v;
        return r;
    };
    return from_vec(grid_, pcg(apply, diag, x, true, opts_.tol, opts_.max_iters));
}

VelocityField EllipticSolver::project(const VelocityField& w, ScalarField* potential) const {
    ScalarField phi = poisson_neumann(ops::div(w));
    VelocityField out = w;
    out -= ops::grad(phi);
    out.clear_boundary();
    if (potential) *potential = std::move(phi);
    return out;
}

VelocityField EllipticSolver::stokes(const VelocityField& b, double c, ScalarField* pressure) const {
    if (!(b.grid() == grid_)) throw ShapeError("stokes: grid mismatch");
    if (!(c >= 0.0)) throw DomainError("stokes coefficient must be >= 0");
    const VelocityField pb = project(b);
    auto apply = [&](const VelocityField& y) {
        VelocityField t = y;
        t.axpy(-c, ops::laplacian(y));
        return project(t);
    };
    auto precond = [&](const VelocityField& r) { return project(helmholtz(r, c)); };

    VelocityField x = precond(pb);
    const double bnorm = ops::l2_norm(pb);
    if (c > 0.0 && bnorm > 0.0) {
        VelocityField r = pb - apply(x);
        VelocityField z = precond(r);
        VelocityField p = z;
        double rz = ops::l2_inner(r, z);
        double rnorm = ops::l2_norm(r);
        std::size_t it = 0;
        const std::size_t max_it = 200;
        for (; it < max_it && rnorm > opts_.stokes_tol * bnorm; ++it) {
            const VelocityField ap = apply(p);
            const double pap = ops::l2_inner(p, ap);
            if (!(pap > 0.0)) break;
            const double a = rz / pap;
            x.axpy(a, p);
            r.axpy(-a, ap);
            rnorm = ops::l2_norm(r);
            z = precond(r);
            const double rz_new = ops::l2_inner(r, z);
            p *= rz_new / rz;
            p += z;
            rz = rz_new;
        }
        // accept round-off stagnation, reject genuine failure
        if (rnorm > 1e3 * opts_.stokes_tol * bnorm)
            throw LinearSolverError("divergence-free CG did not converge", rnorm / bnorm, it);
    }
    if (pressure) {
        VelocityField w = b - x;
        w.axpy(c, ops::laplacian(x));
        project(w, pressure);
    }
    return x;
}

ProjectionResult project_div_free(const VelocityField& w, double tol, SolverBackend backend) {
    if (!(tol > 0.0)) throw DomainError("projection tolerance must be positive");
    const double scale = ops::l2_norm(w);
    SolverOptions opts;
    opts.backend = backend;
    // the PCG stopping rule is relative to the unweighted norm of div(w);
    // tighten it so the per-cell bound below is met
    const ScalarField d = ops::div(w);
    double dnorm = 0.0;
    for (double x : d.values()) dnorm += x * x;
    dnorm = std::sqrt(dnorm);
    opts.tol = dnorm > 0.0 ? std::min(tol, 0.5 * tol * scale / dnorm) : tol;
    EllipticSolver solver(w.grid(), opts);
    ScalarField phi(w.grid());
    VelocityField out = solver.project(w, &phi);
    const double residual = ops::max_abs(ops::div(out));
    if (residual > tol * scale) throw LinearSolverError("projection left divergence above tolerance", residual, 0);
    return {std::move(out), std::move(phi)};
}

}  // namespace lbctl
