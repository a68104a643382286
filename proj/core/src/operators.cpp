#include "lbctl/operators.hpp"

#include <algorithm>
#include <cmath>

#include "lbctl/errors.hpp"

namespace lbctl::ops {

namespace {

void require_same(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) throw ShapeError("operator arguments live on different grids");
}

// Corner derivatives of the tangential velocity components, including the
// wall corners obtained from odd ghost reflection.
//   dudy_corner(i, jj): d u / d y at (x_i, y_jj), i in [0,nx], jj in [0,ny]
//   dvdx_corner(ii, j): d v / d x at (x_ii, y_j), ii in [0,nx], j in [0,ny]
double dudy_corner(const VelocityField& w, std::size_t i, std::size_t jj) {
    const GridSpec& g = w.grid();
    const double below = jj == 0 ? -w.u(i, 0) : w.u(i, jj - 1);
    const double above = jj == g.ny() ? -w.u(i, g.ny() - 1) : w.u(i, jj);
    return (above - below) / g.hy();
}

double dvdx_corner(const VelocityField& w, std::size_t ii, std::size_t j) {
    const GridSpec& g = w.grid();
    const double left = ii == 0 ? -w.v(0, j) : w.v(ii - 1, j);
    const double right = ii == g.nx() ? -w.v(g.nx() - 1, j) : w.v(ii, j);
    return (right - left) / g.hx();
}

}  // namespace

VelocityField grad(const ScalarField& f) {
    const GridSpec& g = f.grid();
    VelocityField out(g);
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 1; i < g.nx(); ++i) out.u(i, j) = (f(i, j) - f(i - 1, j)) * ihx;
    for (std::size_t j = 1; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) out.v(i, j) = (f(i, j) - f(i, j - 1)) * ihy;
    return out;
}

ScalarField div(const VelocityField& w) {
    const GridSpec& g = w.grid();
    ScalarField out(g);
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    const std::size_t nx = g.nx(), ny = g.ny();
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            // boundary-normal faces are excluded: they are fixed at zero
            const double ue = i + 1 < nx ? w.u(i + 1, j) : 0.0;
            const double uw = i > 0 ? w.u(i, j) : 0.0;
            const double vn = j + 1 < ny ? w.v(i, j + 1) : 0.0;
            const double vs = j > 0 ? w.v(i, j) : 0.0;
            out(i, j) = (ue - uw) * ihx + (vn - vs) * ihy;
        }
    }
    return out;
}

ScalarField laplacian(const ScalarField& f) {
    const GridSpec& g = f.grid();
    ScalarField out(g);
    const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
    const std::size_t nx = g.nx(), ny = g.ny();
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double c = f(i, j);
            const double w = i > 0 ? f(i - 1, j) : -c;
            const double e = i + 1 < nx ? f(i + 1, j) : -c;
            const double s = j > 0 ? f(i, j - 1) : -c;
            const double n = j + 1 < ny ? f(i, j + 1) : -c;
            out(i, j) = (w - 2.0 * c + e) * ihx2 + (s - 2.0 * c + n) * ihy2;
        }
    }
    return out;
}

VelocityField laplacian(const VelocityField& w) {
    const GridSpec& g = w.grid();
    VelocityField out(g);
    const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
    const std::size_t nx = g.nx(), ny = g.ny();
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 1; i < nx; ++i) {
            const double c = w.u(i, j);
            const double s = j > 0 ? w.u(i, j - 1) : -c;
            const double n = j + 1 < ny ? w.u(i, j + 1) : -c;
            out.u(i, j) = (w.u(i - 1, j) - 2.0 * c + w.u(i + 1, j)) * ihx2 + (s - 2.0 * c + n) * ihy2;
        }
    }
    for (std::size_t j = 1; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double c = w.v(i, j);
            const double west = i > 0 ? w.v(i - 1, j) : -c;
            const double east = i + 1 < nx ? w.v(i + 1, j) : -c;
            out.v(i, j) = (west - 2.0 * c + east) * ihx2 + (w.v(i, j - 1) - 2.0 * c + w.v(i, j + 1)) * ihy2;
        }
    }
    return out;
}

ScalarField pressure_laplacian(const ScalarField& f) { return div(grad(f)); }

GradientTensor gradient_tensor(const VelocityField& w) {
    const GridSpec& g = w.grid();
    GradientTensor t{ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g)};
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            t.dudx(i, j) = (w.u(i + 1, j) - w.u(i, j)) * ihx;
            t.dvdy(i, j) = (w.v(i, j + 1) - w.v(i, j)) * ihy;
            t.dudy(i, j) = 0.25 * (dudy_corner(w, i, j) + dudy_corner(w, i, j + 1) + dudy_corner(w, i + 1, j) +
                                   dudy_corner(w, i + 1, j + 1));
            t.dvdx(i, j) = 0.25 * (dvdx_corner(w, i, j) + dvdx_corner(w, i + 1, j) + dvdx_corner(w, i, j + 1) +
                                   dvdx_corner(w, i + 1, j + 1));
        }
    }
    return t;
}

Deformation deformation(const VelocityField& w) {
    GradientTensor t = gradient_tensor(w);
    const GridSpec& g = w.grid();
    Deformation d{ScalarField(g), ScalarField(g), ScalarField(g)};
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            d.d11(i, j) = t.dudx(i, j);
            d.d22(i, j) = t.dvdy(i, j);
            d.d12(i, j) = 0.5 * (t.dudy(i, j) + t.dvdx(i, j));
        }
    }
    return d;
}

ScalarField heating(const VelocityField& w) {
    GradientTensor t = gradient_tensor(w);
    const GridSpec& g = w.grid();
    ScalarField out(g);
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            // sum_{a,b} D_ab G_ab with G_ab = d y_a / d x_b
            const double g11 = t.dudx(i, j), g12 = t.dudy(i, j);
            const double g21 = t.dvdx(i, j), g22 = t.dvdy(i, j);
            const double d12 = 0.5 * (g12 + g21);
            out(i, j) = g11 * g11 + d12 * g12 + d12 * g21 + g22 * g22;
        }
    }
    return out;
}

VelocityField advect_velocity(const VelocityField& w, const VelocityField& c) {
    require_same(w.grid(), c.grid());
    const GridSpec& g = w.grid();
    const std::size_t nx = g.nx(), ny = g.ny();
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    VelocityField out(g);

    // x-momentum: fluxes through cell centres (x-direction) and corners (y-direction)
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 1; i < nx; ++i) {
            auto fxx = [&](std::size_t cc) {
                const double carrier = 0.5 * (c.u(cc, j) + c.u(cc + 1, j));
                const double moved = 0.5 * (w.u(cc, j) + w.u(cc + 1, j));
                return carrier * moved;
            };
            auto fxy = [&](std::size_t jj) {
                if (jj == 0 || jj == ny) return 0.0;
                const double carrier = 0.5 * (c.v(i - 1, jj) + c.v(i, jj));
                const double moved = 0.5 * (w.u(i, jj - 1) + w.u(i, jj));
                return carrier * moved;
            };
            out.u(i, j) = (fxx(i) - fxx(i - 1)) * ihx + (fxy(j + 1) - fxy(j)) * ihy;
        }
    }
    // y-momentum
    for (std::size_t j = 1; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            auto fyy = [&](std::size_t cc) {
                const double carrier = 0.5 * (c.v(i, cc) + c.v(i, cc + 1));
                const double moved = 0.5 * (w.v(i, cc) + w.v(i, cc + 1));
                return carrier * moved;
            };
            auto fyx = [&](std::size_t ii) {
                if (ii == 0 || ii == nx) return 0.0;
                const double carrier = 0.5 * (c.u(ii, j - 1) + c.u(ii, j));
                const double moved = 0.5 * (w.v(ii - 1, j) + w.v(ii, j));
                return carrier * moved;
            };
            out.v(i, j) = (fyy(j) - fyy(j - 1)) * ihy + (fyx(i + 1) - fyx(i)) * ihx;
        }
    }
    return out;
}

ScalarField advect_scalar(const ScalarField& f, const VelocityField& c) {
    require_same(f.grid(), c.grid());
    const GridSpec& g = f.grid();
    const std::size_t nx = g.nx(), ny = g.ny();
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    ScalarField out(g);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double fe = i + 1 < nx ? c.u(i + 1, j) * 0.5 * (f(i, j) + f(i + 1, j)) : 0.0;
            const double fw = i > 0 ? c.u(i, j) * 0.5 * (f(i - 1, j) + f(i, j)) : 0.0;
            const double fn = j + 1 < ny ? c.v(i, j + 1) * 0.5 * (f(i, j) + f(i, j + 1)) : 0.0;
            const double fs = j > 0 ? c.v(i, j) * 0.5 * (f(i, j - 1) + f(i, j)) : 0.0;
            out(i, j) = (fe - fw) * ihx + (fn - fs) * ihy;
        }
    }
    return out;
}

ScalarField hadamard(const ScalarField& f, const ScalarField& g) {
    if (!(f.grid() == g.grid())) throw ShapeError("hadamard: grid mismatch");
    ScalarField out = f;
    auto o = out.values();
    auto c = g.values();
    for (std::size_t n = 0; n < o.size(); ++n) o[n] *= c[n];
    return out;
}

VelocityField hadamard(const VelocityField& w, const VelocityField& g) {
    if (!(w.grid() == g.grid())) throw ShapeError("hadamard: grid mismatch");
    VelocityField out = w;
    auto ou = out.u_values();
    auto gu = g.u_values();
    for (std::size_t n = 0; n < ou.size(); ++n) ou[n] *= gu[n];
    auto ov = out.v_values();
    auto gv = g.v_values();
    for (std::size_t n = 0; n < ov.size(); ++n) ov[n] *= gv[n];
    return out;
}

VelocityField cells_to_vertical_faces(const ScalarField& f) {
    const GridSpec& g = f.grid();
    VelocityField out(g);
    for (std::size_t j = 1; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) out.v(i, j) = 0.5 * (f(i, j - 1) + f(i, j));
    return out;
}

ScalarField vertical_faces_to_cells(const VelocityField& w) {
    const GridSpec& g = w.grid();
    ScalarField out(g);
    const std::size_t ny = g.ny();
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const double below = j > 0 ? w.v(i, j) : 0.0;
            const double above = j + 1 < ny ? w.v(i, j + 1) : 0.0;
            out(i, j) = 0.5 * (below + above);
        }
    }
    return out;
}

double l2_inner(const ScalarField& f, const ScalarField& g) {
    require_same(f.grid(), g.grid());
    auto a = f.values();
    auto b = g.values();
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
    return s * f.grid().cell_area();
}

double l2_inner(const VelocityField& x, const VelocityField& y) {
    require_same(x.grid(), y.grid());
    double s = 0.0;
    auto xu = x.u_values(), yu = y.u_values();
    for (std::size_t n = 0; n < xu.size(); ++n) s += xu[n] * yu[n];
    auto xv = x.v_values(), yv = y.v_values();
    for (std::size_t n = 0; n < xv.size(); ++n) s += xv[n] * yv[n];
    return s * x.grid().cell_area();
}

double l2_norm(const ScalarField& f) { return std::sqrt(l2_inner(f, f)); }
double l2_norm(const VelocityField& w) { return std::sqrt(l2_inner(w, w)); }

double max_abs(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.values()) m = std::max(m, std::abs(x));
    return m;
}

double max_abs(const VelocityField& w) {
    double m = 0.0;
    for (double x : w.u_values()) m = std::max(m, std::abs(x));
    for (double x : w.v_values()) m = std::max(m, std::abs(x));
    return m;
}

double h1_seminorm(const ScalarField& f) {
    const GridSpec& g = f.grid();
    const std::size_t nx = g.nx(), ny = g.ny();
    const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
    double s = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i + 1 < nx; ++i) {
            const double d = f(i + 1, j) - f(i, j);
            s += d * d * ihx2;
        }
        s += 2.0 * (f(0, j) * f(0, j) + f(nx - 1, j) * f(nx - 1, j)) * ihx2;
    }
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j + 1 < ny; ++j) {
            const double d = f(i, j + 1) - f(i, j);
            s += d * d * ihy2;
        }
        s += 2.0 * (f(i, 0) * f(i, 0) + f(i, ny - 1) * f(i, ny - 1)) * ihy2;
    }
    return std::sqrt(s * g.cell_area());
}

double h1_seminorm(const VelocityField& w) {
    const GridSpec& g = w.grid();
    const std::size_t nx = g.nx(), ny = g.ny();
    const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
    double s = 0.0;
    // u: normal direction across cells, tangential direction with ghosts
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            const double d = w.u(i + 1, j) - w.u(i, j);
            s += d * d * ihx2;
        }
    for (std::size_t i = 1; i < nx; ++i) {
        for (std::size_t j = 0; j + 1 < ny; ++j) {
            const double d = w.u(i, j + 1) - w.u(i, j);
            s += d * d * ihy2;
        }
        s += 2.0 * (w.u(i, 0) * w.u(i, 0) + w.u(i, ny - 1) * w.u(i, ny - 1)) * ihy2;
    }
    // v
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            const double d = w.v(i, j + 1) - w.v(i, j);
            s += d * d * ihy2;
        }
    for (std::size_t j = 1; j < ny; ++j) {
        for (std::size_t i = 0; i + 1 < nx; ++i) {
            const double d = w.v(i + 1, j) - w.v(i, j);
            s += d * d * ihx2;
        }
        s += 2.0 * (w.v(0, j) * w.v(0, j) + w.v(nx - 1, j) * w.v(nx - 1, j)) * ihx2;
    }
    return std::sqrt(s * g.cell_area());
}

double lp_norm(const ScalarField& f, double p) {
    if (!(p >= 1.0)) throw DomainError("lp_norm needs p >= 1");
    if (p == 2.0) return l2_norm(f);
    double s = 0.0;
    for (double x : f.values()) s += std::pow(std::abs(x), p);
    return std::pow(s * f.grid().cell_area(), 1.0 / p);
}

ScalarField grad_sq(const VelocityField& w) {
    GradientTensor t = gradient_tensor(w);
    ScalarField out(w.grid());
    auto a = t.dudx.values(), b = t.dudy.values(), c = t.dvdx.values(), d = t.dvdy.values();
    auto o = out.values();
    for (std::size_t n = 0; n < o.size(); ++n) o[n] = a[n] * a[n] + b[n] * b[n] + c[n] * c[n] + d[n] * d[n];
    return out;
}

ScalarField grad_sq(const ScalarField& f) {
    const GridSpec& g = f.grid();
    const std::size_t nx = g.nx(), ny = g.ny();
    ScalarField out(g);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double c = f(i, j);
            const double w = i > 0 ? f(i - 1, j) : -c;
            const double e = i + 1 < nx ? f(i + 1, j) : -c;
            const double s = j > 0 ? f(i, j - 1) : -c;
            const double n = j + 1 < ny ? f(i, j + 1) : -c;
            const double gx = 0.5 * ((c - w) + (e - c)) / g.hx();
            const double gy = 0.5 * ((c - s) + (n - c)) / g.hy();
            out(i, j) = gx * gx + gy * gy;
        }
    }
    return out;
}

namespace {

double viscosity_from_grad_sq(const ScalarField& gsq, const ViscosityLaw& law) {
    law.validate();
    const double area = gsq.grid().cell_area();
    double s = 0.0;
    if (law.kind == ViscosityLaw::Kind::L2 || law.p == 2.0) {
        for (double x : gsq.values()) s += x;
        return law.nu0 + law.nu1 * (s * area);
    }
    const double half_p = 0.5 * law.p;
    for (double x : gsq.values()) s += std::pow(x, half_p);
    return law.nu0 + law.nu1 * std::pow(s * area, 2.0 / law.p);
}

}  // namespace

double nonlocal_viscosity(const VelocityField& w, const ViscosityLaw& law) {
    if (law.nu1 == 0.0) {
        law.validate();
        return law.nu0;
    }
    return viscosity_from_grad_sq(grad_sq(w), law);
}

double nonlocal_viscosity(const ScalarField& f, const ViscosityLaw& law) {
    if (law.nu1 == 0.0) {
        law.validate();
        return law.nu0;
    }
    return viscosity_from_grad_sq(grad_sq(f), law);
}

}  // namespace lbctl::ops

namespace lbctl {

void ViscosityLaw::validate() const {
    if (!(nu0 > 0.0)) throw DomainError("viscosity law needs nu0 > 0");
    if (!(nu1 >= 0.0)) throw DomainError("viscosity law needs nu1 >= 0");
    if (kind == Kind::Lp && !(p == 2.0 || (p > 3.0 && p <= 6.0)))
        throw DomainError("Lp viscosity law needs 3 < p <= 6 (or p = 2)");
}

}  // namespace lbctl
