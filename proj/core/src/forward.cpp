#include "lbctl/forward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string_view>

#include "lbctl/errors.hpp"
#include "lbctl/hash.hpp"
#include "lbctl/operators.hpp"

namespace lbctl {

namespace {

void check_cfl(const Problem& pb, const State& s, double dt) {
    const double vmax = ops::max_abs(s.y);
    const double hmin = std::min(pb.grid().hx(), pb.grid().hy());
    if (vmax > 0.0 && dt > pb.spec().cfl * hmin / vmax) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "dt = %.3g exceeds the CFL bound %.3g (max |y| = %.3g)", dt,
                      pb.spec().cfl * hmin / vmax, vmax);
        throw StepSizeError(buf);
    }
}

std::uint64_t add_law(Fnv1a& h, const ViscosityLaw& law) {
    h.add(static_cast<std::uint64_t>(law.kind == ViscosityLaw::Kind::L2 ? 0 : 1)).add(law.nu0).add(law.nu1).add(law.p);
    return h.value();
}

template <class Step>
Trajectory integrate(const Problem& pb, const VelocityField& y0, const ScalarField& theta0,
                     const ControlTrajectory* controls, const SourceTerms* sources, Step&& step,
                     EnergyTrace* energy) {
    const TimeGrid& tg = pb.time();
    const std::size_t nt = tg.nt();
    if (controls && controls->size() != nt) throw ShapeError("control trajectory length must equal nt");
    if (sources && !sources->empty() && (sources->f1.size() != nt || sources->f2.size() != nt))
        throw ShapeError("source terms must have nt entries");
    if (!(y0.grid() == pb.grid()) || !(theta0.grid() == pb.grid())) throw ShapeError("initial data grid mismatch");

    Trajectory traj{pb.grid(), tg, {}, pb.spec().hash(), pb.grid().hash()};
    traj.states.reserve(nt + 1);
    traj.states.emplace_back(y0, theta0);
    double e0 = 0.0;
    if (energy) {
        energy->samples.clear();
        energy->samples.push_back(energy_sample(traj.states[0], 0.0));
        e0 = energy->samples[0].E;
    }
    for (std::size_t k = 0; k < nt; ++k) {
        StepInputs in;
        if (controls) {
            in.v = &controls->v[k];
            in.v0 = &controls->v0[k];
        }
        if (sources && !sources->empty()) {
            in.f1 = &sources->f1[k];
            in.f2 = &sources->f2[k];
        }
        traj.states.push_back(step(traj.states[k], in));
        if (energy) {
            EnergySample es = energy_sample(traj.states.back(), tg.t(k + 1));
            if (!std::isfinite(es.E)) throw DivergenceError("non-finite energy", k + 1);
            if (e0 > 0.0 && es.E > pb.spec().blowup_factor * e0)
                throw DivergenceError("energy exceeded the blow-up threshold", k + 1);
            energy->samples.push_back(es);
        }
    }
    return traj;
}

}  // namespace

void SystemSpec::validate() const {
    law.validate();
    if (law_theta) law_theta->validate();
    if (!(nu0_coupling >= 0.0)) throw DomainError("nu0_coupling must be >= 0");
    if (!(cfl > 0.0)) throw DomainError("cfl must be positive");
    if (!(blowup_factor > 1.0)) throw DomainError("blowup_factor must exceed 1");
}

std::uint64_t SystemSpec::hash() const noexcept {
    Fnv1a h;
    h.add(std::string_view("system"));
    add_law(h, law);
    h.add(static_cast<std::uint64_t>(law_theta.has_value()));
    if (law_theta) add_law(h, *law_theta);
    h.add(nu0_coupling)
        .add(static_cast<std::uint64_t>(heating_on))
        .add(static_cast<std::uint64_t>(mode == SystemMode::Nonlinear ? 0 : 1))
        .add(cfl)
        .add(blowup_factor)
        .add(static_cast<std::uint64_t>(solver.backend == SolverBackend::Spectral ? 0 : 1))
        .add(solver.tol)
        .add(solver.stokes_tol);
    return h.value();
}

ControlTrajectory ControlTrajectory::zeros(const GridSpec& g, std::size_t nt) {
    ControlTrajectory c;
    c.v.assign(nt, VelocityField(g));
    c.v0.assign(nt, ScalarField(g));
    return c;
}

ControlTrajectory& ControlTrajectory::axpy(double a, const ControlTrajectory& x) {
    if (x.size() != size()) throw ShapeError("control trajectories differ in length");
    for (std::size_t k = 0; k < size(); ++k) {
        v[k].axpy(a, x.v[k]);
        v0[k].axpy(a, x.v0[k]);
    }
    return *this;
}

ControlTrajectory& ControlTrajectory::operator*=(double a) {
    for (auto& f : v) f *= a;
    for (auto& f : v0) f *= a;
    return *this;
}

double control_inner(const ControlTrajectory& a, const ControlTrajectory& b, double dt, const std::vector<double>* w) {
    if (a.size() != b.size()) throw ShapeError("control trajectories differ in length");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double wk = w ? (*w)[k] : 1.0;
        s += wk * (ops::l2_inner(a.v[k], b.v[k]) + ops::l2_inner(a.v0[k], b.v0[k]));
    }
    return dt * s;
}

SourceTerms SourceTerms::zeros(const GridSpec& g, std::size_t nt) {
    SourceTerms s;
    s.f1.assign(nt, VelocityField(g));
    s.f2.assign(nt, ScalarField(g));
    return s;
}

void EnergyTrace::write_csv(std::ostream& os) const {
    os << "t,E,Phi,grad_y_sq,theta_sq,grad_theta_sq\n";
    char buf[256];
    for (const EnergySample& s : samples) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.E, s.Phi, s.grad_y_sq,
                      s.theta_sq, s.grad_theta_sq);
        os << buf;
    }
}

EnergySample energy_sample(const State& s, double t) {
    EnergySample e;
    e.t = t;
    const double gy = ops::h1_seminorm(s.y);
    const double th = ops::l2_norm(s.theta);
    const double gt = ops::h1_seminorm(s.theta);
    e.grad_y_sq = gy * gy;
    e.theta_sq = th * th;
    e.grad_theta_sq = gt * gt;
    e.E = e.grad_y_sq + e.theta_sq + e.grad_theta_sq;
    e.Phi = s.y.grid().first_eigenvalue() * e.grad_y_sq + e.theta_sq + e.grad_theta_sq;
    return e;
}

Problem::Problem(const GridSpec& grid, const TimeGrid& time, SystemSpec spec, const ControlPatch& patch)
    : grid_(grid),
      time_(time),
      spec_(std::move(spec)),
      patch_(patch),
      solver_(grid, spec_.solver),
      chi_f_(cutoff_faces(grid, patch)),
      chi_c_(cutoff_1omega(grid, patch)) {
    spec_.validate();
}

Problem Problem::with_time(const TimeGrid& time) const {
    Problem p = *this;
    p.time_ = time;
    return p;
}

State step_nonlinear(const Problem& pb, const State& s, double dt, const StepInputs& in) {
    if (pb.spec().mode == SystemMode::Linearized) return step_linearized(pb, s, dt, in);
    check_cfl(pb, s, dt);
    const SystemSpec& spec = pb.spec();
    const double nu = ops::nonlocal_viscosity(s.y, spec.law);
    const double nu_theta = spec.law_theta ? ops::nonlocal_viscosity(s.theta, *spec.law_theta) : nu;

    ScalarField rt = s.theta;
    rt.axpy(-dt, ops::advect_scalar(s.theta, s.y));
    if (spec.heating_on) rt.axpy(dt * nu, ops::heating(s.y));
    if (in.v0) rt.axpy(dt, ops::hadamard(*in.v0, pb.chi_cells()));
    if (in.f2) rt.axpy(dt, *in.f2);

    VelocityField ry = s.y;
    ry.axpy(-dt, ops::advect_velocity(s.y, s.y));
    ry.axpy(dt * spec.nu0_coupling, ops::cells_to_vertical_faces(s.theta));
    if (in.v) ry.axpy(dt, ops::hadamard(*in.v, pb.chi_faces()));
    if (in.f1) ry.axpy(dt, *in.f1);

    State out(pb.grid());
    out.theta = pb.solver().helmholtz(rt, dt * nu_theta);
    ScalarField phi(pb.grid());
    out.y = pb.solver().stokes(ry, dt * nu, &phi);
    phi *= 1.0 / dt;
    out.pressure = std::move(phi);
    return out;
}

State step_linearized(const Problem& pb, const State& s, double dt, const StepInputs& in) {
    const SystemSpec& spec = pb.spec();
    const double nu0 = spec.law.nu0;

    ScalarField rt = s.theta;
    if (in.v0) rt.axpy(dt, ops::hadamard(*in.v0, pb.chi_cells()));
    if (in.f2) rt.axpy(dt, *in.f2);

    VelocityField ry = s.y;
    ry.axpy(dt * spec.nu0_coupling, ops::cells_to_vertical_faces(s.theta));
    if (in.v) ry.axpy(dt, ops::hadamard(*in.v, pb.chi_faces()));
    if (in.f1) ry.axpy(dt, *in.f1);

    State out(pb.grid());
    out.theta = pb.solver().helmholtz(rt, dt * nu0);
    ScalarField phi(pb.grid());
    out.y = pb.solver().stokes(ry, dt * nu0, &phi);
    phi *= 1.0 / dt;
    out.pressure = std::move(phi);
    return out;
}

RunResult run_nonlinear(const Problem& pb, const VelocityField& y0, const ScalarField& theta0,
                        const ControlTrajectory* controls, const SourceTerms* forcing) {
    RunResult r{Trajectory{pb.grid(), pb.time(), {}, 0, 0}, {}};
    const double dt = pb.time().dt();
    r.trajectory = integrate(
        pb, y0, theta0, controls, forcing,
        [&](const State& s, const StepInputs& in) { return step_nonlinear(pb, s, dt, in); }, &r.energy);
    return r;
}

Trajectory run_linearized(const Problem& pb, const VelocityField& y0, const ScalarField& theta0,
                          const ControlTrajectory* controls, const SourceTerms* sources) {
    const double dt = pb.time().dt();
    return integrate(
        pb, y0, theta0, controls, sources,
        [&](const State& s, const StepInputs& in) { return step_linearized(pb, s, dt, in); }, nullptr);
}

State linearized_terminal(const Problem& pb, const VelocityField& y0, const ScalarField& theta0,
                          const ControlTrajectory* controls, const SourceTerms* sources) {
    const std::size_t nt = pb.time().nt();
    const double dt = pb.time().dt();
    if (controls && controls->size() != nt) throw ShapeError("control trajectory length must equal nt");
    if (sources && !sources->empty() && (sources->f1.size() != nt || sources->f2.size() != nt))
        throw ShapeError("source terms must have nt entries");
    State s(y0, theta0);
    for (std::size_t k = 0; k < nt; ++k) {
        StepInputs in;
        if (controls) {
            in.v = &controls->v[k];
            in.v0 = &controls->v0[k];
        }
        if (sources && !sources->empty()) {
            in.f1 = &sources->f1[k];
            in.f2 = &sources->f2[k];
        }
        s = step_linearized(pb, s, dt, in);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Manufactured solutions

namespace {

struct Profile {
    double kx, ky;

    // S(x) = sin^2(kx x) and derivatives
    double S(double k, double x) const { return std::sin(k * x) * std::sin(k * x); }
    double S1(double k, double x) const { return k * std::sin(2.0 * k * x); }
    double S2(double k, double x) const { return 2.0 * k * k * std::cos(2.0 * k * x); }
    double S3(double k, double x) const { return -4.0 * k * k * k * std::sin(2.0 * k * x); }

    double psi(double x, double y) const { return S(kx, x) * S(ky, y); }
    double u(double x, double y) const { return S(kx, x) * S1(ky, y); }
    double v(double x, double y) const { return -S1(kx, x) * S(ky, y); }
    double ux(double x, double y) const { return S1(kx, x) * S1(ky, y); }
    double uy(double x, double y) const { return S(kx, x) * S2(ky, y); }
    double vx(double x, double y) const { return -S2(kx, x) * S(ky, y); }
    double vy(double x, double y) const { return -S1(kx, x) * S1(ky, y); }
    double lap_u(double x, double y) const { return S2(kx, x) * S1(ky, y) + S(kx, x) * S3(ky, y); }
    double lap_v(double x, double y) const { return -S3(kx, x) * S(ky, y) - S1(kx, x) * S2(ky, y); }

    double th(double x, double y) const { return std::sin(kx * x) * std::sin(ky * y); }
    double thx(double x, double y) const { return kx * std::cos(kx * x) * std::sin(ky * y); }
    double thy(double x, double y) const { return ky * std::sin(kx * x) * std::cos(ky * y); }
    double lap_th(double x, double y) const { return -(kx * kx + ky * ky) * th(x, y); }

    double px(double x, double y) const { return -kx * std::sin(kx * x) * std::cos(ky * y); }
    double py(double x, double y) const { return -ky * std::cos(kx * x) * std::sin(ky * y); }

    double grad_y_sq(double x, double y) const {
        const double a = ux(x, y), b = uy(x, y), c = vx(x, y), d = vy(x, y);
        return a * a + b * b + c * c + d * d;
    }
    double grad_th_sq(double x, double y) const {
        const double a = thx(x, y), b = thy(x, y);
        return a * a + b * b;
    }
    double heat(double x, double y) const {
        const double a = ux(x, y), d = vy(x, y), sh = uy(x, y) + vx(x, y);
        return a * a + d * d + 0.5 * sh * sh;
    }
};

// (integral of g^(p/2))^(2/p) by a fine midpoint rule; exact to roundoff for
// the trigonometric polynomials used here when p = 2.
template <class G>
double gradient_integral(const GridSpec& g, double p, G&& gsq) {
    const std::size_t n = 512;
    const double hx = g.lx() / n, hy = g.ly() / n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const double q = gsq((i + 0.5) * hx, (j + 0.5) * hy);
            s += p == 2.0 ? q : std::pow(q, 0.5 * p);
        }
    s *= hx * hy;
    return p == 2.0 ? s : std::pow(s, 2.0 / p);
}

}  // namespace

Manufactured Manufactured::steady(double a, double b, double c) {
    Manufactured m;
    m.A = [a](double) { return a; };
    m.dA = [](double) { return 0.0; };
    m.B = [b](double) { return b; };
    m.dB = [](double) { return 0.0; };
    m.C = [c](double) { return c; };
    return m;
}

VelocityField manufactured_velocity(const GridSpec& g, double amplitude) {
    Profile pr{std::numbers::pi / g.lx(), std::numbers::pi / g.ly()};
    VelocityField w(g);
    const double lx = g.lx(), ly = g.ly();
    auto X = [&](std::size_t i) { return i == g.nx() ? lx : g.xf(i); };
    auto Y = [&](std::size_t j) { return j == g.ny() ? ly : g.yf(j); };
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 1; i < g.nx(); ++i)
            w.u(i, j) = amplitude * (pr.psi(X(i), Y(j + 1)) - pr.psi(X(i), Y(j))) / g.hy();
    for (std::size_t j = 1; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i)
            w.v(i, j) = -amplitude * (pr.psi(X(i + 1), Y(j)) - pr.psi(X(i), Y(j))) / g.hx();
    return w;
}

ScalarField manufactured_theta(const GridSpec& g, double amplitude) {
    Profile pr{std::numbers::pi / g.lx(), std::numbers::pi / g.ly()};
    return ScalarField::sample(g, [&](double x, double y) { return amplitude * pr.th(x, y); });
}

MmsReport run_mms(const Problem& pb, const Manufactured& mf) {
    const GridSpec& g = pb.grid();
    const TimeGrid& tg = pb.time();
    const SystemSpec& spec = pb.spec();
    if (spec.mode != SystemMode::Nonlinear) throw DomainError("run_mms drives the nonlinear solver");
    const Profile pr{std::numbers::pi / g.lx(), std::numbers::pi / g.ly()};

    const double iy = gradient_integral(g, spec.law.p, [&](double x, double y) { return pr.grad_y_sq(x, y); });
    double ith = 0.0;
    if (spec.law_theta)
        ith = gradient_integral(g, spec.law_theta->p, [&](double x, double y) { return pr.grad_th_sq(x, y); });

    const double nu0c = spec.nu0_coupling;
    SourceTerms forcing = SourceTerms::zeros(g, tg.nt());
    for (std::size_t k = 0; k < tg.nt(); ++k) {
        const double t = tg.t(k + 1);
        const double A = mf.A(t), dA = mf.dA(t), B = mf.B(t), dB = mf.dB(t), C = mf.C(t);
        const double nu = spec.law.nu0 + spec.law.nu1 * A * A * iy;
        const double nu_th =
            spec.law_theta ? spec.law_theta->nu0 + spec.law_theta->nu1 * B * B * ith : nu;
        const double heat_coef = spec.heating_on ? nu : 0.0;
        forcing.f1[k] = VelocityField::sample(
            g,
            [&](double x, double y) {
                const double u = pr.u(x, y), v = pr.v(x, y);
                return dA * u - nu * A * pr.lap_u(x, y) + A * A * (u * pr.ux(x, y) + v * pr.uy(x, y)) +
                       C * pr.px(x, y);
            },
            [&](double x, double y) {
                const double u = pr.u(x, y), v = pr.v(x, y);
                return dA * v - nu * A * pr.lap_v(x, y) + A * A * (u * pr.vx(x, y) + v * pr.vy(x, y)) +
                       C * pr.py(x, y) - nu0c * B * pr.th(x, y);
            });
        forcing.f2[k] = ScalarField::sample(g, [&](double x, double y) {
            return dB * pr.th(x, y) - nu_th * B * pr.lap_th(x, y) +
                   A * B * (pr.u(x, y) * pr.thx(x, y) + pr.v(x, y) * pr.thy(x, y)) -
                   heat_coef * A * A * pr.heat(x, y);
        });
    }

    RunResult run = run_nonlinear(pb, manufactured_velocity(g, mf.A(0.0)), manufactured_theta(g, mf.B(0.0)),
                                  nullptr, &forcing);
    MmsReport rep;
    rep.n = g.nx();
    rep.h = std::max(g.hx(), g.hy());
    rep.dt = tg.dt();
    double acc = 0.0;
    for (std::size_t k = 1; k <= tg.nt(); ++k) {
        const State& s = run.trajectory.states[k];
        VelocityField ey = s.y - manufactured_velocity(g, mf.A(tg.t(k)));
        ScalarField et = s.theta - manufactured_theta(g, mf.B(tg.t(k)));
        const double e2 = ops::l2_inner(ey, ey) + ops::l2_inner(et, et);
        acc += tg.dt() * e2;
        if (k == tg.nt()) rep.terminal_error = std::sqrt(e2);
    }
    rep.l2q_error = std::sqrt(acc);
    return rep;
}

double fit_order(const std::vector<double>& h, const std::vector<double>& err) {
    if (h.size() != err.size() || h.size() < 2) throw ShapeError("fit_order needs matching samples (>= 2)");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0.0) || !(err[i] > 0.0)) throw DegenerateError("fit_order needs positive samples");
        const double x = std::log(h[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace lbctl
