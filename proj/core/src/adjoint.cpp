#include "lbctl/adjoint.hpp"

#include <cmath>

#include "lbctl/errors.hpp"
#include "lbctl/operators.hpp"

namespace lbctl {

namespace {

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; }

ScalarField random_scalar(const GridSpec& g, std::mt19937_64& rng) {
    ScalarField f(g);
    for (double& x : f.values()) x = uniform(rng);
    return f;
}

VelocityField random_velocity(const GridSpec& g, std::mt19937_64& rng) {
    VelocityField w(g);
    for (double& x : w.u_values()) x = uniform(rng);
    for (double& x : w.v_values()) x = uniform(rng);
    w.clear_boundary();
    return w;
}

double sq(double x) { return x * x; }

}  // namespace

AdjointSources AdjointSources::zeros(const GridSpec& g, std::size_t nt) {
    AdjointSources s;
    s.g1.assign(nt, VelocityField(g));
    s.g2.assign(nt, ScalarField(g));
    return s;
}

AdjointTrajectory run_adjoint(const Problem& pb, const VelocityField& phiT, const ScalarField& psiT,
                              const AdjointSources* sources) {
    const GridSpec& g = pb.grid();
    const TimeGrid& tg = pb.time();
    const std::size_t nt = tg.nt();
    const double dt = tg.dt();
    const double c = dt * pb.spec().law.nu0;
    const double coupling = dt * pb.spec().nu0_coupling;
    if (!(phiT.grid() == g) || !(psiT.grid() == g)) throw ShapeError("adjoint terminal data grid mismatch");
    const bool has_src = sources && !sources->empty();
    if (has_src && (sources->g1.size() != nt || sources->g2.size() != nt))
        throw ShapeError("adjoint sources must have nt entries");
    const EllipticSolver& es = pb.solver();

    AdjointTrajectory out{g, tg, {}, {}, {}};
    out.states.assign(nt + 1, AdjointState(g));
    out.sens_v.assign(nt, VelocityField(g));
    out.sens_theta.assign(nt, ScalarField(g));

    AdjointState& last = out.states[nt];
    VelocityField terminal = phiT;
    last.psi = psiT;
    if (has_src) {
        terminal.axpy(dt, sources->g1[nt - 1]);
        last.psi.axpy(dt, sources->g2[nt - 1]);
    }
    last.phi = es.project(terminal, &last.pi);

    for (std::size_t k = nt; k-- > 0;) {
        const AdjointState& next = out.states[k + 1];
        AdjointState& cur = out.states[k];
        out.sens_v[k] = es.stokes(next.phi, c, &cur.pi);
        out.sens_theta[k] = es.helmholtz(next.psi, c);
        cur.phi = out.sens_v[k];
        cur.psi = out.sens_theta[k];
        cur.psi.axpy(coupling, ops::vertical_faces_to_cells(out.sens_v[k]));
        if (has_src && k > 0) {
            cur.phi += es.project(dt * sources->g1[k - 1]);
            cur.psi.axpy(dt, sources->g2[k - 1]);
        }
        cur.pi *= 1.0 / dt;
    }
    return out;
}

LinearInputs LinearInputs::zeros(const GridSpec& g, std::size_t nt) {
    return {VelocityField(g), ScalarField(g), ControlTrajectory::zeros(g, nt), SourceTerms::zeros(g, nt)};
}

LinearInputs LinearInputs::random(const Problem& pb, std::mt19937_64& rng) {
    const GridSpec& g = pb.grid();
    LinearInputs x = zeros(g, pb.time().nt());
    x.y0 = pb.solver().project(random_velocity(g, rng));
    x.theta0 = random_scalar(g, rng);
    for (std::size_t k = 0; k < pb.time().nt(); ++k) {
        x.controls.v[k] = random_velocity(g, rng);
        x.controls.v0[k] = random_scalar(g, rng);
        x.sources.f1[k] = random_velocity(g, rng);
        x.sources.f2[k] = random_scalar(g, rng);
    }
    return x;
}

AdjointInputs AdjointInputs::zeros(const GridSpec& g, std::size_t nt) {
    return {VelocityField(g), ScalarField(g), AdjointSources::zeros(g, nt)};
}

AdjointInputs AdjointInputs::random(const Problem& pb, std::mt19937_64& rng) {
    const GridSpec& g = pb.grid();
    AdjointInputs z = zeros(g, pb.time().nt());
    z.phiT = pb.solver().project(random_velocity(g, rng));
    z.psiT = random_scalar(g, rng);
    for (std::size_t k = 0; k < pb.time().nt(); ++k) {
        z.sources.g1[k] = random_velocity(g, rng);
        z.sources.g2[k] = random_scalar(g, rng);
    }
    return z;
}

double duality_defect(const Problem& pb, const LinearInputs& x, const AdjointInputs& z) {
    const std::size_t nt = pb.time().nt();
    const double dt = pb.time().dt();

    Trajectory tr = run_linearized(pb, x.y0, x.theta0, &x.controls, &x.sources);
    double lhs = ops::l2_inner(tr.states[nt].y, z.phiT) + ops::l2_inner(tr.states[nt].theta, z.psiT);
    if (!z.sources.empty())
        for (std::size_t k = 1; k <= nt; ++k)
            lhs += dt * (ops::l2_inner(tr.states[k].y, z.sources.g1[k - 1]) +
                         ops::l2_inner(tr.states[k].theta, z.sources.g2[k - 1]));

    AdjointTrajectory adj = run_adjoint(pb, z.phiT, z.psiT, &z.sources);
    double rhs = ops::l2_inner(x.y0, adj.states[0].phi) + ops::l2_inner(x.theta0, adj.states[0].psi);
    double xnorm = sq(ops::l2_norm(x.y0)) + sq(ops::l2_norm(x.theta0));
    double znorm = sq(ops::l2_norm(z.phiT)) + sq(ops::l2_norm(z.psiT));
    const VelocityField& chi_f = pb.chi_faces();
    const ScalarField& chi_c = pb.chi_cells();
    for (std::size_t k = 0; k < nt; ++k) {
        const VelocityField& av = adj.sens_v[k];
        const ScalarField& at = adj.sens_theta[k];
        double s = 0.0;
        if (x.controls.size() == nt) {
            const VelocityField cv = ops::hadamard(x.controls.v[k], chi_f);
            const ScalarField c0 = ops::hadamard(x.controls.v0[k], chi_c);
            s += ops::l2_inner(cv, av) + ops::l2_inner(c0, at);
            xnorm += dt * (sq(ops::l2_norm(x.controls.v[k])) + sq(ops::l2_norm(x.controls.v0[k])));
        }
        if (!x.sources.empty()) {
            s += ops::l2_inner(x.sources.f1[k], av) + ops::l2_inner(x.sources.f2[k], at);
            xnorm += dt * (sq(ops::l2_norm(x.sources.f1[k])) + sq(ops::l2_norm(x.sources.f2[k])));
        }
        if (!z.sources.empty())
            znorm += dt * (sq(ops::l2_norm(z.sources.g1[k])) + sq(ops::l2_norm(z.sources.g2[k])));
        rhs += dt * s;
    }
    const double scale = std::sqrt(xnorm) * std::sqrt(znorm);
    if (scale == 0.0) return 0.0;
    return std::abs(lhs - rhs) / scale;
}

}  // namespace lbctl
