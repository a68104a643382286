#include "lbctl/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lbctl/diagnostics.hpp"
#include "lbctl/geometry.hpp"
#include "lbctl/operators.hpp"

namespace lbctl {

namespace {

double sq(double x) { return x * x; }

// W^-1 applied entrywise in time
ControlTrajectory precondition(const ControlTrajectory& r, const TimeWeights& w) {
    ControlTrajectory z = r;
    for (std::size_t k = 0; k < z.size(); ++k) {
        z.v[k] *= 1.0 / w.w[k];
        z.v0[k] *= 1.0 / w.w[k];
    }
    return z;
}

// W c + chi a from a terminal state, adjoint started at zT / eps
ControlTrajectory reduced_gradient(const Problem& pb, const ControlTrajectory& c, const State& zT, double eps,
                                   const TimeWeights& w) {
    const AdjointTrajectory adj = run_adjoint(pb, (1.0 / eps) * zT.y, (1.0 / eps) * zT.theta);
    ControlTrajectory g = ControlTrajectory::zeros(pb.grid(), pb.time().nt());
    for (std::size_t k = 0; k < g.size(); ++k) {
        g.v[k] = ops::hadamard(adj.sens_v[k], pb.chi_faces());
        g.v[k].axpy(w.w[k], c.v[k]);
        g.v0[k] = ops::hadamard(adj.sens_theta[k], pb.chi_cells());
        g.v0[k].axpy(w.w[k], c.v0[k]);
    }
    return g;
}

void check_weights(const Problem& pb, const TimeWeights& w) {
    if (w.w.size() != pb.time().nt()) throw ShapeError("control weights must have nt entries");
    for (double x : w.w)
        if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("control weights must be positive and finite");
}

}  // namespace

void PenaltySpec::validate(const TimeGrid& tg) const {
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    if (!(cg_tol > 0.0)) throw DomainError("cg_tol must be positive");
    if (cg_max_iters == 0) throw DomainError("cg_max_iters must be >= 1");
    const double tc = clip(tg);
    if (!(tc > 0.0) || !(tc < tg.horizon())) throw DomainError("t_clip must lie in (0, T)");
}

double PenaltySpec::clip(const TimeGrid& tg) const { return t_clip ? *t_clip : tg.horizon() - 2.0 * tg.dt(); }

void OuterLoopSpec::validate() const {
    if (max_outer < 1) throw DomainError("max_outer must be >= 1");
    if (!(outer_tol > 0.0)) throw DomainError("outer_tol must be positive");
    if (!(damping > 0.0) || damping > 1.0) throw DomainError("damping must lie in (0, 1]");
}

TimeWeights control_weights(const WeightTables& tables, const PenaltySpec& pen) {
    TimeGrid tg(tables.horizon, tables.nt);
    pen.validate(tg);
    return normalised_weights(tables, WeightFamily::Rho2, pen.clip(tg), pen.weight_mode == WeightMode::Carleman);
}

double weighted_control_energy(const ControlTrajectory& c, const TimeWeights& w, double dt) {
    return control_inner(c, c, dt, &w.w);
}

double terminal_norm(const State& s) { return std::sqrt(sq(ops::l2_norm(s.y)) + sq(ops::l2_norm(s.theta))); }

double objective(const Problem& pb, const ControlTrajectory& c, const LinearData& data, const PenaltySpec& pen,
                 const TimeWeights& w) {
    pen.validate(pb.time());
    check_weights(pb, w);
    const State zT = linearized_terminal(pb, data.y0, data.theta0, &c, &data.sources);
    return 0.5 * weighted_control_energy(c, w, pb.time().dt()) + 0.5 / pen.epsilon * sq(terminal_norm(zT));
}

ControlTrajectory gradient(const Problem& pb, const ControlTrajectory& c, const LinearData& data,
                           const PenaltySpec& pen, const TimeWeights& w, double* value) {
    pen.validate(pb.time());
    check_weights(pb, w);
    const State zT = linearized_terminal(pb, data.y0, data.theta0, &c, &data.sources);
    if (value) *value = 0.5 * weighted_control_energy(c, w, pb.time().dt()) + 0.5 / pen.epsilon * sq(terminal_norm(zT));
    return reduced_gradient(pb, c, zT, pen.epsilon, w);
}

LinearControlResult solve_linear_control(const Problem& pb, const LinearData& data, const PenaltySpec& pen,
                                         const TimeWeights& w, const ControlTrajectory* warm) {
    pen.validate(pb.time());
    check_weights(pb, w);
    const GridSpec& g = pb.grid();
    const std::size_t nt = pb.time().nt();
    const double dt = pb.time().dt();

    ControlTrajectory x = warm ? *warm : ControlTrajectory::zeros(g, nt);
    if (x.size() != nt) throw ShapeError("warm start has the wrong length");
    LinearControlReport rep;
    rep.eps = pen.epsilon;
    rep.log_weight_offset = w.log_offset;

    double J = 0.0;
    ControlTrajectory r = gradient(pb, x, data, pen, w, &J);
    r *= -1.0;
    ControlTrajectory z = precondition(r, w);
    ControlTrajectory p = z;
    double rz = control_inner(r, z, dt);
    const double r0 = std::sqrt(std::max(rz, 0.0));
    rep.objective_history.push_back(J);

    // Q p is the gradient of the homogeneous problem (no data) at p
    const LinearData none{VelocityField(g), ScalarField(g), {}};
    std::size_t it = 0;
    while (r0 > 0.0 && std::sqrt(std::max(rz, 0.0)) > pen.cg_tol * r0) {
        if (it == pen.cg_max_iters)
            throw CgStagnation("CG reached cg_max_iters without meeting cg_tol", std::move(x));
        const State zp = linearized_terminal(pb, none.y0, none.theta0, &p, nullptr);
        const ControlTrajectory q = reduced_gradient(pb, p, zp, pen.epsilon, w);
        const double pq = control_inner(p, q, dt);
        if (!(pq > 0.0)) throw CgStagnation("CG curvature lost positivity", std::move(x));
        const double a = rz / pq;
        x.axpy(a, p);
        r.axpy(-a, q);
        J -= 0.5 * a * rz;
        rep.objective_history.push_back(J);
        z = precondition(r, w);
        const double rz_new = control_inner(r, z, dt);
        p *= rz_new / rz;
        p.axpy(1.0, z);
        rz = rz_new;
        ++it;
    }
    rep.cg_iters = it;
    rep.grad_norm_ratio = r0 > 0.0 ? std::sqrt(std::max(rz, 0.0)) / r0 : 0.0;

    Trajectory traj = run_linearized(pb, data.y0, data.theta0, &x, &data.sources);
    rep.terminal_norm = terminal_norm(traj.final_state());
    rep.uncontrolled_terminal_norm = terminal_norm(linearized_terminal(pb, data.y0, data.theta0, nullptr, &data.sources));
    rep.control_energy_weighted = weighted_control_energy(x, w, dt);
    rep.objective = 0.5 * rep.control_energy_weighted + 0.5 / pen.epsilon * sq(rep.terminal_norm);
    return {std::move(x), std::move(traj), std::move(rep)};
}

SourceTerms nonlinear_sources(const Problem& pb, const Trajectory& traj) {
    const std::size_t nt = pb.time().nt();
    if (traj.states.size() != nt + 1) throw ShapeError("trajectory must hold nt + 1 states");
    const SystemSpec& spec = pb.spec();
    const double nu0 = spec.law.nu0;
    SourceTerms src = SourceTerms::zeros(pb.grid(), nt);
    for (std::size_t k = 0; k < nt; ++k) {
        const State& s = traj.states[k];
        const State& n = traj.states[k + 1];
        const double nu = ops::nonlocal_viscosity(s.y, spec.law);
        const double nu_t = spec.law_theta ? ops::nonlocal_viscosity(s.theta, *spec.law_theta) : nu;
        src.f1[k] = ops::advect_velocity(s.y, s.y);
        src.f1[k] *= -1.0;
        src.f1[k].axpy(nu - nu0, ops::laplacian(n.y));
        src.f2[k] = ops::advect_scalar(s.theta, s.y);
        src.f2[k] *= -1.0;
        if (spec.heating_on) src.f2[k].axpy(nu, ops::heating(s.y));
        src.f2[k].axpy(nu_t - nu0, ops::laplacian(n.theta));
    }
    return src;
}

NonlinearControlResult solve_nonlinear_control(const Problem& pb, const VelocityField& y0, const ScalarField& theta0,
                                               const PenaltySpec& pen, const OuterLoopSpec& outer,
                                               const TimeWeights& w) {
    outer.validate();
    pen.validate(pb.time());
    const GridSpec& g = pb.grid();
    const std::size_t nt = pb.time().nt();
    const double dt = pb.time().dt();

    NonlinearControlReport rep;
    rep.eps = pen.epsilon;
    rep.log_weight_offset = w.log_offset;
    ControlTrajectory v = ControlTrajectory::zeros(g, nt);
    LinearData data{y0, theta0, SourceTerms::zeros(g, nt)};
    std::size_t growth = 0;
    for (std::size_t j = 1; j <= outer.max_outer; ++j) {
        LinearControlResult lin = solve_linear_control(pb, data, pen, w, &v);
        rep.cg_iters += lin.report.cg_iters;
        ControlTrajectory delta = lin.controls;
        delta.axpy(-1.0, v);
        const double upd = std::sqrt(control_inner(delta, delta, dt));
        v.axpy(outer.damping, delta);
        const double vnorm = std::sqrt(control_inner(v, v, dt));
        rep.outer_iters = j;
        if (!rep.update_norms.empty() && upd > rep.update_norms.back())
            ++growth;
        else
            growth = 0;
        rep.update_norms.push_back(upd);
        if (growth >= 3)
            throw ConvergenceError("outer loop diverging (update grew over 3 consecutive iterations); "
                                   "reduce the data or the damping");
        const Trajectory traj =
            outer.damping == 1.0 ? std::move(lin.trajectory) : run_linearized(pb, y0, theta0, &v, &data.sources);
        rep.linear_terminal_norm = terminal_norm(traj.final_state());
        if (upd <= outer.outer_tol * vnorm || upd == 0.0) {
            rep.converged = true;
            break;
        }
        data.sources = nonlinear_sources(pb, traj);
    }
    rep.control_energy_weighted = weighted_control_energy(v, w, dt);
    RunResult run = run_nonlinear(pb, y0, theta0, &v);
    rep.terminal_norm = terminal_norm(run.trajectory.final_state());
    return {std::move(v), std::move(run), std::move(rep)};
}

LargeTimeResult large_time_control(const Problem& pb, const VelocityField& y0, const ScalarField& theta0,
                                   const LargeTimeSpec& lt, const PenaltySpec& pen, const OuterLoopSpec& outer,
                                   const WeightParams& wp) {
    if (!(lt.delta > 0.0)) throw DomainError("delta must be positive");
    if (!(lt.horizon0 > 0.0) || !(lt.max_wait > 0.0)) throw DomainError("horizons must be positive");
    if (!(lt.fit_from >= 0.0 && lt.fit_from < 1.0)) throw DomainError("fit_from must lie in [0, 1)");
    const double dt = pb.time().dt();
    const std::size_t max_steps = static_cast<std::size_t>(std::ceil(lt.max_wait / dt));
    const std::size_t stall_steps = std::max<std::size_t>(1, max_steps / 10);

    EnergyTrace decay;
    std::vector<State> states;
    LargeTimeReport rep;
    states.emplace_back(y0, theta0);
    decay.samples.push_back(energy_sample(states.back(), 0.0));
    const double E0 = decay.samples.front().E;
    rep.E0 = E0;
    double best = E0;
    std::size_t since_best = 0;
    std::size_t k = 0;
    while (decay.samples.back().E >= lt.delta) {
        if (k == max_steps) throw RegimeError("free decay did not reach delta within max_wait");
        states.push_back(step_nonlinear(pb, states.back(), dt));
        ++k;
        const EnergySample es = energy_sample(states.back(), static_cast<double>(k) * dt);
        if (!std::isfinite(es.E) || es.E > pb.spec().blowup_factor * E0)
            throw DivergenceError("energy blow-up during free decay", k);
        decay.samples.push_back(es);
        if (es.E < best) {
            best = es.E;
            since_best = 0;
        } else if (++since_best >= stall_steps) {
            throw RegimeError("energy stalled during free decay; the data are outside the decay regime");
        }
    }
    rep.decay_steps = k;
    rep.t_cross = static_cast<double>(k) * dt;
    if (k >= 2) {
        const double tb = rep.t_cross;
        const DecayFit fit = decay_fit(decay, lt.fit_from * tb, tb);
        rep.C1 = fit.C1;
        rep.C2 = fit.C2;
        rep.r_squared = fit.r_squared;
        rep.t_star_pred = t_star(fit, lt.delta, E0);
    }

    Problem tail = pb.with_time(TimeGrid(lt.horizon0, lt.nt0));
    const WeightTables tables = eval_weights(wp, build_eta0(pb.grid(), pb.patch()), tail.time());
    const TimeWeights w = control_weights(tables, pen);
    NonlinearControlResult ctl = solve_nonlinear_control(tail, states.back().y, states.back().theta, pen, outer, w);
    rep.control = ctl.report;
    rep.final_norm = ctl.report.terminal_norm;
    return {std::move(decay), std::move(states), std::move(ctl), std::move(rep)};
}

}  // namespace lbctl
