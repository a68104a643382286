#include "lbctl/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include "lbctl/errors.hpp"
#include "lbctl/field_io.hpp"
#include "lbctl/operators.hpp"

namespace lbctl {

namespace {

class Artifacts {
public:
    Artifacts(std::filesystem::path dir, std::string stem) : dir_(std::move(dir)), stem_(std::move(stem)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    std::filesystem::path path(const std::string& suffix) const { return dir_ / (stem_ + suffix); }

    std::ofstream open(const std::string& suffix) {
        const std::filesystem::path p = path(suffix);
        std::ofstream os(p, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot write " + p.string());
        written_.push_back(p);
        return os;
    }

    void add(const std::filesystem::path& p) { written_.push_back(p); }
    const std::vector<std::filesystem::path>& written() const { return written_; }

private:
    std::filesystem::path dir_;
    std::string stem_;
    std::vector<std::filesystem::path> written_;
};

EnergyTrace trace_of(const Trajectory& traj) {
    EnergyTrace tr;
    for (std::size_t k = 0; k < traj.states.size(); ++k) tr.samples.push_back(energy_sample(traj.states[k], traj.time.t(k)));
    return tr;
}

std::size_t phi_violations(const EnergyTrace& tr) {
    std::size_t n = 0;
    for (std::size_t k = 1; k < tr.samples.size(); ++k)
        if (tr.samples[k].Phi > tr.samples[k - 1].Phi) ++n;
    return n;
}

CheckResult check(const std::string& name, bool ok, double value, double threshold, const std::string& detail) {
    return {name, ok, value, threshold, detail};
}

struct Context {
    const ExperimentConfig& cfg;
    const RunOptions& opt;
    Artifacts& out;
    bool dump;
    Report& rep;
    std::vector<CheckResult>& checks;

    void log(const std::string& line) const {
        if (opt.log) *opt.log << line << '\n';
    }
};

Problem make_problem(const ExperimentConfig& cfg) { return Problem(cfg.grid(), cfg.time(), cfg.system, cfg.patch); }

void write_energy(Context& c, const std::string& suffix, const EnergyTrace& tr) {
    std::ofstream os = c.out.open(suffix);
    tr.write_csv(os);
}

void add_linear(Report& rep, const std::string& p, const LinearControlReport& r) {
    rep.set(p + "eps", r.eps);
    rep.set(p + "terminal_norm", r.terminal_norm);
    rep.set(p + "uncontrolled_terminal_norm", r.uncontrolled_terminal_norm);
    rep.set(p + "control_energy_weighted", r.control_energy_weighted);
    rep.set(p + "log_weight_offset", r.log_weight_offset);
    rep.set(p + "objective", r.objective);
    rep.set(p + "grad_norm_ratio", r.grad_norm_ratio);
    rep.set(p + "cg_iters", r.cg_iters);
}

void add_nonlinear(Report& rep, const std::string& p, const NonlinearControlReport& r) {
    rep.set(p + "terminal_norm", r.terminal_norm);
    rep.set(p + "linear_terminal_norm", r.linear_terminal_norm);
    rep.set(p + "control_energy_weighted", r.control_energy_weighted);
    rep.set(p + "log_weight_offset", r.log_weight_offset);
    rep.set(p + "cg_iters", r.cg_iters);
    rep.set(p + "outer_iters", r.outer_iters);
    rep.set(p + "eps", r.eps);
    rep.set(p + "converged", r.converged);
    for (std::size_t i = 0; i < r.update_norms.size(); ++i)
        rep.set(p + "update_norm." + std::to_string(i + 1), r.update_norms[i]);
}

// update norms nonincreasing from the second iteration on
bool monotone_after_first(const std::vector<double>& u) {
    for (std::size_t i = 2; i < u.size(); ++i)
        if (u[i] > u[i - 1]) return false;
    return true;
}

void run_simulate(Context& c) {
    const Problem pb = make_problem(c.cfg);
    const State s0 = make_initial_state(c.cfg, pb.solver());
    Trajectory traj = c.cfg.system.mode == SystemMode::Nonlinear ? run_nonlinear(pb, s0.y, s0.theta).trajectory
                                                                 : run_linearized(pb, s0.y, s0.theta);
    const EnergyTrace tr = trace_of(traj);
    c.rep.set("spec_hash", hex_hash(traj.spec_hash));
    c.rep.set("E0", tr.samples.front().E);
    c.rep.set("E_final", tr.samples.back().E);
    c.rep.set("terminal_norm", terminal_norm(traj.final_state()));
    c.rep.set("steps", pb.time().nt());
    c.rep.set("phi_violations", phi_violations(tr));
    write_energy(c, ".energy.csv", tr);
    if (c.dump) {
        write_trajectory(c.out.path(".trajectory.lbf"), traj);
        c.out.add(c.out.path(".trajectory.lbf"));
    }
}

void run_decay(Context& c) {
    const Problem pb = make_problem(c.cfg);
    const State s0 = make_initial_state(c.cfg, pb.solver());
    RunResult run = run_nonlinear(pb, s0.y, s0.theta);
    const EnergyTrace& tr = run.energy;
    const double T = pb.time().horizon();
    const DecayFit fit = decay_fit(tr, c.cfg.decay.fit_from * T, T);
    const std::size_t viol = phi_violations(tr);
    const double E0 = tr.samples.front().E;
    const double nu0 = c.cfg.system.law.nu0;
    const bool phi_applies = E0 <= c.cfg.decay.phi_smallness * nu0 * nu0;

    c.rep.set("spec_hash", hex_hash(run.trajectory.spec_hash));
    c.rep.set("E0", E0);
    c.rep.set("E_final", tr.samples.back().E);
    c.rep.set("steps", pb.time().nt());
    c.rep.set("phi_violations", viol);
    c.rep.set("phi_check_applies", phi_applies);
    add_to_report(c.rep, fit);

    c.checks.push_back(check("decay_rate", fit.C1 > 0.0, fit.C1, 0.0, "fitted C1 > 0"));
    c.checks.push_back(check("decay_r2", fit.r_squared >= c.cfg.decay.r2_min, fit.r_squared, c.cfg.decay.r2_min,
                             "r^2 of the log-linear fit"));
    if (phi_applies)
        c.checks.push_back(check("phi_monotone", viol == 0, static_cast<double>(viol), 0.0,
                                 "steps where the discrete Phi increased"));
    write_energy(c, ".energy.csv", tr);
    if (c.dump) {
        write_trajectory(c.out.path(".trajectory.lbf"), run.trajectory);
        c.out.add(c.out.path(".trajectory.lbf"));
    }
}

void dump_controls(Context& c, const ControlTrajectory& v, const TimeGrid& tg) {
    write_controls(c.out.path(".controls.lbf"), v, tg);
    c.out.add(c.out.path(".controls.lbf"));
}

template <class F>
auto with_iterate_dump(Context& c, const TimeGrid& tg, F&& f) {
    try {
        return f();
    } catch (const CgStagnation& e) {
        write_controls(c.out.path(".cg_iterate.lbf"), e.iterate(), tg);
        throw;
    }
}

void run_linear_control(Context& c) {
    const Problem pb = make_problem(c.cfg);
    const State s0 = make_initial_state(c.cfg, pb.solver());
    const LinearData data = LinearData::from_initial(s0.y, s0.theta);
    const WeightTables tables = eval_weights(c.cfg.resolved_weights(), build_eta0(pb.grid(), pb.patch()), pb.time());

    // the main epsilon and the sweep are independent solves
    std::vector<double> eps{c.cfg.penalty.epsilon};
    for (double e : c.cfg.eps_sweep) eps.push_back(e);
    std::vector<std::optional<LinearControlResult>> res(eps.size());
    with_iterate_dump(c, pb.time(), [&] {
        parallel_for(eps.size(), c.opt.jobs, [&](std::size_t i) {
            PenaltySpec pen = c.cfg.penalty;
            pen.epsilon = eps[i];
            res[i] = solve_linear_control(pb, data, pen, control_weights(tables, pen));
        });
        return 0;
    });
    const LinearControlResult& main = *res[0];
    const LinearControlReport& r = main.report;
    add_linear(c.rep, "", r);
    c.rep.set("outer_iters", std::size_t{0});
    const double ratio = r.uncontrolled_terminal_norm > 0.0 ? r.terminal_norm / r.uncontrolled_terminal_norm : 0.0;
    c.rep.set("terminal_ratio", ratio);
    const double clip = c.cfg.penalty.clip(pb.time());
    const WeightedNormReport wn = weighted_norms(main.trajectory, main.controls, tables, clip);
    add_to_report(c.rep, wn);
    const ControlRegularityReport kr = control_regularity_report(main.controls, tables, clip);
    add_to_report(c.rep, kr);
    c.checks.push_back(check("terminal_ratio", ratio <= c.cfg.checks.terminal_ratio, ratio, c.cfg.checks.terminal_ratio,
                             "controlled / uncontrolled terminal norm"));

    if (!c.cfg.eps_sweep.empty()) {
        std::vector<std::pair<double, double>> sweep;
        for (std::size_t i = 1; i < res.size(); ++i) {
            const std::string p = "sweep." + std::to_string(i) + ".";
            add_linear(c.rep, p, res[i]->report);
            sweep.emplace_back(eps[i], res[i]->report.terminal_norm);
        }
        std::sort(sweep.begin(), sweep.end(), [](auto a, auto b) { return a.first > b.first; });
        double worst = 0.0;
        for (std::size_t i = 1; i < sweep.size(); ++i) worst = std::max(worst, sweep[i].second / sweep[i - 1].second);
        const double bound = 1.0 + c.cfg.checks.sweep_slack;
        c.checks.push_back(check("eps_sweep_monotone", worst <= bound, worst, bound,
                                 "largest ratio of successive terminal norms, eps decreasing"));
    }
    write_energy(c, ".energy.csv", trace_of(main.trajectory));
    if (c.dump) {
        dump_controls(c, main.controls, pb.time());
        write_trajectory(c.out.path(".trajectory.lbf"), main.trajectory);
        c.out.add(c.out.path(".trajectory.lbf"));
    }
}

void run_nonlinear_control(Context& c) {
    const Problem pb = make_problem(c.cfg);
    const State s0 = make_initial_state(c.cfg, pb.solver());
    const WeightTables tables = eval_weights(c.cfg.resolved_weights(), build_eta0(pb.grid(), pb.patch()), pb.time());
    const TimeWeights w = control_weights(tables, c.cfg.penalty);
    const NonlinearControlResult res = with_iterate_dump(
        c, pb.time(), [&] { return solve_nonlinear_control(pb, s0.y, s0.theta, c.cfg.penalty, c.cfg.outer, w); });
    const NonlinearControlReport& r = res.report;
    const double E0 = res.run.energy.samples.front().E;
    add_nonlinear(c.rep, "", r);
    c.rep.set("E0", E0);
    c.rep.set("uncontrolled_terminal_norm", terminal_norm(run_nonlinear(pb, s0.y, s0.theta).trajectory.final_state()));
    const double bound = c.cfg.checks.terminal_factor * std::sqrt(E0);
    c.checks.push_back(check("outer_converged", r.converged, static_cast<double>(r.outer_iters),
                             static_cast<double>(c.cfg.outer.max_outer), "outer iterations to convergence"));
    c.checks.push_back(check("outer_monotone", monotone_after_first(r.update_norms), 0.0, 0.0,
                             "update norms nonincreasing after iteration 1"));
    c.checks.push_back(check("terminal_norm", r.terminal_norm <= bound, r.terminal_norm, bound,
                             "re-simulated terminal norm <= factor sqrt(E0)"));
    write_energy(c, ".energy.csv", res.run.energy);
    if (c.dump) {
        dump_controls(c, res.controls, pb.time());
        write_trajectory(c.out.path(".trajectory.lbf"), res.run.trajectory);
        c.out.add(c.out.path(".trajectory.lbf"));
    }
}

void run_large_time(Context& c) {
    const Problem pb = make_problem(c.cfg);
    const State s0 = make_initial_state(c.cfg, pb.solver());
    const TimeGrid tail(c.cfg.large_time.horizon0, c.cfg.large_time.nt0);
    const LargeTimeResult res = with_iterate_dump(c, tail, [&] {
        return large_time_control(pb, s0.y, s0.theta, c.cfg.large_time, c.cfg.penalty, c.cfg.outer,
                                  c.cfg.resolved_weights());
    });
    const LargeTimeReport& r = res.report;
    c.rep.set("E0", r.E0);
    c.rep.set("delta", c.cfg.large_time.delta);
    c.rep.set("t_cross", r.t_cross);
    c.rep.set("t_star_pred", r.t_star_pred);
    c.rep.set("decay.C1", r.C1);
    c.rep.set("decay.C2", r.C2);
    c.rep.set("decay.r_squared", r.r_squared);
    c.rep.set("decay_steps", r.decay_steps);
    c.rep.set("final_norm", r.final_norm);
    add_nonlinear(c.rep, "control.", r.control);
    const double ratio = r.t_star_pred > 0.0 ? r.t_cross / r.t_star_pred : std::numeric_limits<double>::infinity();
    c.rep.set("crossing_ratio", ratio);
    const double f = c.cfg.checks.crossing_factor;
    c.checks.push_back(check("crossing_time", ratio <= f && ratio >= 1.0 / f, ratio, f,
                             "measured / predicted delta-crossing time within the factor"));
    const double bound = c.cfg.checks.final_factor * c.cfg.large_time.delta;
    c.checks.push_back(check("final_norm", r.final_norm <= bound, r.final_norm, bound, "composed final norm <= factor delta"));
    c.checks.push_back(check("outer_converged", r.control.converged, static_cast<double>(r.control.outer_iters),
                             static_cast<double>(c.cfg.outer.max_outer), "outer iterations of the tail"));
    write_energy(c, ".decay.csv", res.decay);
    write_energy(c, ".energy.csv", res.tail.run.energy);
    if (c.dump) {
        dump_controls(c, res.tail.controls, tail);
        write_trajectory(c.out.path(".trajectory.lbf"), res.tail.run.trajectory);
        c.out.add(c.out.path(".trajectory.lbf"));
    }
}

void run_verify(Context& c) {
    const ExperimentConfig& cfg = c.cfg;
    const VerifySpec& v = cfg.verify;
    SystemSpec lin = cfg.system;
    lin.mode = SystemMode::Linearized;
    const Problem pb(cfg.grid(), cfg.time(), lin, cfg.patch);
    const WeightTables tables = eval_weights(cfg.resolved_weights(), build_eta0(pb.grid(), pb.patch()), pb.time());
    const TimeWeights w = control_weights(tables, cfg.penalty);

    std::vector<CheckResult> res(5);
    parallel_for(5, c.opt.jobs, [&](std::size_t i) {
        switch (i) {
            case 0: res[0] = check_duality(pb, v.duality_trials, cfg.seed, v.duality_tol); break;
            case 1:
                res[1] = check_gradient(pb, w, cfg.penalty, v.gradient_directions, v.fd_step, cfg.seed + 1,
                                        v.gradient_tol);
                break;
            case 2: res[2] = check_heating(pb.grid(), v.heating_trials, cfg.seed + 2); break;
            case 3: res[3] = check_mms(cfg.system, v.mms_grids, v.mms_horizon, v.order_lo, v.order_hi); break;
            case 4: res[4] = check_weight_geometry(cfg.weights, pb.grid(), pb.patch(), v.chain_nt); break;
        }
    });
    for (const CheckResult& r : res) {
        c.rep.set("verify." + r.name + ".value", r.value);
        c.rep.set("verify." + r.name + ".detail", r.detail);
        c.checks.push_back(r);
    }
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t chash = config_hash(cfg);
    const std::string stem = std::string(to_string(cfg.kind)) + "-" + hex_hash(chash);
    Artifacts out(opt.out_dir ? *opt.out_dir : std::filesystem::path(cfg.out_dir), stem);

    RunOutcome res;
    Report& rep = res.report;
    rep.set("kind", to_string(cfg.kind));
    rep.set_hash("config_hash", chash);
    rep.set_hash("grid_hash", cfg.grid().hash());
    rep.set_hash("time_hash", cfg.time().hash());
    rep.set("seed", static_cast<std::int64_t>(cfg.seed));
    Context ctx{cfg, opt, out, opt.dump_fields.value_or(cfg.dump_fields), rep, res.checks};
    ctx.log(std::string("running ") + to_string(cfg.kind) + " (" + stem + ")");

    switch (cfg.kind) {
        case ExperimentKind::Simulate: run_simulate(ctx); break;
        case ExperimentKind::Decay: run_decay(ctx); break;
        case ExperimentKind::LinearControl: run_linear_control(ctx); break;
        case ExperimentKind::NonlinearControl: run_nonlinear_control(ctx); break;
        case ExperimentKind::LargeTime: run_large_time(ctx); break;
        case ExperimentKind::Verify: run_verify(ctx); break;
    }

    bool all = true;
    for (const CheckResult& r : res.checks) {
        rep.set("check." + r.name, r.passed);
        all = all && r.passed;
        ctx.log((r.passed ? "  ok    " : "  FAIL  ") + r.name + ": " + r.detail);
    }
    rep.set("checks_passed", all);
    res.exit_code = all ? 0 : 1;
    {
        std::ofstream os = out.open(".config.json");
        os << emit_config(cfg);
    }
    {
        std::ofstream os = out.open(".report.txt");
        rep.write(os);
    }
    res.artifacts = out.written();
    res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.timing_file = out.path(".timing.txt");
    std::ofstream tf(res.timing_file, std::ios::trunc);
    tf << "wall_time_s = " << res.wall_time_s << '\n';
    return res;
}

}  // namespace lbctl
