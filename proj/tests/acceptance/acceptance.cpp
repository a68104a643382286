// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lbctl/errors.hpp"
#include "lbctl/runner.hpp"

using namespace lbctl;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

unsigned jobs() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

fs::path config_path(const char* name) { return fs::path(LBCTL_CONFIG_DIR) / name; }

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Problem linear_problem(std::size_t n, std::size_t nt) {
    SystemSpec spec;
    spec.mode = SystemMode::Linearized;
    return Problem(GridSpec(n, n), TimeGrid(1.0, nt), spec, ControlPatch{});
}

Verdict from_check(const CheckResult& r) { return {r.passed, r.detail}; }

// runs one configured experiment into dir; the outcome is kept for criterion 10
struct Experiment {
    ExperimentConfig cfg;
    RunOutcome out;
};

Experiment run_config(const char* name, const fs::path& dir) {
    Experiment e{parse_config(config_path(name)), {}};
    RunOptions o;
    o.out_dir = dir;
    o.jobs = jobs();
    e.out = run_experiment(e.cfg, o);
    return e;
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    const fs::path out_root = fs::path(LBCTL_ACCEPTANCE_OUT);
    fs::remove_all(out_root);
    const fs::path run_a = out_root / "run_a", run_b = out_root / "run_b";
    std::vector<Experiment> first(4);

    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Verdict()> body;
    };

    const std::vector<Criterion> criteria{
        {1, "adjoint duality", 10.0,
         [] { return from_check(check_duality(linear_problem(16, 64), 10, 2024, 1e-10)); }},
        {2, "gradient check", 30.0,
         [] {
             const Problem pb = linear_problem(16, 64);
             PenaltySpec pen;
             pen.epsilon = 1e-6;
             const WeightTables t = eval_weights(WeightParams{}, build_eta0(pb.grid(), pb.patch()), pb.time());
             return from_check(check_gradient(pb, control_weights(t, pen), pen, 5, 1e-5, 2025, 1e-5));
         }},
        {3, "heating identity", 5.0, [] { return from_check(check_heating(GridSpec(16, 16), 100, 2026)); }},
        {4, "weight geometry", 5.0,
         [] { return from_check(check_weight_geometry(WeightParams{}, GridSpec(32, 32), ControlPatch{}, 256)); }},
        {5, "MMS convergence", 300.0,
         [] {
             SystemSpec spec;
             spec.law = ViscosityLaw::l2(1.0, 0.5);
             spec.heating_on = true;
             return from_check(check_mms(spec, {16, 32, 64}, 0.1, 1.7, 2.3, jobs()));
         }},
        {6, "decay law", 120.0,
         [&] {
             Experiment& e = first[0] = run_config("decay.json", run_a);
             const ExperimentConfig& c = e.cfg;
             const Report& r = e.out.report;
             const bool setup = c.nx == 32 && c.ny == 32 && near(c.horizon, 2.0) && near(c.system.law.nu0, 1.0) &&
                                near(c.system.law.nu1, 0.1) && near(r.number("E0"), 1e-4) &&
                                near(r.number("decay.t_a"), 0.4) && near(r.number("decay.t_b"), 2.0);
             const double c1 = r.number("decay.C1"), r2 = r.number("decay.r_squared");
             const double viol = r.number("phi_violations");
             return Verdict{setup && c1 > 0.0 && r2 >= 0.99 && viol == 0.0,
                            fmt("C1 = %.4g, r^2 = %.6f on [0.4, 2], Phi increases at %g of %g steps", c1, r2, viol,
                                static_cast<double>(c.nt)) +
                                (setup ? "" : " (config does not match the criterion)")};
         }},
        {7, "linear null control", 600.0,
         [&] {
             Experiment& e = first[1] = run_config("linear_control.json", run_a);
             const ExperimentConfig& c = e.cfg;
             const Report& r = e.out.report;
             const bool setup = c.nx == 32 && c.nt == 128 && near(c.horizon, 1.0) && near(c.penalty.epsilon, 1e-6) &&
                                c.penalty.weight_mode == WeightMode::Carleman &&
                                c.eps_sweep == std::vector<double>{1e-2, 1e-4, 1e-6};
             const double ratio = r.number("terminal_norm") / r.number("uncontrolled_terminal_norm");
             double s[3];
             for (int i = 0; i < 3; ++i) s[i] = r.number("sweep." + std::to_string(i + 1) + ".terminal_norm");
             const bool sweep = s[1] <= 1.05 * s[0] && s[2] <= 1.05 * s[1];
             return Verdict{setup && ratio <= 1e-2 && sweep,
                            fmt("terminal ratio %.3e; sweep %.3e, %.3e, %.3e", ratio, s[0], s[1], s[2]) +
                                (setup ? "" : " (config does not match the criterion)")};
         }},
        {8, "nonlinear local null control", 1800.0,
         [&] {
             Experiment& e = first[2] = run_config("nonlinear_control.json", run_a);
             const Report& r = e.out.report;
             const double E0 = r.number("E0");
             const auto iters = static_cast<std::size_t>(r.number("outer_iters"));
             bool mono = true;
             for (std::size_t j = 3; j <= iters; ++j)
                 mono = mono && r.number("update_norm." + std::to_string(j)) <=
                                    r.number("update_norm." + std::to_string(j - 1));
             const bool conv = r.text("converged") == "true" && iters <= 20;
             const double tn = r.number("terminal_norm");
             const bool setup = near(E0, 1e-4);
             return Verdict{setup && conv && mono && tn <= 1e-3 * std::sqrt(E0),
                            fmt("%g outer iterations, monotone %g, terminal %.3e <= %.3e", static_cast<double>(iters),
                                mono ? 1.0 : 0.0, tn, 1e-3 * std::sqrt(E0)) +
                                (setup ? "" : " (config does not match the criterion)")};
         }},
        {9, "large-time pipeline", 2700.0,
         [&] {
             Experiment& e = first[3] = run_config("large_time.json", run_a);
             const Report& r = e.out.report;
             const double delta = r.number("delta");
             const double tc = r.number("t_cross"), ts = r.number("t_star_pred"), fn = r.number("final_norm");
             const bool setup = near(r.number("E0"), 1e-2) && near(delta, 1e-4);
             const bool crossing = ts > 0.0 && tc <= 2.0 * ts && tc >= 0.5 * ts;
             return Verdict{setup && crossing && fn <= 1e-3 * delta,
                            fmt("crossing %.4g vs predicted %.4g, final norm %.3e <= %.3e", tc, ts, fn, 1e-3 * delta) +
                                (setup ? "" : " (config does not match the criterion)")};
         }},
        {10, "determinism", 3000.0,
         [&] {
             static const char* names[] = {"decay.json", "linear_control.json", "nonlinear_control.json",
                                           "large_time.json"};
             std::size_t files = 0, diffs = 0;
             for (int i = 0; i < 4; ++i) {
                 if (first[i].out.artifacts.empty()) return Verdict{false, "criteria 6-9 did not produce artifacts"};
                 const Experiment again = run_config(names[i], run_b);
                 if (again.out.artifacts.size() != first[i].out.artifacts.size()) ++diffs;
                 for (const fs::path& p : first[i].out.artifacts) {
                     ++files;
                     if (slurp(p) != slurp(run_b / p.filename())) ++diffs;
                 }
             }
             return Verdict{diffs == 0 && files > 0, fmt("%g artifacts compared, %g differ", static_cast<double>(files),
                                                         static_cast<double>(diffs))};
         }},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.body();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_s;
        const bool pass = v.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("criterion %2d %s: %s (%s; %.1f s of %.0f s)\n", c.id, pass ? "PASS" : "FAIL", c.name,
                    v.detail.c_str(), secs, c.budget_s);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
