#include "lbctl/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "lbctl/adjoint.hpp"
#include "lbctl/operators.hpp"

namespace lbctl {

namespace {

std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

ControlTrajectory random_controls(const GridSpec& g, std::size_t nt, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ControlTrajectory c = ControlTrajectory::zeros(g, nt);
    for (std::size_t k = 0; k < nt; ++k) {
        for (double& x : c.v[k].u_values()) x = u(rng);
        for (double& x : c.v[k].v_values()) x = u(rng);
        c.v[k].clear_boundary();
        for (double& x : c.v0[k].values()) x = u(rng);
    }
    return c;
}

}  // namespace

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& f) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, jobs), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

CheckResult check_duality(const Problem& pb, std::size_t trials, std::uint64_t seed, double tol) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < trials; ++i) {
        const LinearInputs x = LinearInputs::random(pb, rng);
        const AdjointInputs z = AdjointInputs::random(pb, rng);
        worst = std::max(worst, duality_defect(pb, x, z));
    }
    return {"duality", worst <= tol, worst, tol, fmt("max relative defect %.3e over trials", worst)};
}

CheckResult check_gradient(const Problem& pb, const TimeWeights& w, const PenaltySpec& pen, std::size_t directions,
                           double h, std::uint64_t seed, double tol) {
    const GridSpec& g = pb.grid();
    const std::size_t nt = pb.time().nt();
    std::mt19937_64 rng(seed);
    const LinearInputs x = LinearInputs::random(pb, rng);
    const LinearData data = LinearData::from_initial(x.y0, x.theta0);
    const ControlTrajectory c = random_controls(g, nt, rng);
    const ControlTrajectory grad = gradient(pb, c, data, pen, w);
    double worst = 0.0;
    for (std::size_t i = 0; i < directions; ++i) {
        const ControlTrajectory d = random_controls(g, nt, rng);
        ControlTrajectory cp = c, cm = c;
        cp.axpy(h, d);
        cm.axpy(-h, d);
        const double fd = (objective(pb, cp, data, pen, w) - objective(pb, cm, data, pen, w)) / (2.0 * h);
        const double an = control_inner(grad, d, pb.time().dt());
        worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-300));
    }
    return {"gradient", worst <= tol, worst, tol, fmt("max relative error %.3e at h = %.1e", worst, h)};
}

CheckResult check_heating(const GridSpec& g, std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trials; ++i) {
        VelocityField w(g);
        for (double& x : w.u_values()) x = u(rng);
        for (double& x : w.v_values()) x = u(rng);
        w.clear_boundary();
        const ScalarField hw = ops::heating(w);
        for (double x : hw.values()) lo = std::min(lo, x);
    }
    const double cx = 0.5 * g.lx(), cy = 0.5 * g.ly();
    const VelocityField rot = VelocityField::sample(
        g, [&](double, double y) { return -(y - cy); }, [&](double x, double) { return x - cx; });
    const ScalarField hr = ops::heating(rot);
    double rot_max = 0.0;
    for (std::size_t j = 2; j + 2 < g.ny(); ++j)
        for (std::size_t i = 2; i + 2 < g.nx(); ++i) rot_max = std::max(rot_max, std::abs(hr(i, j)));
    const bool ok = lo >= -1e-12 && rot_max == 0.0;
    return {"heating", ok, lo, -1e-12, fmt("min heating %.3e, rotation max %.3e", lo, rot_max)};
}

CheckResult check_mms(const SystemSpec& spec, const std::vector<std::size_t>& grids, double horizon, double order_lo,
                      double order_hi, unsigned jobs) {
    std::vector<double> h(grids.size()), e(grids.size());
    parallel_for(grids.size(), jobs, [&](std::size_t i) {
        const std::size_t n = grids[i];
        const GridSpec g(n, n);
        const std::size_t nt = std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(horizon * n * n)));
        SystemSpec s = spec;
        s.mode = SystemMode::Nonlinear;
        const Problem pb(g, TimeGrid(horizon, nt), s, ControlPatch{});
        Manufactured mf;
        mf.A = [](double t) { return 0.1 + 0.1 * std::cos(3 * t); };
        mf.dA = [](double t) { return -0.3 * std::sin(3 * t); };
        mf.B = [](double t) { return std::exp(-t); };
        mf.dB = [](double t) { return -std::exp(-t); };
        mf.C = [](double t) { return 0.3 * (1 + t); };
        const MmsReport r = run_mms(pb, mf);
        h[i] = r.h;
        e[i] = r.l2q_error;
    });
    const double order = fit_order(h, e);
    std::ostringstream d;
    d << "fitted order " << order << " (errors";
    for (double x : e) d << ' ' << x;
    d << ')';
    return {"mms", order >= order_lo && order <= order_hi, order, order_lo, d.str()};
}

CheckResult check_weight_geometry(const WeightParams& base, const GridSpec& g, const ControlPatch& patch,
                                  std::size_t chain_nt) {
    const Eta0 eta0 = build_eta0(g, patch);
    WeightParams p = base;
    p.eta_sup = eta0.eta_sup;
    p.m = find_min_m(p.lambda, p.eta_sup);
    const double margin = check_weight_gap(p);
    const TimeGrid tg(1.0, chain_nt);
    const WeightTables tables = eval_weights(p, eta0, tg);
    const WeightChainReport chain = check_weight_chain(tables, tg.horizon() - 2.0 * tg.dt());
    const bool ok = margin > 0.0 && chain.all_finite;
    std::string d = fmt("m* = %.6g, gap margin %.3e, chain ", p.m, margin) + (chain.all_finite ? "finite" : "NOT finite");
    return {"weights", ok, p.m, 0.0, d};
}

}  // namespace lbctl
