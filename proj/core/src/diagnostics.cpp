#include "lbctl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>

#include "lbctl/errors.hpp"
#include "lbctl/operators.hpp"

namespace lbctl {

namespace {

double sq(double x) { return x * x; }

// squared L2 norm by an explicit face/cell loop, independent of ops::l2_inner
double energy(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.values()) s += x * x;
    return s * f.grid().cell_area();
}

double energy(const VelocityField& w) {
    double s = 0.0;
    for (double x : w.u_values()) s += x * x;
    for (double x : w.v_values()) s += x * x;
    return s * w.grid().cell_area();
}

double weight_at(const TimeWeights& w, std::size_t k) { return w.w[std::min(k, w.w.size() - 1)]; }

void check_time(const WeightTables& tables, std::size_t nt) {
    if (tables.nt != nt) throw ShapeError("weights and trajectory use different time grids");
}

}  // namespace

bool WeightedNormReport::all_finite() const noexcept {
    for (double x : {iint_rho1_sq_state, iint_rho2_sq_controls, sup_mu1_y, iint_mu1_grad_y, sup_mu2_grad_y,
                     iint_mu2_yt_dy, mu2_theta_t_L32, mu2_lap_theta_L32, kappa_control_norms})
        if (!std::isfinite(x)) return false;
    return true;
}

double ControlRegularityReport::total() const noexcept {
    return iint_kv_t + iint_kv0_t + iint_k_lap_v + iint_k_lap_v0 + sup_kv_h1 + sup_kv0_h1;
}

bool ControlRegularityReport::all_finite() const noexcept {
    for (double x : {iint_kv_t, iint_kv0_t, iint_k_lap_v, iint_k_lap_v0, sup_kv_h1, sup_kv0_h1})
        if (!std::isfinite(x)) return false;
    return true;
}

double l32_norm(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.values()) s += std::pow(std::abs(x), 1.5);
    return std::pow(s * f.grid().cell_area(), 2.0 / 3.0);
}

ControlRegularityReport control_regularity_report(const ControlTrajectory& c, const WeightTables& tables,
                                                  double t_clip) {
    ControlRegularityReport rep;
    const std::size_t nt = c.size();
    if (nt == 0) return rep;
    if (nt < 2) throw ShapeError("control regularity needs at least two time samples");
    check_time(tables, nt);
    const TimeWeights kw = normalised_weights(tables, WeightFamily::Kappa, t_clip);
    rep.log_offset = kw.log_offset;
    rep.saturated = kw.capped;
    const double dt = tables.dt;
    std::vector<double> kappa(nt);
    for (std::size_t k = 0; k < nt; ++k) kappa[k] = std::sqrt(kw.w[k]);

    for (std::size_t k = 0; k < nt; ++k) {
        const std::size_t a = k == 0 ? 0 : k - 1;
        const std::size_t b = k + 1 == nt ? k : k + 1;
        const double span = static_cast<double>(b - a) * dt;
        VelocityField dv = kappa[b] * c.v[b];
        dv.axpy(-kappa[a], c.v[a]);
        dv *= 1.0 / span;
        ScalarField dv0 = kappa[b] * c.v0[b];
        dv0.axpy(-kappa[a], c.v0[a]);
        dv0 *= 1.0 / span;
        rep.iint_kv_t += dt * energy(dv);
        rep.iint_kv0_t += dt * energy(dv0);
        rep.iint_k_lap_v += dt * kw.w[k] * energy(ops::laplacian(c.v[k]));
        rep.iint_k_lap_v0 += dt * kw.w[k] * energy(ops::laplacian(c.v0[k]));
        rep.sup_kv_h1 = std::max(rep.sup_kv_h1, kw.w[k] * sq(ops::h1_seminorm(c.v[k])));
        rep.sup_kv0_h1 = std::max(rep.sup_kv0_h1, kw.w[k] * (energy(c.v0[k]) + sq(ops::h1_seminorm(c.v0[k]))));
    }
    return rep;
}

WeightedNormReport weighted_norms(const Trajectory& traj, const ControlTrajectory& controls,
                                  const WeightTables& tables, double t_clip) {
    WeightedNormReport rep;
    const std::size_t nt = traj.time.nt();
    if (traj.states.size() != nt + 1) throw ShapeError("trajectory must hold nt + 1 states");
    check_time(tables, nt);
    const double dt = traj.time.dt();
    const TimeWeights r1 = normalised_weights(tables, WeightFamily::Rho1, t_clip);
    const TimeWeights r2 = normalised_weights(tables, WeightFamily::Rho2, t_clip);
    const TimeWeights m1 = normalised_weights(tables, WeightFamily::Mu1, t_clip);
    const TimeWeights m2 = normalised_weights(tables, WeightFamily::Mu2, t_clip);
    rep.log_offset_rho1 = r1.log_offset;
    rep.log_offset_rho2 = r2.log_offset;
    rep.log_offset_mu1 = m1.log_offset;
    rep.log_offset_mu2 = m2.log_offset;

    for (std::size_t k = 0; k <= nt; ++k) {
        const State& s = traj.states[k];
        const double gy = sq(ops::h1_seminorm(s.y));
        rep.sup_mu1_y = std::max(rep.sup_mu1_y, weight_at(m1, k) * energy(s.y));
        rep.sup_mu2_grad_y = std::max(rep.sup_mu2_grad_y, weight_at(m2, k) * gy);
        if (k == 0) continue;
        const State& p = traj.states[k - 1];
        rep.iint_rho1_sq_state += dt * weight_at(r1, k) * (energy(s.y) + energy(s.theta));
        rep.iint_mu1_grad_y += dt * weight_at(m1, k) * gy;
        VelocityField yt = s.y - p.y;
        yt *= 1.0 / dt;
        rep.iint_mu2_yt_dy += dt * weight_at(m2, k) * (energy(yt) + energy(ops::laplacian(s.y)));
        ScalarField tt = s.theta - p.theta;
        tt *= 1.0 / dt;
        rep.mu2_theta_t_L32 += dt * weight_at(m2, k) * sq(l32_norm(tt));
        rep.mu2_lap_theta_L32 += dt * weight_at(m2, k) * sq(l32_norm(ops::laplacian(s.theta)));
    }
    if (controls.size() > 0) {
        if (controls.size() != nt) throw ShapeError("controls and trajectory use different time grids");
        for (std::size_t k = 0; k < nt; ++k)
            rep.iint_rho2_sq_controls += dt * r2.w[k] * (energy(controls.v[k]) + energy(controls.v0[k]));
        ControlRegularityReport cr = control_regularity_report(controls, tables, t_clip);
        rep.kappa_control_norms = cr.total();
        rep.log_offset_kappa = cr.log_offset;
    }
    return rep;
}

DecayFit decay_fit(const EnergyTrace& trace, double t_a, double t_b) {
    if (trace.samples.empty()) throw DegenerateError("empty energy trace");
    if (!(t_b > t_a)) throw DomainError("decay window must have t_b > t_a");
    double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::vector<std::pair<double, double>> pts;
    for (const EnergySample& s : trace.samples) {
        if (s.t < t_a - 1e-12 || s.t > t_b + 1e-12) continue;
        if (!(s.E > 0.0)) throw DegenerateError("energy trace has a non-positive sample in the fit window");
        const double y = std::log(s.E);
        pts.emplace_back(s.t, y);
        n += 1.0;
        sx += s.t;
        sy += y;
        sxx += s.t * s.t;
        sxy += s.t * y;
    }
    if (pts.size() < 2) throw DegenerateError("decay window holds fewer than two samples");
    const double e0 = trace.samples.front().E;
    if (!(e0 > 0.0)) throw DegenerateError("E(0) must be positive");
    const double det = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / det;
    const double icpt = (sy - slope * sx) / n;
    const double mean = sy / n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& [t, y] : pts) {
        ss_res += sq(y - (icpt + slope * t));
        ss_tot += sq(y - mean);
    }
    DecayFit f;
    f.C1 = -slope;
    f.C2 = std::exp(icpt) / e0;
    f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    f.t_a = t_a;
    f.t_b = t_b;
    return f;
}

double t_star(const DecayFit& fit, double delta, double E0) {
    if (!(fit.C1 > 0.0)) throw RegimeError("no decay: fitted C1 must be positive");
    if (!(delta > 0.0) || !(E0 > 0.0) || !(fit.C2 > 0.0)) throw DomainError("t_star needs delta, E0, C2 > 0");
    return std::max(0.0, -std::log(delta / (fit.C2 * E0)) / fit.C1);
}

// ---------------------------------------------------------------------------

std::string hex_hash(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void Report::set(const std::string& key, const std::string& value) {
    if (key.empty() || key.find_first_of(" =\n") != std::string::npos)
        throw DomainError("report key must be non-empty without spaces or '='");
    if (value.find('\n') != std::string::npos) throw DomainError("report values are single-line");
    for (auto& e : entries_)
        if (e.first == key) {
            e.second = value;
            return;
        }
    entries_.emplace_back(key, value);
}

void Report::set(const std::string& key, double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    set(key, std::string(buf));
}

void Report::set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }

void Report::set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

void Report::set_hash(const std::string& key, std::uint64_t h) { set(key, hex_hash(h)); }

bool Report::has(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.first == key) return true;
    return false;
}

const std::string& Report::text(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.first == key) return e.second;
    throw DomainError("report has no key '" + key + "'");
}

double Report::number(const std::string& key) const {
    const std::string& s = text(key);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw DomainError("report key '" + key + "' is not numeric");
    return v;
}

void Report::write(std::ostream& os) const {
    for (const auto& [k, v] : entries_) os << k << " = " << v << '\n';
}

Report Report::read(std::istream& is) {
    Report r;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) throw IoError("malformed report line: " + line);
        r.set(line.substr(0, eq), line.substr(eq + 3));
    }
    return r;
}

void add_to_report(Report& r, const WeightedNormReport& w, const std::string& p) {
    r.set(p + "iint_rho1_sq_state", w.iint_rho1_sq_state);
    r.set(p + "iint_rho2_sq_controls", w.iint_rho2_sq_controls);
    r.set(p + "sup_mu1_y", w.sup_mu1_y);
    r.set(p + "iint_mu1_grad_y", w.iint_mu1_grad_y);
    r.set(p + "sup_mu2_grad_y", w.sup_mu2_grad_y);
    r.set(p + "iint_mu2_yt_dy", w.iint_mu2_yt_dy);
    r.set(p + "mu2_theta_t_L32", w.mu2_theta_t_L32);
    r.set(p + "mu2_lap_theta_L32", w.mu2_lap_theta_L32);
    r.set(p + "kappa_control_norms", w.kappa_control_norms);
    r.set(p + "log_offset_rho1", w.log_offset_rho1);
    r.set(p + "log_offset_rho2", w.log_offset_rho2);
    r.set(p + "log_offset_mu1", w.log_offset_mu1);
    r.set(p + "log_offset_mu2", w.log_offset_mu2);
    r.set(p + "log_offset_kappa", w.log_offset_kappa);
    r.set(p + "all_finite", w.all_finite());
}

void add_to_report(Report& r, const ControlRegularityReport& c, const std::string& p) {
    r.set(p + "iint_kv_t", c.iint_kv_t);
    r.set(p + "iint_kv0_t", c.iint_kv0_t);
    r.set(p + "iint_k_lap_v", c.iint_k_lap_v);
    r.set(p + "iint_k_lap_v0", c.iint_k_lap_v0);
    r.set(p + "sup_kv_h1", c.sup_kv_h1);
    r.set(p + "sup_kv0_h1", c.sup_kv0_h1);
    r.set(p + "log_offset", c.log_offset);
    r.set(p + "saturated", c.saturated);
    r.set(p + "all_finite", c.all_finite());
}

void add_to_report(Report& r, const DecayFit& f, const std::string& p) {
    r.set(p + "C1", f.C1);
    r.set(p + "C2", f.C2);
    r.set(p + "r_squared", f.r_squared);
    r.set(p + "t_a", f.t_a);
    r.set(p + "t_b", f.t_b);
}

}  // namespace lbctl
