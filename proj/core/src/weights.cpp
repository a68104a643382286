#include "lbctl/weights.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "lbctl/errors.hpp"
#include "lbctl/geometry.hpp"

namespace lbctl {

namespace {

constexpr double kTermCap = 1e300;

// log(e^a - e^b) for b < a
double log_diff_exp(double a, double b) { return a + std::log(-std::expm1(b - a)); }

// s * (e^a - c1 e^b1 - c0 e^b0) / ell^4, i.e. s (c1 alpha-hat + c0 alpha*)
// with c1 + c0 = 1, evaluated without forming the huge intermediate terms.
double combo(double s, double a, double b1, double b0, double c1, double c0, double log_ell4, bool& sat) {
    const double inner = 1.0 - c1 * std::exp(b1 - a) - c0 * std::exp(b0 - a);
    if (inner == 0.0) return 0.0;
    const double log_mag = std::log(s) + a + std::log(std::abs(inner)) - log_ell4;
    if (log_mag > std::log(kTermCap)) {
        sat = true;
        return std::copysign(kTermCap, inner);
    }
    return std::copysign(std::exp(log_mag), inner);
}

std::size_t clip_index(const WeightTables& t, double t_clip) {
    if (!(t_clip > 0.0 && t_clip < t.horizon)) throw DomainError("t_clip must lie in (0, T)");
    const auto k = static_cast<std::size_t>(std::floor(t_clip / t.dt + 1e-9));
    return std::min(k, t.nt - 1);
}

const std::vector<double>& family_log(const WeightTables& t, WeightFamily f) {
    switch (f) {
        case WeightFamily::Rho1: return t.log_rho1;
        case WeightFamily::Rho2: return t.log_rho2;
        case WeightFamily::Rho3: return t.log_rho3;
        case WeightFamily::Mu1: return t.log_mu1;
        case WeightFamily::Mu2: return t.log_mu2;
        case WeightFamily::Mu3: return t.log_mu3;
        case WeightFamily::Kappa: return t.log_kappa;
    }
    return t.log_rho2;
}

}  // namespace

void WeightParams::validate() const {
    if (!(s > 0.0)) throw DomainError("weights: s must be > 0");
    if (!(lambda > 0.0)) throw DomainError("weights: lambda must be > 0");
    if (!(m > 4.0)) throw DomainError("weights: m must be > 4");
    if (!(eta_sup >= 0.0)) throw DomainError("weights: eta_sup must be >= 0");
}

double ell(double t, double horizon) {
    if (!(horizon > 0.0)) throw DomainError("ell: horizon must be positive");
    if (!(t >= 0.0 && t <= horizon)) throw DomainError("ell: t outside [0, T]");
    if (t <= 0.5 * horizon) return 0.25 * horizon * horizon;
    return t * (horizon - t);
}

double exp_capped(double x, bool* saturated) noexcept {
    if (x > kLogCap || x < -kLogCap) {
        if (saturated) *saturated = true;
        x = std::clamp(x, -kLogCap, kLogCap);
    }
    return std::exp(x);
}

bool WeightTables::any_saturated() const noexcept {
    return std::any_of(saturated.begin(), saturated.end(), [](bool b) { return b; });
}

WeightTables eval_weights(const WeightParams& params, const Eta0& eta0, const TimeGrid& tg) {
    params.validate();
    if (params.eta_sup == 0.0) throw DegenerateError("eta_sup = 0: the weights vanish identically");
    const double s = params.s, lam = params.lambda, m = params.m, es = params.eta_sup;
    const double a = 1.25 * lam * m * es;
    const double b0 = lam * m * es;          // eta0 = 0
    const double b1 = lam * (m + 1.0) * es;  // eta0 = eta_sup

    WeightTables w;
    w.params = params;
    w.horizon = tg.horizon();
    w.nt = tg.nt();
    w.dt = tg.dt();

    const std::size_t cells = eta0.cells.values().size();
    w.log_alpha_num.resize(cells);
    w.log_xi_num.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        const double b = lam * (m * es + eta0.cells.values()[c]);
        w.log_alpha_num[c] = log_diff_exp(a, b);
        w.log_xi_num[c] = b;
    }

    const double la_star = log_diff_exp(a, b0);
    const double la_hat = log_diff_exp(a, b1);
    auto resize = [&](std::vector<double>& v) { v.assign(w.nt, 0.0); };
    for (auto* v : {&w.t, &w.log_ell4, &w.log_alpha_star, &w.log_alpha_hat, &w.log_xi_star, &w.log_xi_hat,
                    &w.log_rho, &w.log_rho1, &w.log_rho2, &w.log_rho3, &w.log_mu1, &w.log_mu2, &w.log_mu3,
                    &w.log_kappa})
        resize(*v);
    w.saturated.assign(w.nt, false);

    for (std::size_t k = 0; k < w.nt; ++k) {
        const double t = tg.t(k);
        const double l4 = 4.0 * std::log(ell(t, w.horizon));
        w.t[k] = t;
        w.log_ell4[k] = l4;
        w.log_alpha_star[k] = la_star - l4;
        w.log_alpha_hat[k] = la_hat - l4;
        w.log_xi_star[k] = b0 - l4;
        w.log_xi_hat[k] = b1 - l4;

        bool sat = false;
        const double lxs = w.log_xi_star[k], lxh = w.log_xi_hat[k];
        const double s_astar = combo(s, a, b1, b0, 0.0, 1.0, l4, sat);
        w.log_rho[k] = s_astar - 1.5 * lxs;
        w.log_rho3[k] = s_astar - 0.5 * lxs;
        w.log_rho1[k] = combo(s, a, b1, b0, 2.0, -1.0, l4, sat) - 3.75 * lxh;
        w.log_rho2[k] = combo(s, a, b1, b0, 4.0, -3.0, l4, sat) - 8.0 * lxh;
        const double c87 = combo(s, a, b1, b0, 8.0, -7.0, l4, sat);
        w.log_mu1[k] = c87 - 15.0 * lxh;
        w.log_mu2[k] = c87 - 16.0 * lxh;
        w.log_mu3[k] = c87 - 17.0 * lxh;
        w.log_kappa[k] = combo(s, a, b1, b0, 9.0, -8.0, l4, sat) - 17.0 * lxh;
        for (double v : {w.log_rho[k], w.log_rho1[k], w.log_rho2[k], w.log_rho3[k], w.log_mu1[k], w.log_mu2[k],
                         w.log_mu3[k], w.log_kappa[k]})
            sat = sat || std::abs(v) > kLogCap;
        w.saturated[k] = sat;
    }
    return w;
}

void WeightTables::write_csv(std::ostream& os) const {
    os << "t,log_alpha_star,log_alpha_hat,log_xi_star,log_xi_hat,log_rho,log_rho1,log_rho2,log_rho3,"
          "log_mu1,log_mu2,log_mu3,log_kappa\n";
    char buf[64];
    for (std::size_t k = 0; k < nt; ++k) {
        const double row[] = {t[k],        log_alpha_star[k], log_alpha_hat[k], log_xi_star[k], log_xi_hat[k],
                              log_rho[k],  log_rho1[k],       log_rho2[k],      log_rho3[k],    log_mu1[k],
                              log_mu2[k],  log_mu3[k],        log_kappa[k]};
        for (std::size_t c = 0; c < std::size(row); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", row[c]);
            os << (c ? "," : "") << buf;
        }
        os << '\n';
    }
}

double check_weight_gap(const WeightParams& params) {
    if (!(params.eta_sup > 0.0)) throw DegenerateError("eta_sup = 0: the gap condition cannot hold");
    if (!(params.lambda > 0.0)) throw DomainError("weights: lambda must be > 0");
    // 18 (E - e^{b1}) - 17 (E - e^{b0}) = e^{b0} (e^{c/4} - 18 e^{lam eta} + 17), E = e^{5c/4}
    const double c = params.lambda * params.m * params.eta_sup;
    const double le = params.lambda * params.eta_sup;
    double inner;
    if (c / 4.0 > std::log(DBL_MAX))
        inner = DBL_MAX;
    else
        inner = std::exp(c / 4.0) - 18.0 * std::exp(le) + 17.0;
    if (inner == 0.0) return 0.0;
    const double log_mag = c + std::log(std::abs(inner));
    if (log_mag >= std::log(DBL_MAX)) return std::copysign(DBL_MAX, inner);
    return std::copysign(std::exp(log_mag), inner);
}

double find_min_m(double lambda, double eta_sup) {
    if (!(lambda > 0.0)) throw DomainError("find_min_m: lambda must be > 0");
    if (!(eta_sup > 0.0)) throw DegenerateError("find_min_m: eta_sup must be > 0");
    auto feasible = [&](double m) { return check_weight_gap({1.0, lambda, m, eta_sup}) > 0.0; };
    double lo = 4.0, hi = 1e4;
    if (!feasible(hi)) throw ConvergenceError("find_min_m: no feasible m in (4, 1e4]");
    while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

WeightChainReport check_weight_chain(const WeightTables& w, double t_clip) {
    const std::size_t kc = std::min(clip_index(w, t_clip), w.nt - 2);
    WeightChainReport rep;

    auto dlog = [&](const std::vector<double>& v, std::size_t k) { return (v[k + 1] - v[k - 1]) / (2.0 * w.dt); };

    auto add = [&](const std::string& name, auto&& log_ratio_at) {
        ChainRatio r;
        r.name = name;
        r.sup_log = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k <= kc; ++k) {
            const double lr = log_ratio_at(k);
            if (std::isnan(lr) || lr == std::numeric_limits<double>::infinity()) r.finite = false;
            r.sup_log = std::max(r.sup_log, lr);
        }
        r.sup = r.sup_log == -std::numeric_limits<double>::infinity() ? 0.0 : exp_capped(r.sup_log);
        rep.all_finite = rep.all_finite && r.finite;
        rep.ratios.push_back(r);
    };
    auto log_abs = [](double x) { return std::log(std::abs(x)); };

    add("kappa/mu3", [&](std::size_t k) { return w.log_kappa[k] - w.log_mu3[k]; });
    add("mu3/mu2", [&](std::size_t k) { return w.log_mu3[k] - w.log_mu2[k]; });
    add("mu2/rho2", [&](std::size_t k) { return w.log_mu2[k] - w.log_rho2[k]; });
    add("rho2/rho3", [&](std::size_t k) { return w.log_rho2[k] - w.log_rho3[k]; });
    add("rho3/mu2^2", [&](std::size_t k) { return w.log_rho3[k] - 2.0 * w.log_mu2[k]; });
    add("|d_t mu2|/rho1",
        [&](std::size_t k) { return w.log_mu2[k] - w.log_rho1[k] + log_abs(dlog(w.log_mu2, k)); });
    add("|mu3 d_t mu3|/mu2^2",
        [&](std::size_t k) { return 2.0 * (w.log_mu3[k] - w.log_mu2[k]) + log_abs(dlog(w.log_mu3, k)); });
    // signed ratio: only positive values can violate the bound
    add("d_t kappa/mu3", [&](std::size_t k) {
        const double d = dlog(w.log_kappa, k);
        if (std::isnan(d)) return d;
        return d > 0.0 ? w.log_kappa[k] - w.log_mu3[k] + std::log(d) : -std::numeric_limits<double>::infinity();
    });
    return rep;
}

TimeWeights normalised_weights(const WeightTables& tables, WeightFamily family, double t_clip, bool carleman) {
    TimeWeights out;
    out.w.assign(tables.nt, 1.0);
    if (!carleman) return out;
    const std::size_t kc = clip_index(tables, t_clip);
    const std::vector<double>& lg = family_log(tables, family);
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= kc; ++k) lo = std::min(lo, lg[k]);
    out.log_offset = lo;
    for (std::size_t k = 0; k < tables.nt; ++k) {
        double e = 2.0 * (lg[std::min(k, kc)] - lo);
        if (e > kNormalisedLogCap) {
            e = kNormalisedLogCap;
            out.capped = true;
        }
        out.w[k] = std::exp(e);
    }
    return out;
}

}  // namespace lbctl
