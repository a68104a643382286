#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "lbctl/fields.hpp"

namespace lbctl {

struct Eta0;

/// Exponent cap used whenever a log-space weight is exponentiated.
inline constexpr double kLogCap = 700.0;

/// Cap on the time-normalised log of the squared control/state weights.
/// Sums of O(1e8) weighted samples then stay finite.
inline constexpr double kNormalisedLogCap = 230.0;

struct WeightParams {
    double s = 1.0;
    double lambda = 1.0;
    double m = 20.0;
    double eta_sup = 1.0;

    void validate() const;
};

/// ell(t) = T^2/4 on [0, T/2] and t(T - t) on (T/2, T].
double ell(double t, double horizon);

/// exp(x) with x clamped to [-kLogCap, kLogCap]; *saturated is set when
/// clamping happened.
double exp_capped(double x, bool* saturated = nullptr) noexcept;

/// Log-space Carleman weights on the nodes t_k, k = 0..nt-1 (t = T is a
/// singularity and is excluded). The space-dependent weights separate as
/// log alpha(x,t) = log A(x) - 4 log ell(t), log xi(x,t) = log X(x) - 4 log ell(t).
///
/// Extrema are attained where eta0 = 0 (alpha*, xi*) and eta0 = eta_sup
/// (alpha-hat, xi-hat). log_rho stores the sup over the domain of rho, which
/// is attained at eta0 = 0.
struct WeightTables {
    WeightParams params;
    double horizon = 1.0;
    std::size_t nt = 0;
    double dt = 0.0;

    std::vector<double> t;
    std::vector<double> log_ell4;
    std::vector<double> log_alpha_star, log_alpha_hat, log_xi_star, log_xi_hat;
    std::vector<double> log_rho, log_rho1, log_rho2, log_rho3;
    std::vector<double> log_mu1, log_mu2, log_mu3, log_kappa;
    /// true where some composite log exceeds kLogCap in magnitude
    std::vector<bool> saturated;

    /// log A(x) and log X(x) at cell centres
    std::vector<double> log_alpha_num, log_xi_num;

    double log_alpha(std::size_t k, std::size_t cell) const noexcept { return log_alpha_num[cell] - log_ell4[k]; }
    double log_xi(std::size_t k, std::size_t cell) const noexcept { return log_xi_num[cell] - log_ell4[k]; }
    bool any_saturated() const noexcept;

    /// CSV with one row per time node.
    void write_csv(std::ostream& os) const;
};

WeightTables eval_weights(const WeightParams& params, const Eta0& eta0, const TimeGrid& tg);

/// (18 alpha-hat - 17 alpha*) * ell^4, which does not depend on t. Values
/// beyond the double range saturate at +-DBL_MAX.
double check_weight_gap(const WeightParams& params);

/// Smallest feasible m in (4, 1e4] to absolute tolerance 1e-3 (bisection).
double find_min_m(double lambda, double eta_sup);

struct ChainRatio {
    std::string name;
    double sup_log = 0.0;  // log of the sup ratio (-inf when the ratio vanishes)
    double sup = 0.0;      // capped value
    bool finite = true;
};

struct WeightChainReport {
    std::vector<ChainRatio> ratios;
    bool all_finite = true;
};

/// Sup over t in [dt, t_clip] of the ordering-chain ratios. Time derivatives
/// use central differences of the log weights: d/dt w = w * d/dt log w.
WeightChainReport check_weight_chain(const WeightTables& tables, double t_clip);

/// Per-step weights for the control cost and the weighted diagnostics:
/// w_k = exp(min(2 (log r(t_min(k,kclip)) - offset), kNormalisedLogCap))
/// where offset = min_k log r. With carleman = false every weight is 1.
struct TimeWeights {
    std::vector<double> w;
    double log_offset = 0.0;
    bool capped = false;
};

enum class WeightFamily { Rho1, Rho2, Rho3, Mu1, Mu2, Mu3, Kappa };

TimeWeights normalised_weights(const WeightTables& tables, WeightFamily family, double t_clip, bool carleman = true);

}  // namespace lbctl
