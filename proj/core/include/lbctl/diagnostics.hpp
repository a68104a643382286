#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lbctl/forward.hpp"
#include "lbctl/weights.hpp"

namespace lbctl {

/// Weighted norms of a state/control pair. Every entry uses the time-normalised
/// squared weight of its family; the raw value is entry * exp(2 log_offset) of
/// that family.
struct WeightedNormReport {
    double iint_rho1_sq_state = 0.0;     // int rho1^2 (|y|^2 + |theta|^2)
    double iint_rho2_sq_controls = 0.0;  // int rho2^2 (|v|^2 + |v0|^2)
    double sup_mu1_y = 0.0;              // sup_t int mu1^2 |y|^2
    double iint_mu1_grad_y = 0.0;        // int mu1^2 |grad y|^2
    double sup_mu2_grad_y = 0.0;         // sup_t int mu2^2 |grad y|^2
    double iint_mu2_yt_dy = 0.0;         // int mu2^2 (|y_t|^2 + |Lap y|^2)
    double mu2_theta_t_L32 = 0.0;        // int mu2^2 |theta_t|_{3/2}^2 dt
    double mu2_lap_theta_L32 = 0.0;      // int mu2^2 |Lap theta|_{3/2}^2 dt
    double kappa_control_norms = 0.0;    // total of control_regularity_report
    double log_offset_rho1 = 0.0, log_offset_rho2 = 0.0, log_offset_mu1 = 0.0, log_offset_mu2 = 0.0,
           log_offset_kappa = 0.0;

    bool all_finite() const noexcept;
};

struct ControlRegularityReport {
    double iint_kv_t = 0.0;      // int |(kappa v)_t|^2
    double iint_kv0_t = 0.0;     // int |(kappa v0)_t|^2
    double iint_k_lap_v = 0.0;   // int |kappa Lap v|^2
    double iint_k_lap_v0 = 0.0;  // int |kappa Lap v0|^2
    double sup_kv_h1 = 0.0;      // sup_t |grad (kappa v)|^2
    double sup_kv0_h1 = 0.0;     // sup_t |kappa v0|^2 + |grad (kappa v0)|^2
    double log_offset = 0.0;
    bool saturated = false;

    double total() const noexcept;
    bool all_finite() const noexcept;
};

/// Time derivatives by central differences (one-sided at the ends).
ControlRegularityReport control_regularity_report(const ControlTrajectory& c, const WeightTables& tables,
                                                  double t_clip);

/// traj has nt + 1 states; controls may be empty (no control terms).
WeightedNormReport weighted_norms(const Trajectory& traj, const ControlTrajectory& controls,
                                  const WeightTables& tables, double t_clip);

/// (int |f|^{3/2})^{2/3} by the midpoint rule.
double l32_norm(const ScalarField& f);

struct DecayFit {
    double C1 = 0.0;
    double C2 = 0.0;
    double r_squared = 0.0;
    double t_a = 0.0, t_b = 0.0;
};

/// Least-squares line through (t, ln E) over [t_a, t_b]: C1 = -slope,
/// C2 = exp(intercept) / E(0).
DecayFit decay_fit(const EnergyTrace& trace, double t_a, double t_b);

/// max(0, -ln(delta / (C2 E0)) / C1).
double t_star(const DecayFit& fit, double delta, double E0);

/// Ordered key = value report; numbers are written with 17 significant
/// digits so a read back reproduces them exactly.
class Report {
public:
    void set(const std::string& key, double value);
    void set(const std::string& key, std::int64_t value);
    void set(const std::string& key, std::size_t value) { set(key, static_cast<std::int64_t>(value)); }
    void set(const std::string& key, bool value);
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }
    void set_hash(const std::string& key, std::uint64_t h);

    bool has(const std::string& key) const;
    const std::string& text(const std::string& key) const;
    double number(const std::string& key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

    void write(std::ostream& os) const;
    static Report read(std::istream& is);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string hex_hash(std::uint64_t h);

/// Adds every field of the reports under a prefix.
void add_to_report(Report& r, const WeightedNormReport& w, const std::string& prefix = "weighted.");
void add_to_report(Report& r, const ControlRegularityReport& c, const std::string& prefix = "kappa.");
void add_to_report(Report& r, const DecayFit& f, const std::string& prefix = "decay.");

}  // namespace lbctl
