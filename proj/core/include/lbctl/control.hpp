#pragma once

#include <optional>
#include <vector>

#include "lbctl/adjoint.hpp"
#include "lbctl/errors.hpp"
#include "lbctl/forward.hpp"
#include "lbctl/weights.hpp"

namespace lbctl {

enum class WeightMode { Carleman, Unweighted };

struct PenaltySpec {
    double epsilon = 1e-6;
    WeightMode weight_mode = WeightMode::Carleman;
    /// weights are frozen beyond t_clip; unset means T - 2 dt
    std::optional<double> t_clip;
    /// stop when |g|_{W^-1} <= cg_tol |g_0|_{W^-1}
    double cg_tol = 1e-8;
    std::size_t cg_max_iters = 400;

    void validate(const TimeGrid& tg) const;
    double clip(const TimeGrid& tg) const;
};

struct OuterLoopSpec {
    std::size_t max_outer = 20;
    /// relative control update that ends the loop
    double outer_tol = 1e-6;
    double damping = 1.0;

    void validate() const;
};

/// Time weights of the control cost (the squared rho_2 family, normalised to
/// min 1, or all ones when unweighted). Entry k multiplies control k.
TimeWeights control_weights(const WeightTables& tables, const PenaltySpec& pen);

/// Data of the linear control problem: initial state and sources.
struct LinearData {
    VelocityField y0;
    ScalarField theta0;
    SourceTerms sources;  // empty means zero

    static LinearData from_initial(VelocityField y0, ScalarField theta0) {
        return {std::move(y0), std::move(theta0), {}};
    }
};

/// J = 1/2 int W (|v|^2 + |v0|^2) + 1/(2 eps) (|y(T)|^2 + |theta(T)|^2).
double objective(const Problem& pb, const ControlTrajectory& c, const LinearData& data, const PenaltySpec& pen,
                 const TimeWeights& w);

/// L^2(Q) gradient of objective(): W v + chi a_v, W v0 + chi a_theta, with the
/// adjoint started from the terminal state over eps. One forward and one
/// adjoint solve. The value J is written to *value when requested.
ControlTrajectory gradient(const Problem& pb, const ControlTrajectory& c, const LinearData& data,
                           const PenaltySpec& pen, const TimeWeights& w, double* value = nullptr);

/// dt sum_k w_k (|v^k|^2 + |v0^k|^2): the weighted control energy in units of
/// the normalised weights (multiply by exp(2 log_offset) for the raw value).
double weighted_control_energy(const ControlTrajectory& c, const TimeWeights& w, double dt);

/// Terminal norm sqrt(|y|^2 + |theta|^2).
double terminal_norm(const State& s);

struct LinearControlReport {
    double eps = 0.0;
    double terminal_norm = 0.0;
    double uncontrolled_terminal_norm = 0.0;
    double control_energy_weighted = 0.0;
    double log_weight_offset = 0.0;
    double objective = 0.0;
    double grad_norm_ratio = 0.0;
    std::size_t cg_iters = 0;
    std::vector<double> objective_history;
};

struct LinearControlResult {
    ControlTrajectory controls;
    Trajectory trajectory;
    LinearControlReport report;
};

/// Raised when CG stalls; carries the last iterate for dumping.
class CgStagnation : public ConvergenceError {
public:
    CgStagnation(const std::string& what, ControlTrajectory iterate)
        : ConvergenceError(what), iterate_(std::move(iterate)) {}
    const ControlTrajectory& iterate() const noexcept { return iterate_; }

private:
    ControlTrajectory iterate_;
};

/// Minimises objective() by CG preconditioned with the time weights.
/// warm is the initial guess (zero when null).
LinearControlResult solve_linear_control(const Problem& pb, const LinearData& data, const PenaltySpec& pen,
                                         const TimeWeights& w, const ControlTrajectory* warm = nullptr);

struct NonlinearControlReport {
    std::size_t outer_iters = 0;
    std::size_t cg_iters = 0;
    bool converged = false;
    std::vector<double> update_norms;
    double terminal_norm = 0.0;  // independent nonlinear re-simulation
    double linear_terminal_norm = 0.0;
    double control_energy_weighted = 0.0;
    double log_weight_offset = 0.0;
    double eps = 0.0;
};

struct NonlinearControlResult {
    ControlTrajectory controls;
    RunResult run;  // re-simulation with the synthesized controls
    NonlinearControlReport report;
};

/// Nonlinear and nonlocal terms of the full step along a trajectory, written
/// as sources of the linearized step so that the linear solve with them
/// reproduces run_nonlinear exactly.
SourceTerms nonlinear_sources(const Problem& pb, const Trajectory& traj);

/// Source-term fixed point: the linear control problem is re-solved with the
/// nonlinear terms frozen along the previous iterate. pb must be in nonlinear
/// mode; its linearization uses law.nu0.
NonlinearControlResult solve_nonlinear_control(const Problem& pb, const VelocityField& y0, const ScalarField& theta0,
                                               const PenaltySpec& pen, const OuterLoopSpec& outer,
                                               const TimeWeights& w);

struct LargeTimeSpec {
    double delta = 1e-4;   // smallness target on E
    double horizon0 = 0.5; // control horizon after the crossing
    std::size_t nt0 = 64;
    double max_wait = 20.0;  // cap on the free-decay phase
    double fit_from = 0.2;   // decay fit window starts at fit_from * crossing time
};

struct LargeTimeReport {
    double t_cross = 0.0;      // measured E < delta crossing
    double t_star_pred = 0.0;  // prediction from the fitted constants
    double C1 = 0.0, C2 = 0.0, r_squared = 0.0;
    double E0 = 0.0;
    std::size_t decay_steps = 0;
    double final_norm = 0.0;
    NonlinearControlReport control;
};

struct LargeTimeResult {
    EnergyTrace decay;                // phase 1
    std::vector<State> decay_states;  // phase 1, one per step of pb's dt
    NonlinearControlResult tail;      // phase 2
    LargeTimeReport report;
};

/// Free decay with pb's time step until E < delta, then local control on
/// [t_cross, t_cross + horizon0]. The weights are rebuilt for the tail grid.
LargeTimeResult large_time_control(const Problem& pb, const VelocityField& y0, const ScalarField& theta0,
                                   const LargeTimeSpec& lt, const PenaltySpec& pen, const OuterLoopSpec& outer,
                                   const WeightParams& wp);

}  // namespace lbctl
