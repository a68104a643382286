#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lbctl/fields.hpp"
#include "lbctl/geometry.hpp"
#include "lbctl/linear_solvers.hpp"
#include "lbctl/viscosity.hpp"

namespace lbctl {

enum class SystemMode { Nonlinear, Linearized };

struct SystemSpec {
    ViscosityLaw law;
    /// Set for the Lp system, whose heat equation diffuses with the law
    /// applied to grad(theta); unset means theta reuses nu(grad y).
    std::optional<ViscosityLaw> law_theta;
    /// Coefficient of the buoyancy force theta e_2.
    double nu0_coupling = 1.0;
    bool heating_on = true;
    SystemMode mode = SystemMode::Nonlinear;
    /// dt <= cfl * min(hx, hy) / max|y|
    double cfl = 0.25;
    /// blow-up when E_k > blowup_factor * E_0
    double blowup_factor = 1e6;
    SolverOptions solver;

    void validate() const;
    std::uint64_t hash() const noexcept;
};

struct State {
    VelocityField y;
    ScalarField theta;
    ScalarField pressure;

    explicit State(const GridSpec& g) : y(g), theta(g), pressure(g) {}
    State(VelocityField y0, ScalarField theta0) : y(std::move(y0)), theta(std::move(theta0)), pressure(y.grid()) {}
};

/// Time-sampled controls; entry k drives the step t_k -> t_{k+1}. Fields are
/// stored on the whole grid and multiplied by the cutoff when applied.
struct ControlTrajectory {
    std::vector<VelocityField> v;
    std::vector<ScalarField> v0;

    static ControlTrajectory zeros(const GridSpec& g, std::size_t nt);
    std::size_t size() const noexcept { return v.size(); }

    ControlTrajectory& axpy(double a, const ControlTrajectory& x);
    ControlTrajectory& operator*=(double a);
};

/// dt * sum_k w_k (<v^k, z^k> + <v0^k, z0^k>); w = nullptr means w_k = 1.
double control_inner(const ControlTrajectory& a, const ControlTrajectory& b, double dt,
                     const std::vector<double>* w = nullptr);

/// Distributed sources, entry k used in the step t_k -> t_{k+1}.
struct SourceTerms {
    std::vector<VelocityField> f1;
    std::vector<ScalarField> f2;

    static SourceTerms zeros(const GridSpec& g, std::size_t nt);
    bool empty() const noexcept { return f1.empty() && f2.empty(); }
};

struct EnergySample {
    double t = 0.0;
    double E = 0.0;
    double Phi = 0.0;
    double grad_y_sq = 0.0;
    double theta_sq = 0.0;
    double grad_theta_sq = 0.0;
};

struct EnergyTrace {
    std::vector<EnergySample> samples;
    void write_csv(std::ostream& os) const;
};

EnergySample energy_sample(const State& s, double t);

struct Trajectory {
    GridSpec grid;
    TimeGrid time;
    std::vector<State> states;  // nt + 1 entries
    std::uint64_t spec_hash = 0;
    std::uint64_t grid_hash = 0;

    const State& final_state() const { return states.back(); }
};

/// Discretisation context shared by every solve of one problem: grids,
/// elliptic solver, and the control cutoff sampled on cells and faces.
class Problem {
public:
    Problem(const GridSpec& grid, const TimeGrid& time, SystemSpec spec, const ControlPatch& patch);

    const GridSpec& grid() const noexcept { return grid_; }
    const TimeGrid& time() const noexcept { return time_; }
    const SystemSpec& spec() const noexcept { return spec_; }
    const ControlPatch& patch() const noexcept { return patch_; }
    const EllipticSolver& solver() const noexcept { return solver_; }
    const VelocityField& chi_faces() const noexcept { return chi_f_; }
    const ScalarField& chi_cells() const noexcept { return chi_c_; }

    /// Same problem on another time grid.
    Problem with_time(const TimeGrid& time) const;

private:
    GridSpec grid_;
    TimeGrid time_;
    SystemSpec spec_;
    ControlPatch patch_;
    EllipticSolver solver_;
    VelocityField chi_f_;
    ScalarField chi_c_;
};

/// Optional per-step inputs (nullptr = zero).
struct StepInputs {
    const VelocityField* v = nullptr;
    const ScalarField* v0 = nullptr;
    const VelocityField* f1 = nullptr;
    const ScalarField* f2 = nullptr;
};

/// One semi-implicit step of the full system: viscosities lagged, diffusion
/// implicit, convection, buoyancy and heating explicit, then projection.
State step_nonlinear(const Problem& pb, const State& s, double dt, const StepInputs& in = {});

/// One step of the linear system with constant diffusion nu0.
State step_linearized(const Problem& pb, const State& s, double dt, const StepInputs& in = {});

struct RunResult {
    Trajectory trajectory;
    EnergyTrace energy;
};

/// Integrates the full system. forcing is an extra body force (used by the
/// manufactured-solution harness).
RunResult run_nonlinear(const Problem& pb, const VelocityField& y0, const ScalarField& theta0,
                        const ControlTrajectory* controls = nullptr, const SourceTerms* forcing = nullptr);

Trajectory run_linearized(const Problem& pb, const VelocityField& y0, const ScalarField& theta0,
                          const ControlTrajectory* controls = nullptr, const SourceTerms* sources = nullptr);

/// Final state of run_linearized without storing the trajectory.
State linearized_terminal(const Problem& pb, const VelocityField& y0, const ScalarField& theta0,
                          const ControlTrajectory* controls = nullptr, const SourceTerms* sources = nullptr);

/// Closed-form manufactured solution y* = A(t) curl(S(x)S(y)),
/// theta* = B(t) sin sin, P* = C(t) cos cos with S = sin^2 on the domain.
struct Manufactured {
    std::function<double(double)> A, dA, B, dB, C;

    static Manufactured steady(double a, double b, double c);
    static Manufactured zero() { return steady(0.0, 0.0, 0.0); }
};

struct MmsReport {
    std::size_t n = 0;
    double h = 0.0;
    double dt = 0.0;
    double l2q_error = 0.0;       // sqrt(sum_k dt (|y-y*|^2 + |theta-theta*|^2)), k = 1..nt
    double terminal_error = 0.0;  // same at t = T
};

MmsReport run_mms(const Problem& pb, const Manufactured& mf);

/// Least-squares slope of log(error) against log(h).
double fit_order(const std::vector<double>& h, const std::vector<double>& err);

/// Samples the manufactured velocity as the exact discrete curl of the
/// stream function (discretely divergence-free) and the temperature.
VelocityField manufactured_velocity(const GridSpec& g, double amplitude);
ScalarField manufactured_theta(const GridSpec& g, double amplitude);

}  // namespace lbctl
