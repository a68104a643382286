#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lbctl/control.hpp"
#include "lbctl/forward.hpp"
#include "lbctl/weights.hpp"

namespace lbctl {

enum class ExperimentKind { Simulate, LinearControl, NonlinearControl, Decay, LargeTime, Verify };

const char* to_string(ExperimentKind k) noexcept;
/// Throws ConfigError for an unknown name.
ExperimentKind parse_kind(const std::string& name);

/// Named analytic profile times an amplitude.
///   velocity: zero | curl_sin2 | random      theta: zero | sin_sin | random
struct ProfileSpec {
    std::string name = "zero";
    double amplitude = 0.0;
};

struct InitialData {
    ProfileSpec velocity;
    ProfileSpec theta;
    /// When set, both fields are rescaled together so that E(0) equals it.
    std::optional<double> energy;
};

struct DecaySpec {
    double fit_from = 0.2;  // window [fit_from T, T]
    double r2_min = 0.99;
    /// Phi monotonicity is asserted when E0 <= phi_smallness * nu0^2.
    double phi_smallness = 1e-2;
};

struct VerifySpec {
    std::size_t duality_trials = 10;
    double duality_tol = 1e-10;
    std::size_t gradient_directions = 5;
    double fd_step = 1e-5;
    double gradient_tol = 1e-5;
    std::size_t heating_trials = 100;
    std::vector<std::size_t> mms_grids{16, 32, 64};
    double mms_horizon = 0.1;
    double order_lo = 1.7, order_hi = 2.3;
    std::size_t chain_nt = 256;
};

/// Pass/fail thresholds of the control experiments.
struct ChecksSpec {
    double terminal_ratio = 1e-2;  // linear: |z(T)| <= ratio * uncontrolled
    double sweep_slack = 0.05;     // linear: eps-sweep nonincreasing up to this
    double terminal_factor = 1e-3; // nonlinear: |z(T)| <= factor sqrt(E0)
    double crossing_factor = 2.0;  // large-time: measured/predicted crossing
    double final_factor = 1e-3;    // large-time: |z(T)| <= factor delta
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Simulate;
    std::uint64_t seed = 1;
    std::size_t nx = 32, ny = 32;
    double lx = 1.0, ly = 1.0;
    double horizon = 1.0;
    std::size_t nt = 128;
    SystemSpec system;
    bool auto_m = false;  // replace weights.m by find_min_m(lambda, eta_sup)
    WeightParams weights;
    ControlPatch patch;
    PenaltySpec penalty;
    std::vector<double> eps_sweep;
    OuterLoopSpec outer;
    LargeTimeSpec large_time;
    InitialData initial;
    DecaySpec decay;
    VerifySpec verify;
    ChecksSpec checks;
    std::string out_dir = "out";
    bool dump_fields = false;

    GridSpec grid() const { return GridSpec(nx, ny, lx, ly); }
    TimeGrid time() const { return TimeGrid(horizon, nt); }
    /// Weight parameters after the auto_m substitution.
    WeightParams resolved_weights() const;
};

/// Strict parse: unknown keys, wrong types and invalid values raise
/// ConfigError naming the key path.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Fully resolved config (every default spelled out) as pretty JSON.
std::string emit_config(const ExperimentConfig& cfg);

/// Hash of the resolved config without the output section, so the same
/// experiment written to another directory keeps its fingerprint.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Initial data of the config, deterministic in cfg.seed.
State make_initial_state(const ExperimentConfig& cfg, const EllipticSolver& solver);

}  // namespace lbctl
