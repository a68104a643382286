#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lbctl/forward.hpp"

namespace lbctl {

struct AdjointState {
    VelocityField phi;
    ScalarField pi;
    ScalarField psi;

    explicit AdjointState(const GridSpec& g) : phi(g), pi(g), psi(g) {}
};

/// Distributed adjoint sources; entry k-1 pairs with the forward state at t_k,
/// k = 1..nt. Empty vectors mean zero.
struct AdjointSources {
    std::vector<VelocityField> g1;
    std::vector<ScalarField> g2;

    static AdjointSources zeros(const GridSpec& g, std::size_t nt);
    bool empty() const noexcept { return g1.empty() && g2.empty(); }
};

/// Backward solution of the discrete transpose of step_linearized.
/// states[k] is the adjoint at t_k. sens_v[k] and sens_theta[k] are the
/// sensitivities of the pairing to the right-hand side of step k -> k+1,
/// i.e. S phi^{k+1} and R psi^{k+1}; control gradients are chi times these.
struct AdjointTrajectory {
    GridSpec grid;
    TimeGrid time;
    std::vector<AdjointState> states;     // nt + 1
    std::vector<VelocityField> sens_v;    // nt
    std::vector<ScalarField> sens_theta;  // nt
};

AdjointTrajectory run_adjoint(const Problem& pb, const VelocityField& phiT, const ScalarField& psiT,
                              const AdjointSources* sources = nullptr);

/// Inputs of the linearized forward map.
struct LinearInputs {
    VelocityField y0;
    ScalarField theta0;
    ControlTrajectory controls;
    SourceTerms sources;

    static LinearInputs zeros(const GridSpec& g, std::size_t nt);
    static LinearInputs random(const Problem& pb, std::mt19937_64& rng);
};

struct AdjointInputs {
    VelocityField phiT;
    ScalarField psiT;
    AdjointSources sources;

    static AdjointInputs zeros(const GridSpec& g, std::size_t nt);
    static AdjointInputs random(const Problem& pb, std::mt19937_64& rng);
};

/// |<A x, z> - <x, A* z>| / (|x| |z|), with A the linearized forward map from
/// (initial data, controls, sources) to (trajectory, terminal state). Zero
/// inputs give 0.
double duality_defect(const Problem& pb, const LinearInputs& x, const AdjointInputs& z);

}  // namespace lbctl
