#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lbctl/adjoint.hpp"
#include "lbctl/errors.hpp"
#include "lbctl/operators.hpp"

using namespace lbctl;

namespace {

Problem linear_problem(std::size_t n, std::size_t nt, double horizon = 1.0, double coupling = 1.0) {
    SystemSpec spec;
    spec.mode = SystemMode::Linearized;
    spec.nu0_coupling = coupling;
    return Problem(GridSpec(n, n), TimeGrid(horizon, nt), spec, ControlPatch{});
}

}  // namespace

TEST_CASE("adjoint is the transpose of the linearized forward map") {
    Problem pb = linear_problem(16, 64);
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 3; ++trial) {
        LinearInputs x = LinearInputs::random(pb, rng);
        AdjointInputs z = AdjointInputs::random(pb, rng);
        CHECK(duality_defect(pb, x, z) <= 1e-10);
    }
}

TEST_CASE("duality defect detects a wrong adjoint") {
    // forward with one coupling, adjoint pairing taken from a different one
    Problem a = linear_problem(12, 16, 0.5, 1.0);
    Problem b = linear_problem(12, 16, 0.5, 3.0);
    std::mt19937_64 rng(7);
    LinearInputs x = LinearInputs::random(a, rng);
    AdjointInputs z = AdjointInputs::random(a, rng);
    const std::size_t nt = a.time().nt();
    Trajectory tr = run_linearized(a, x.y0, x.theta0, &x.controls, &x.sources);
    AdjointTrajectory good = run_adjoint(a, z.phiT, z.psiT);
    AdjointTrajectory bad = run_adjoint(b, z.phiT, z.psiT);
    const double lhs = ops::l2_inner(tr.states[nt].y, z.phiT) + ops::l2_inner(tr.states[nt].theta, z.psiT);
    auto pair0 = [&](const AdjointTrajectory& adj) {
        double s = ops::l2_inner(x.y0, adj.states[0].phi) + ops::l2_inner(x.theta0, adj.states[0].psi);
        for (std::size_t k = 0; k < nt; ++k)
            s += a.time().dt() *
                 (ops::l2_inner(ops::hadamard(x.controls.v[k], a.chi_faces()), adj.sens_v[k]) +
                  ops::l2_inner(ops::hadamard(x.controls.v0[k], a.chi_cells()), adj.sens_theta[k]) +
                  ops::l2_inner(x.sources.f1[k], adj.sens_v[k]) + ops::l2_inner(x.sources.f2[k], adj.sens_theta[k]));
        return s;
    };
    CHECK(std::abs(lhs - pair0(good)) <= 1e-10 * std::abs(lhs));
    CHECK(std::abs(lhs - pair0(bad)) > 1e-6 * std::abs(lhs));
}

TEST_CASE("duality defect: zero inputs and scaling") {
    Problem pb = linear_problem(12, 16);
    const GridSpec& g = pb.grid();
    LinearInputs x0 = LinearInputs::zeros(g, 16);
    AdjointInputs z0 = AdjointInputs::zeros(g, 16);
    CHECK(duality_defect(pb, x0, z0) == 0.0);
    AdjointTrajectory adj = run_adjoint(pb, VelocityField(g), ScalarField(g));
    for (const AdjointState& s : adj.states) {
        CHECK(ops::max_abs(s.phi) == 0.0);
        CHECK(ops::max_abs(s.psi) == 0.0);
    }
    std::mt19937_64 rng(9);
    LinearInputs x = LinearInputs::random(pb, rng);
    AdjointInputs z = AdjointInputs::random(pb, rng);
    const double d1 = duality_defect(pb, x, z);
    x.y0 *= 1e3;
    x.theta0 *= 1e3;
    for (auto& f : x.controls.v) f *= 1e3;
    for (auto& f : x.controls.v0) f *= 1e3;
    for (auto& f : x.sources.f1) f *= 1e3;
    for (auto& f : x.sources.f2) f *= 1e3;
    CHECK(duality_defect(pb, x, z) <= 1e-10);
    CHECK(d1 <= 1e-10);
}

TEST_CASE("backward heat mode with one-way coupling") {
    const double pi = std::numbers::pi;
    Problem pb = linear_problem(32, 64, 0.05);
    const GridSpec& g = pb.grid();
    ScalarField mode = ScalarField::sample(g, [&](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
    AdjointTrajectory adj = run_adjoint(pb, VelocityField(g), mode);
    for (const AdjointState& s : adj.states) CHECK(ops::max_abs(s.phi) == 0.0);
    // exact discrete factor, then the continuous one within O(h^2) + O(dt)
    const double h = g.hx();
    const double lam = 8.0 / (h * h) * std::pow(std::sin(pi * h / 2), 2);
    const double discrete = std::pow(1.0 + pb.time().dt() * lam, -64.0);
    CHECK(ops::l2_norm(adj.states[0].psi - discrete * mode) <= 1e-12 * ops::l2_norm(mode));
    const double continuous = std::exp(-2 * pi * pi * 0.05);
    CHECK(std::abs(discrete - continuous) / continuous < 2e-2);

    // the velocity adjoint feeds psi, and stays divergence-free
    std::mt19937_64 rng(4);
    AdjointInputs z = AdjointInputs::random(pb, rng);
    AdjointTrajectory full = run_adjoint(pb, z.phiT, ScalarField(g));
    CHECK(ops::l2_norm(full.states[0].psi) > 0.0);
    for (const AdjointState& s : full.states) CHECK(ops::max_abs(ops::div(s.phi)) < 1e-9);
}

TEST_CASE("time reversal of the decoupled heat flow") {
    // with no coupling, forward heat of psi(0) over [0,T] recovers psi(T)
    // within the discretisation error
    const double pi = std::numbers::pi;
    Problem pb = linear_problem(16, 32, 0.02, 0.0);
    const GridSpec& g = pb.grid();
    ScalarField psiT = ScalarField::sample(g, [&](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
    AdjointTrajectory adj = run_adjoint(pb, VelocityField(g), psiT);
    const double decay = ops::l2_norm(adj.states[0].psi) / ops::l2_norm(psiT);
    State fwd = linearized_terminal(pb, VelocityField(g), (1.0 / (decay * decay)) * adj.states[0].psi);
    CHECK(ops::l2_norm(fwd.theta - psiT) < 1e-10 * ops::l2_norm(psiT));
}

TEST_CASE("adjoint rejects mismatched inputs") {
    Problem pb = linear_problem(12, 16);
    AdjointSources bad = AdjointSources::zeros(pb.grid(), 3);
    CHECK_THROWS_AS(run_adjoint(pb, VelocityField(pb.grid()), ScalarField(pb.grid()), &bad), ShapeError);
    CHECK_THROWS_AS(run_adjoint(pb, VelocityField(GridSpec(8, 8)), ScalarField(pb.grid())), ShapeError);
}
