#include <benchmark/benchmark.h>

#include <random>

#include "lbctl/adjoint.hpp"
#include "lbctl/control.hpp"
#include "lbctl/operators.hpp"

using namespace lbctl;

namespace {

VelocityField random_velocity(const GridSpec& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VelocityField w(g);
    for (double& x : w.u_values()) x = u(rng);
    for (double& x : w.v_values()) x = u(rng);
    w.clear_boundary();
    return w;
}

ScalarField random_scalar(const GridSpec& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField f(g);
    for (double& x : f.values()) x = u(rng);
    return f;
}

SolverOptions backend(int b) {
    SolverOptions o;
    o.backend = b == 0 ? SolverBackend::Spectral : SolverBackend::Pcg;
    return o;
}

Problem problem(std::size_t n, std::size_t nt, SystemMode mode) {
    SystemSpec spec;
    spec.mode = mode;
    spec.law = ViscosityLaw::l2(1.0, 0.1);
    return Problem(GridSpec(n, n), TimeGrid(0.1, nt), spec, ControlPatch{});
}

}  // namespace

static void BM_Helmholtz(benchmark::State& state) {
    const GridSpec g(state.range(0), state.range(0));
    const EllipticSolver es(g, backend(static_cast<int>(state.range(1))));
    std::mt19937_64 rng(1);
    const ScalarField b = random_scalar(g, rng);
    for (auto _ : state) benchmark::DoNotOptimize(es.helmholtz(b, 1e-3));
}
BENCHMARK(BM_Helmholtz)->ArgsProduct({{32, 64, 128}, {0, 1}})->Unit(benchmark::kMicrosecond);

static void BM_Projection(benchmark::State& state) {
    const GridSpec g(state.range(0), state.range(0));
    const EllipticSolver es(g, backend(static_cast<int>(state.range(1))));
    std::mt19937_64 rng(2);
    const VelocityField w = random_velocity(g, rng);
    for (auto _ : state) benchmark::DoNotOptimize(es.project(w));
}
BENCHMARK(BM_Projection)->ArgsProduct({{32, 64, 128}, {0, 1}})->Unit(benchmark::kMicrosecond);

static void BM_StokesStep(benchmark::State& state) {
    const GridSpec g(state.range(0), state.range(0));
    const EllipticSolver es(g, SolverOptions{});
    std::mt19937_64 rng(3);
    const VelocityField b = random_velocity(g, rng);
    for (auto _ : state) benchmark::DoNotOptimize(es.stokes(b, 1e-3));
}
BENCHMARK(BM_StokesStep)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

static void BM_Heating(benchmark::State& state) {
    const GridSpec g(state.range(0), state.range(0));
    std::mt19937_64 rng(4);
    const VelocityField w = random_velocity(g, rng);
    for (auto _ : state) benchmark::DoNotOptimize(ops::heating(w));
}
BENCHMARK(BM_Heating)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

static void BM_NonlinearStep(benchmark::State& state) {
    const Problem pb = problem(state.range(0), 64, SystemMode::Nonlinear);
    const State s(0.01 * manufactured_velocity(pb.grid(), 1.0), manufactured_theta(pb.grid(), 0.01));
    for (auto _ : state) benchmark::DoNotOptimize(step_nonlinear(pb, s, pb.time().dt()));
}
BENCHMARK(BM_NonlinearStep)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

static void BM_AdjointSweep(benchmark::State& state) {
    const Problem pb = problem(state.range(0), 64, SystemMode::Linearized);
    std::mt19937_64 rng(5);
    const AdjointInputs z = AdjointInputs::random(pb, rng);
    for (auto _ : state) benchmark::DoNotOptimize(run_adjoint(pb, z.phiT, z.psiT));
}
BENCHMARK(BM_AdjointSweep)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_ReducedGradient(benchmark::State& state) {
    const Problem pb = problem(state.range(0), 64, SystemMode::Linearized);
    PenaltySpec pen;
    const WeightTables t = eval_weights(WeightParams{}, build_eta0(pb.grid(), pb.patch()), pb.time());
    const TimeWeights w = control_weights(t, pen);
    const LinearData d = LinearData::from_initial(VelocityField(pb.grid()), manufactured_theta(pb.grid(), 0.1));
    const ControlTrajectory c = ControlTrajectory::zeros(pb.grid(), 64);
    for (auto _ : state) benchmark::DoNotOptimize(gradient(pb, c, d, pen, w));
}
BENCHMARK(BM_ReducedGradient)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
