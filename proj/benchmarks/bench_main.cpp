#include <benchmark/benchmark.h>

#include <random>

#include "lamelab/attractor.hpp"
#include "lamelab/hodge.hpp"
#include "lamelab/poisson.hpp"

using namespace lamelab;

namespace {

ScalarField noise(const GridSpec& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField f(g);
    for (double& v : f.values()) v = u(rng);
    return f;
}

GridSpec grid_for(const benchmark::State& state) {
    const int n = static_cast<int>(state.range(1));
    return state.range(0) == 1 ? GridSpec::line(1.0, n) : GridSpec::square(1.0, n);
}

} // namespace

static void BM_PoissonSineTransform(benchmark::State& state) {
    const GridSpec g = grid_for(state);
    const ScalarField rhs = noise(g, 1);
    for (auto _ : state) benchmark::DoNotOptimize(poisson_solve(rhs));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_PoissonSineTransform)->Args({1, 1023})->Args({2, 63})->Args({2, 127});

static void BM_PoissonConjugateGradient(benchmark::State& state) {
    const GridSpec g = grid_for(state);
    const ScalarField rhs = noise(g, 2);
    PoissonSolverSpec spec;
    spec.method = PoissonSolverSpec::Method::conjugate_gradient;
    spec.tolerance = 1e-10;
    for (auto _ : state) benchmark::DoNotOptimize(poisson_solve(rhs, spec));
}
BENCHMARK(BM_PoissonConjugateGradient)->Args({2, 63})->Args({2, 127});

static void BM_HelmholtzDecompose(benchmark::State& state) {
    const GridSpec g = grid_for(state);
    VectorField u(g);
    for (int i = 0; i < g.dim(); ++i) u[i] = noise(g, 3 + i);
    for (auto _ : state) benchmark::DoNotOptimize(helmholtz_decompose(u));
}
BENCHMARK(BM_HelmholtzDecompose)->Args({2, 63})->Args({2, 127});

/// Cost of 100 steps of the coupled nonlinear scheme.
static void BM_Step(benchmark::State& state) {
    const GridSpec g = grid_for(state);
    ModelSpec m;
    m.f = Nonlinearity::power(1.0, 2.0, 1.0);
    SchemeConfig sc;
    sc.dt = 0.25 * sc.cfl_safety * g.spacing(0);
    sc.dt = 1.0 / std::ceil(1.0 / sc.dt);
    const ForcingSymbol gsym(ForcingSymbol::Kind::time_periodic, first_eigenfunction(g), {1.0});
    const State s0 = random_smooth_state(g, m, 1.0, 4);
    for (auto _ : state) benchmark::DoNotOptimize(evolve(s0, 0.0, 100 * sc.dt, gsym, m, sc));
    state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_Step)->Args({1, 255})->Args({1, 1023})->Args({2, 63})->Unit(benchmark::kMillisecond);

static void BM_HausdorffSemidistance(benchmark::State& state) {
    const GridSpec g = GridSpec::line(1.0, 255);
    const ModelSpec m;
    SnapshotCloud A, B;
    for (int i = 0; i < state.range(0); ++i) {
        A.push(random_smooth_state(g, m, 1.0, 100 + i), m.mu, m.lambda);
        B.push(random_smooth_state(g, m, 1.0, 900 + i), m.mu, m.lambda);
    }
    for (auto _ : state) benchmark::DoNotOptimize(hausdorff_semidist(A, B, m.mu, m.lambda));
}
BENCHMARK(BM_HausdorffSemidistance)->Arg(8)->Arg(24)->Arg(64);

static void BM_ConstantLedger(benchmark::State& state) {
    const GridSpec g = GridSpec::line(1.0, static_cast<int>(state.range(0)));
    LedgerInputs in;
    in.grid = g;
    in.model.f = Nonlinearity::zero(1.0);
    in.q = build_q(g);
    in.g0_lb2_sq = 0.25;
    for (auto _ : state) {
        in.operators = estimate_operator_constants(g);
        benchmark::DoNotOptimize(compute_constants(in));
    }
}
BENCHMARK(BM_ConstantLedger)->Arg(31)->Arg(63)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
