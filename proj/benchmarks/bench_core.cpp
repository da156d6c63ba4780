#include <benchmark/benchmark.h>

#include <vector>

#include "reserve_lasso/basis.hpp"
#include "reserve_lasso/bma.hpp"
#include "reserve_lasso/dispersion.hpp"
#include "reserve_lasso/lasso_path.hpp"
#include "reserve_lasso/synthetic.hpp"

namespace rl = reserve_lasso;

namespace {

struct Problem {
    rl::DesignMatrix design;
    std::vector<double> y;
};

Problem make_problem(int side) {
    const auto sim = rl::simulate(rl::preset("dataset1", side), 1);
    return {rl::assemble(rl::build_basis(side), rl::past_cells(side)),
            std::vector<double>(sim.triangle.values().begin(), sim.triangle.values().end())};
}

void BM_Assemble(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const auto basis = rl::build_basis(side);
    const auto cells = rl::past_cells(side);
    for (auto _ : state) benchmark::DoNotOptimize(rl::assemble(basis, cells));
}
BENCHMARK(BM_Assemble)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_FitPath(benchmark::State& state) {
    const auto p = make_problem(static_cast<int>(state.range(0)));
    const auto& x = p.design.values;
    const auto& pen = p.design.penalized();
    const auto path = rl::make_path(rl::lambda_max(x, pen, p.y), static_cast<int>(state.range(1)), 3e-3);
    for (auto _ : state) benchmark::DoNotOptimize(rl::fit_path(x, pen, p.y, path));
}
BENCHMARK(BM_FitPath)->Args({20, 60})->Args({40, 60})->Unit(benchmark::kMillisecond);

void BM_PhiMle(benchmark::State& state) {
    const auto sim = rl::simulate(rl::preset("dataset1", 40), 2);
    const std::vector<double> y(sim.triangle.values().begin(), sim.triangle.values().end());
    for (auto _ : state) benchmark::DoNotOptimize(rl::phi_mle(y, sim.past_means));
}
BENCHMARK(BM_PhiMle);

void BM_Posterior(benchmark::State& state) {
    std::vector<rl::ModelEvidence> models;
    for (int q = 0; q < 100; ++q) models.push_back({q, -1000.0 + 3.0 * q, 0.5 * q});
    for (auto _ : state) benchmark::DoNotOptimize(rl::posterior(models, {rl::PriorFlavor::onese, 2.0}));
}
BENCHMARK(BM_Posterior);

}  // namespace

BENCHMARK_MAIN();
