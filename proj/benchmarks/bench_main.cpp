#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "prflow/diagnostics.hpp"
#include "prflow/scenario.hpp"
#include "prflow/stepper.hpp"

using namespace prflow;

namespace {

eos::MixtureSpec ch4_nc10(double T) {
  eos::MixtureSpec mix;
  mix.components = {
      {"CH4", 190.56, 4.599e6, 0.011, 0.016043, 1e-6},
      {"nC10", 617.7, 2.103e6, 0.489, 0.142285, 1e-6},
  };
  mix.k = Eigen::MatrixXd::Zero(2, 2);
  mix.beta = Eigen::MatrixXd::Zero(2, 2);
  mix.beta(0, 1) = mix.beta(1, 0) = 0.5;
  mix.T = T;
  return mix;
}

scenario::ScenarioConfig droplet_config(int n) {
  scenario::ScenarioConfig cfg;
  cfg.grid = {n, n, 2e-8, 2e-8};
  cfg.mixture = ch4_nc10(320.0);
  cfg.solver.dt = 1e-6;
  cfg.solver.n_steps = 1;
  cfg.eta = 0.01;
  cfg.xi = 0.01;
  cfg.kind = scenario::ScenarioKind::SquareDroplet;
  scenario::Region r;
  r.shape = scenario::Region::Shape::Square;
  r.center = Eigen::Vector2d(1e-8, 1e-8);
  r.extent.setConstant(5e-9);
  cfg.regions.push_back(r);
  cfg.inside_phase = scenario::Phase::Liquid;
  cfg.n_gas = Eigen::Vector2d(7133.9, 26.5);
  cfg.n_liquid = Eigen::Vector2d(3513.2, 3814.6);
  cfg.smoothing_cells = 2.0;
  return cfg;
}

}  // namespace

static void BM_ChemicalPotential(benchmark::State& state) {
  const eos::EosModel model(ch4_nc10(320.0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d1(3000.0, 7500.0), d2(30.0, 3800.0);
  Eigen::VectorXd n(2);
  n << d1(rng), d2(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.chemical_potential(n));
  }
}
BENCHMARK(BM_ChemicalPotential);

static void BM_ConvexHessian(benchmark::State& state) {
  const eos::EosModel model(ch4_nc10(320.0));
  Eigen::VectorXd n(2);
  n << 5000.0, 1500.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.convex_hessian(n));
  }
}
BENCHMARK(BM_ConvexHessian);

static void BM_Pressure(benchmark::State& state) {
  const eos::EosModel model(ch4_nc10(320.0));
  Eigen::VectorXd n(2);
  n << 5000.0, 1500.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.pressure(n));
  }
}
BENCHMARK(BM_Pressure);

static void BM_GradDiv(benchmark::State& state) {
  const grid::GridSpec g{static_cast<int>(state.range(0)),
                         static_cast<int>(state.range(0)), 2e-8, 2e-8};
  grid::CellField phi(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      phi(i, j) = std::sin(0.3 * i) * std::cos(0.2 * j);
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid::div_face_to_cell(g, grid::grad_cell_to_face(g, phi)));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GradDiv)->RangeMultiplier(2)->Range(20, 160)->Complexity();

static void BM_AssembleMassSystem(benchmark::State& state) {
  const scenario::ScenarioConfig cfg = droplet_config(40);
  const stepper::Stepper st(cfg.grid, cfg.mixture, cfg.solver, cfg.eta, cfg.xi);
  const stepper::SimState s0 = scenario::build_initial_state(cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(st.assemble_mass_system(s0.n, s0.u, s0.n));
  }
}
BENCHMARK(BM_AssembleMassSystem);

static void BM_FullStep(benchmark::State& state) {
  const scenario::ScenarioConfig cfg = droplet_config(static_cast<int>(state.range(0)));
  const stepper::Stepper st(cfg.grid, cfg.mixture, cfg.solver, cfg.eta, cfg.xi);
  const stepper::SimState s0 = scenario::build_initial_state(cfg);
  for (auto _ : state) {
    stepper::SimState s = s0;
    benchmark::DoNotOptimize(st.step(s));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FullStep)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
