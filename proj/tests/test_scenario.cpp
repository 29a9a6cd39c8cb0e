#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "prflow/diagnostics.hpp"
#include "prflow/output.hpp"
#include "prflow/scenario.hpp"

using namespace prflow;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigDir = PRFLOW_CONFIG_DIR;
const fs::path kTmp = PRFLOW_TEST_TMP;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

scenario::ScenarioConfig example1() {
  return scenario::load_config_file(kConfigDir / "example1.cfg");
}

}  // namespace

TEST_CASE("config parser handles the supported grammar") {
  const std::string text = R"(
# comment
title = "demo"      # trailing comment
[a]
x = 1.5e-3
flag = true
names = ["u", "v"]
mat = [[1.0, 2.0],
       [3.0, 4.0]]
[b]
n = 42
)";
  const config::Table t = config::parse_string(text);
  CHECK(t.get_string("title") == "demo");
  CHECK(t.get_double("a.x") == doctest::Approx(1.5e-3));
  CHECK(t.get("a.flag").as_bool("a.flag"));
  CHECK(t.get("a.names").as_string_array("a.names")[1] == "v");
  const auto m = t.get("a.mat").as_double_matrix("a.mat");
  CHECK(m[1][0] == 3.0);
  CHECK(t.get_int("b.n") == 42);
  CHECK(t.get_double("b.missing", 7.0) == 7.0);

  CHECK_THROWS_AS(config::parse_string("x 3"), config::ConfigError);
  CHECK_THROWS_AS(config::parse_string("x = [1, 2"), config::ConfigError);
  CHECK_THROWS_AS(config::parse_string("x = oops"), config::ConfigError);
}

TEST_CASE("preset example1 pins the reference run parameters") {
  const scenario::ScenarioConfig cfg = example1();
  CHECK(cfg.grid.nx == 40);
  CHECK(cfg.grid.ny == 40);
  CHECK(cfg.grid.lx == doctest::Approx(2e-8));
  CHECK(cfg.mixture.T == 320.0);
  CHECK(cfg.mixture.components[0].name == "CH4");
  CHECK(cfg.mixture.components[1].name == "nC10");
  CHECK(cfg.mixture.components[0].D == doctest::Approx(1e-6));
  CHECK(cfg.solver.dt == doctest::Approx(1e-6));
  CHECK(cfg.solver.n_steps == 45);
  CHECK(cfg.solver.nonlinear_tol == doctest::Approx(1e-3));
  CHECK(cfg.solver.max_nonlinear_iters == 5);
  CHECK(cfg.eta == doctest::Approx(0.01));
  CHECK(cfg.xi == doctest::Approx(0.01));
  CHECK(cfg.n_gas[0] == doctest::Approx(7133.9));
  CHECK(cfg.n_gas[1] == doctest::Approx(26.5));
  CHECK(cfg.n_liquid[0] == doctest::Approx(3513.2));
  CHECK(cfg.n_liquid[1] == doctest::Approx(3814.6));
  CHECK(cfg.kind == scenario::ScenarioKind::SquareDroplet);

  const scenario::ScenarioConfig cfg2 =
      scenario::load_config_file(kConfigDir / "example2.cfg");
  CHECK(cfg2.mixture.T == 330.0);
  CHECK(cfg2.solver.dt == doctest::Approx(1e-5));
  CHECK(cfg2.solver.n_steps == 100);
  CHECK(cfg2.n_gas[0] == doctest::Approx(7618.1));
  CHECK(cfg2.n_liquid[1] == doctest::Approx(3684.3));

  const scenario::ScenarioConfig cfg3 =
      scenario::load_config_file(kConfigDir / "example3.cfg");
  CHECK(cfg3.solver.n_steps == 120);
  CHECK(cfg3.regions.size() == 2);
}

TEST_CASE("scenario validation rejects out-of-domain regions") {
  scenario::ScenarioConfig cfg = example1();
  cfg.regions[0].extent.setConstant(1.5e-8);  // exceeds the 20 nm box
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = example1();
  cfg.xi = 0.001;  // xi <= 2 eta / 3
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("initial state: square droplet puts liquid inside, gas outside") {
  scenario::ScenarioConfig cfg = example1();
  cfg.smoothing_cells = 0.0;  // sharp interface
  const stepper::SimState state = scenario::build_initial_state(cfg);

  // center cell is liquid, corner cell is gas, exactly
  CHECK(state.n[0](20, 20) == 3513.2);
  CHECK(state.n[1](20, 20) == 3814.6);
  CHECK(state.n[0](0, 0) == 7133.9);
  CHECK(state.n[1](0, 0) == 26.5);
  CHECK(state.u.max_abs() == 0.0);
  CHECK(state.t == 0.0);
}

TEST_CASE("initial state: ellipse bubble puts gas inside") {
  scenario::ScenarioConfig cfg =
      scenario::load_config_file(kConfigDir / "example2.cfg");
  cfg.smoothing_cells = 0.0;
  const stepper::SimState state = scenario::build_initial_state(cfg);
  CHECK(state.n[0](20, 20) == 7618.1);  // gas-rich CH4 in the bubble
  CHECK(state.n[0](0, 0) == 3833.6);
}

TEST_CASE("initial state: zero-size region leaves the exterior phase only") {
  for (double smoothing : {0.0, 2.0}) {
    scenario::ScenarioConfig cfg = example1();
    cfg.smoothing_cells = smoothing;
    cfg.regions[0].extent.setZero();
    const stepper::SimState state = scenario::build_initial_state(cfg);
    for (int j = 0; j < cfg.grid.ny; ++j) {
      for (int i = 0; i < cfg.grid.nx; ++i) {
        CHECK(state.n[0](i, j) == 7133.9);
        CHECK(state.n[1](i, j) == 26.5);
      }
    }
  }
}

TEST_CASE("field CSV writer: uniform 2x2 snapshot and full-precision round trip") {
  fs::create_directories(kTmp);
  const grid::GridSpec g{2, 2, 1.0, 1.0};

  grid::CellField f(g, 3.25);
  const fs::path p = kTmp / "uniform.csv";
  output::write_field_csv(p, g, f);
  const std::string text = slurp(p);
  CHECK(text.rfind("x,y,value\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  const grid::CellField back = output::read_field_csv(p, g);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) CHECK(back(i, j) == 3.25);
  }

  // irrational values survive the 17-significant-digit format exactly
  grid::CellField h(g);
  h(0, 0) = 1.0 / 3.0;
  h(1, 0) = std::sqrt(2.0);
  h(0, 1) = -7.123456789012345e-19;
  h(1, 1) = 3513.2000000000003;
  const fs::path q = kTmp / "roundtrip.csv";
  output::write_field_csv(q, g, h);
  const grid::CellField back2 = output::read_field_csv(q, g);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) CHECK(back2(i, j) == h(i, j));
  }
}

TEST_CASE("run: zero steps writes the header, the step-0 row and one snapshot") {
  scenario::ScenarioConfig cfg = example1();
  cfg.solver.n_steps = 0;
  cfg.output.directory = kTmp / "run0";
  fs::remove_all(cfg.output.directory);
  CHECK(scenario::run(cfg) == 0);

  const std::string energy = slurp(cfg.output.directory / "energy.csv");
  CHECK(std::count(energy.begin(), energy.end(), '\n') == 2);
  CHECK(energy.rfind("step,t,F_bulk,F_grad,F,E,total,moles_1,moles_2\n", 0) == 0);
  CHECK(fs::exists(cfg.output.directory / "snapshot_000000" / "n_1.csv"));
  CHECK(fs::exists(cfg.output.directory / "snapshot_000000" / "p.csv"));
  CHECK_FALSE(fs::exists(cfg.output.directory / "snapshot_000001"));

  // snapshot of the initial state reproduces the configured compositions
  const grid::CellField n1 =
      output::read_field_csv(cfg.output.directory / "snapshot_000000" / "n_1.csv",
                             cfg.grid);
  const stepper::SimState state = scenario::build_initial_state(cfg);
  for (int j = 0; j < cfg.grid.ny; ++j) {
    for (int i = 0; i < cfg.grid.nx; ++i) CHECK(n1(i, j) == state.n[0](i, j));
  }
}

TEST_CASE("run: short runs are deterministic and write the VTK bundle on demand") {
  scenario::ScenarioConfig cfg = example1();
  cfg.grid.nx = cfg.grid.ny = 10;
  cfg.regions[0].extent.setConstant(4e-9);
  cfg.solver.n_steps = 2;
  cfg.output.format = scenario::OutputFormat::Both;

  cfg.output.directory = kTmp / "runA";
  fs::remove_all(cfg.output.directory);
  CHECK(scenario::run(cfg) == 0);
  cfg.output.directory = kTmp / "runB";
  fs::remove_all(cfg.output.directory);
  CHECK(scenario::run(cfg) == 0);

  CHECK(slurp(kTmp / "runA" / "energy.csv") == slurp(kTmp / "runB" / "energy.csv"));
  CHECK(slurp(kTmp / "runA" / "snapshot_000002" / "n_2.csv") ==
        slurp(kTmp / "runB" / "snapshot_000002" / "n_2.csv"));

  const std::string vtk = slurp(kTmp / "runA" / "snapshot_000002" / "fields.vtk");
  CHECK(vtk.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
  CHECK(vtk.find("DATASET STRUCTURED_POINTS") != std::string::npos);
  CHECK(vtk.find("SCALARS u_x double 1") != std::string::npos);
  CHECK(vtk.find("SCALARS p double 1") != std::string::npos);
}

TEST_CASE("first step of the square-droplet preset moves fastest at the interface") {
  scenario::ScenarioConfig cfg = example1();
  const stepper::Stepper st(cfg.grid, cfg.mixture, cfg.solver, cfg.eta, cfg.xi);
  stepper::SimState state = scenario::build_initial_state(cfg);
  st.step(state);

  // locate the max velocity magnitude among x-faces and y-faces
  double umax = 0.0;
  double xmax = 0.0, ymax = 0.0;
  for (int j = 0; j < cfg.grid.ny; ++j) {
    for (int i = 0; i <= cfg.grid.nx; ++i) {
      if (std::abs(state.u.x(i, j)) > umax) {
        umax = std::abs(state.u.x(i, j));
        xmax = i * cfg.grid.hx();
        ymax = cfg.grid.cell_center_y(j);
      }
    }
  }
  for (int j = 0; j <= cfg.grid.ny; ++j) {
    for (int i = 0; i < cfg.grid.nx; ++i) {
      if (std::abs(state.u.y(i, j)) > umax) {
        umax = std::abs(state.u.y(i, j));
        xmax = cfg.grid.cell_center_x(i);
        ymax = j * cfg.grid.hy();
      }
    }
  }
  CHECK(umax > 0.0);

  // distance from the initial square boundary (L-inf distance from center = 5 nm)
  const double dx = std::abs(xmax - 1e-8);
  const double dy = std::abs(ymax - 1e-8);
  const double d_interface = std::abs(std::max(dx, dy) - 5e-9);
  CHECK(d_interface <= 3.0 * cfg.grid.hx());
}

TEST_CASE("custom scenario: uniform gas fill and explicit shapes") {
  const std::string base = R"(
[grid]
nx = 8
ny = 8
lx = 2.0e-8
ly = 2.0e-8
[mixture]
components_file = "ch4_nc10.toml"
components = ["CH4", "nC10"]
temperature = 320.0
[solver]
dt = 1.0e-6
n_steps = 0
[physics]
eta = 0.01
xi = 0.01
[scenario]
n_gas = [7133.9, 26.5]
n_liquid = [3513.2, 3814.6]
smoothing_cells = 0.0
)";
  {
    config::Table t = config::parse_string(base + "\n[scenario]\ntype = \"custom\"\n");
    t.set("scenario.type", config::Value(std::string("custom")));
    const scenario::ScenarioConfig cfg = scenario::load_config(t, kConfigDir);
    const stepper::SimState s = scenario::build_initial_state(cfg);
    for (int j = 0; j < 8; ++j) {
      for (int i = 0; i < 8; ++i) CHECK(s.n[0](i, j) == 7133.9);
    }
  }
  {
    config::Table t = config::parse_string(base);
    t.set("scenario.type", config::Value(std::string("custom")));
    t.set("scenario.shape", config::Value(std::string("circle")));
    t.set("scenario.radius", config::Value(6e-9));
    t.set("scenario.inside", config::Value(std::string("gas")));
    const scenario::ScenarioConfig cfg = scenario::load_config(t, kConfigDir);
    CHECK(cfg.inside_phase == scenario::Phase::Gas);
    const stepper::SimState s = scenario::build_initial_state(cfg);
    CHECK(s.n[0](4, 4) == 7133.9);  // gas in the circle
    CHECK(s.n[0](0, 0) == 3513.2);  // liquid outside
  }
}

TEST_CASE("ellipse bubble flow: inward along the long axis, outward along the short") {
  scenario::ScenarioConfig cfg = scenario::load_config_file(kConfigDir / "example2.cfg");
  const stepper::Stepper st(cfg.grid, cfg.mixture, cfg.solver, cfg.eta, cfg.xi);
  stepper::SimState s = scenario::build_initial_state(cfg);
  for (int k = 0; k < 10; ++k) st.step(s);

  const int mid = cfg.grid.nx / 2;
  CHECK(s.u.x(8, mid) > 0.0);    // left side moves toward the center
  CHECK(s.u.x(32, mid) < 0.0);   // right side moves toward the center
  CHECK(s.u.y(mid, 8) < 0.0);    // bottom moves away from the center
  CHECK(s.u.y(mid, 32) > 0.0);   // top moves away from the center
  // the configuration is mirror-symmetric and the discretization keeps it so
  CHECK(s.u.x(8, mid) == doctest::Approx(-s.u.x(32, mid)).epsilon(1e-10));
  CHECK(s.u.y(mid, 8) == doctest::Approx(-s.u.y(mid, 32)).epsilon(1e-10));
}

TEST_CASE("run returns a nonzero status for invalid configurations") {
  scenario::ScenarioConfig cfg = example1();
  cfg.regions[0].extent.setConstant(1.5e-8);  // exceeds the domain
  cfg.output.directory = kTmp / "run_fail";
  CHECK(scenario::run(cfg) == 1);
}
