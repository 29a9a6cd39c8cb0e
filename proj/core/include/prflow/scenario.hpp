#ifndef PRFLOW_SCENARIO_HPP
#define PRFLOW_SCENARIO_HPP

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

#include "prflow/config.hpp"
#include "prflow/eos.hpp"
#include "prflow/grid.hpp"
#include "prflow/stepper.hpp"

namespace prflow::scenario {

enum class ScenarioKind { SquareDroplet, EllipseBubble, TwoBubbles, Custom };
enum class Phase { Gas, Liquid };
enum class OutputFormat { Csv, Vtk, Both };

/// One interface region. extent holds the half-width (square), the two
/// semi-axes (ellipse) or the radius (circle), in meters.
struct Region {
  enum class Shape { Square, Ellipse, Circle };
  Shape shape = Shape::Square;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Vector2d extent = Eigen::Vector2d::Zero();

  /// Signed distance-like measure: positive inside, ~meters near the boundary.
  double inside_distance(double x, double y) const;
};

struct OutputConfig {
  std::filesystem::path directory = "out";
  long snapshot_every = 1;
  OutputFormat format = OutputFormat::Csv;
};

struct ScenarioConfig {
  grid::GridSpec grid;
  eos::MixtureSpec mixture;
  stepper::SolverConfig solver;
  double eta = 0.0;  // shear viscosity [Pa s]
  double xi = 0.0;   // volumetric viscosity [Pa s]
  ScenarioKind kind = ScenarioKind::Custom;
  std::vector<Region> regions;
  Phase inside_phase = Phase::Liquid;
  Eigen::VectorXd n_gas;     // [mol/m^3]
  Eigen::VectorXd n_liquid;  // [mol/m^3]
  double smoothing_cells = 0.0;
  OutputConfig output;

  /// Throws std::invalid_argument / config::ConfigError on violations
  /// (including regions that exceed the domain).
  void validate() const;
};

/// Builds a ScenarioConfig from a parsed table; component properties are
/// resolved through the `mixture.components_file` key (relative paths are
/// taken against base_dir).
ScenarioConfig load_config(const config::Table& table,
                           const std::filesystem::path& base_dir);
ScenarioConfig load_config_file(const std::filesystem::path& path);

/// Loads named components from a component database file.
std::vector<eos::ComponentSpec> load_components(
    const std::filesystem::path& path, const std::vector<std::string>& names);

/// Interface regions carry the inside phase, the rest of the domain the
/// outside phase; u = 0 everywhere.
stepper::SimState build_initial_state(const ScenarioConfig& cfg);

/// Executes the configured run, writing energy.csv and field snapshots under
/// cfg.output.directory. Returns a process exit status (0 on success);
/// partial outputs are retained on failure.
int run(const ScenarioConfig& cfg);

}  // namespace prflow::scenario

#endif  // PRFLOW_SCENARIO_HPP
