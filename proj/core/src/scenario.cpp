#include "prflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include "prflow/diagnostics.hpp"
#include "prflow/output.hpp"

namespace prflow::scenario {

namespace {

Eigen::MatrixXd matrix_from_config(const config::Table& t, const std::string& key,
                                   Eigen::Index m, double off_diagonal_default) {
  Eigen::MatrixXd out(m, m);
  if (!t.has(key)) {
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        out(i, j) = i == j ? 0.0 : off_diagonal_default;
      }
    }
    return out;
  }
  const auto rows = t.get(key).as_double_matrix(key);
  if (static_cast<Eigen::Index>(rows.size()) != m) {
    throw config::ConfigError("'" + key + "' must have " + std::to_string(m) + " rows");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != m) {
      throw config::ConfigError("'" + key + "' must be square");
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      out(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return out;
}

Eigen::VectorXd vector_from_config(const config::Table& t, const std::string& key,
                                   Eigen::Index m) {
  const auto vals = t.get(key).as_double_array(key);
  if (static_cast<Eigen::Index>(vals.size()) != m) {
    throw config::ConfigError("'" + key + "' must have " + std::to_string(m) +
                              " entries");
  }
  return Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                           static_cast<Eigen::Index>(vals.size()));
}

Eigen::Vector2d point_from_config(const config::Table& t, const std::string& key) {
  const auto vals = t.get(key).as_double_array(key);
  if (vals.size() != 2) throw config::ConfigError("'" + key + "' must be [x, y]");
  return {vals[0], vals[1]};
}

OutputFormat format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "vtk") return OutputFormat::Vtk;
  if (s == "both") return OutputFormat::Both;
  throw config::ConfigError("unknown output format '" + s + "' (csv|vtk|both)");
}

output::SnapshotFormat to_output(OutputFormat f) {
  switch (f) {
    case OutputFormat::Csv: return output::SnapshotFormat::Csv;
    case OutputFormat::Vtk: return output::SnapshotFormat::Vtk;
    default: return output::SnapshotFormat::Both;
  }
}

}  // namespace

double Region::inside_distance(double x, double y) const {
  const double dx = x - center.x();
  const double dy = y - center.y();
  switch (shape) {
    case Shape::Square:
      return extent.x() - std::max(std::abs(dx), std::abs(dy));
    case Shape::Circle:
      return extent.x() - std::hypot(dx, dy);
    case Shape::Ellipse: {
      const double r = std::hypot(dx / extent.x(), dy / extent.y());
      return (1.0 - r) * std::min(extent.x(), extent.y());
    }
  }
  return 0.0;
}

void ScenarioConfig::validate() const {
  grid.validate();
  mixture.validate();
  solver.validate();
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(xi > 2.0 / 3.0 * eta)) throw std::invalid_argument("xi must exceed 2*eta/3");
  const Eigen::Index m = mixture.size();
  if (n_gas.size() != m || n_liquid.size() != m) {
    throw std::invalid_argument("phase compositions must have one entry per component");
  }
  if ((n_gas.array() <= 0.0).any() || (n_liquid.array() <= 0.0).any()) {
    throw std::invalid_argument("phase compositions must be positive");
  }
  if (smoothing_cells < 0.0) {
    throw std::invalid_argument("smoothing width must be non-negative");
  }
  for (const Region& r : regions) {
    double rx = r.extent.x();
    double ry = r.shape == Region::Shape::Ellipse ? r.extent.y() : r.extent.x();
    if (rx < 0.0 || ry < 0.0) throw std::invalid_argument("region extent must be non-negative");
    if (r.center.x() - rx < 0.0 || r.center.x() + rx > grid.lx ||
        r.center.y() - ry < 0.0 || r.center.y() + ry > grid.ly) {
      throw std::invalid_argument("region exceeds the domain");
    }
  }
  const eos::EosModel model(mixture);
  if (!model.feasible(n_gas) || !model.feasible(n_liquid)) {
    throw std::invalid_argument("phase compositions violate the covolume constraint");
  }
}

std::vector<eos::ComponentSpec> load_components(
    const std::filesystem::path& path, const std::vector<std::string>& names) {
  const config::Table t = config::parse_file(path);
  std::vector<eos::ComponentSpec> out;
  out.reserve(names.size());
  for (const std::string& name : names) {
    eos::ComponentSpec c;
    c.name = name;
    c.T_c = t.get_double(name + ".T_c");
    c.P_c = t.get_double(name + ".P_c");
    c.omega = t.get_double(name + ".omega");
    c.M_w = t.get_double(name + ".M_w");
    c.D = t.get_double(name + ".D");
    out.push_back(std::move(c));
  }
  return out;
}

ScenarioConfig load_config(const config::Table& t,
                           const std::filesystem::path& base_dir) {
  ScenarioConfig cfg;

  cfg.grid.nx = static_cast<int>(t.get_int("grid.nx"));
  cfg.grid.ny = static_cast<int>(t.get_int("grid.ny"));
  cfg.grid.lx = t.get_double("grid.lx");
  cfg.grid.ly = t.get_double("grid.ly");

  const auto names = t.get("mixture.components").as_string_array("mixture.components");
  std::filesystem::path comp_file = t.get_string("mixture.components_file");
  if (comp_file.is_relative()) comp_file = base_dir / comp_file;
  cfg.mixture.components = load_components(comp_file, names);
  const Eigen::Index m = cfg.mixture.size();
  cfg.mixture.T = t.get_double("mixture.temperature");
  cfg.mixture.k = matrix_from_config(t, "mixture.k", m, 0.0);
  cfg.mixture.beta = matrix_from_config(t, "mixture.beta", m, 0.5);
  cfg.mixture.lambda = t.get_double("mixture.lambda", 1.0);

  cfg.solver.dt = t.get_double("solver.dt");
  cfg.solver.n_steps = t.get_int("solver.n_steps");
  cfg.solver.nonlinear_tol = t.get_double("solver.nonlinear_tol", 1e-3);
  cfg.solver.max_nonlinear_iters =
      static_cast<int>(t.get_int("solver.max_nonlinear_iters", 5));
  cfg.solver.linear_tol = t.get_double("solver.linear_tol", 1e-9);
  cfg.solver.lambda = cfg.mixture.lambda;

  cfg.eta = t.get_double("physics.eta");
  cfg.xi = t.get_double("physics.xi");

  const std::string kind = t.get_string("scenario.type");
  cfg.n_gas = vector_from_config(t, "scenario.n_gas", m);
  cfg.n_liquid = vector_from_config(t, "scenario.n_liquid", m);
  cfg.smoothing_cells = t.get_double("scenario.smoothing_cells", 2.0);

  const Eigen::Vector2d domain_center(0.5 * cfg.grid.lx, 0.5 * cfg.grid.ly);
  if (kind == "square_droplet") {
    cfg.kind = ScenarioKind::SquareDroplet;
    cfg.inside_phase = Phase::Liquid;
    Region r;
    r.shape = Region::Shape::Square;
    r.center = t.has("scenario.center") ? point_from_config(t, "scenario.center")
                                        : domain_center;
    r.extent.setConstant(t.get_double("scenario.half_width"));
    cfg.regions.push_back(r);
  } else if (kind == "ellipse_bubble") {
    cfg.kind = ScenarioKind::EllipseBubble;
    cfg.inside_phase = Phase::Gas;
    Region r;
    r.shape = Region::Shape::Ellipse;
    r.center = t.has("scenario.center") ? point_from_config(t, "scenario.center")
                                        : domain_center;
    r.extent = point_from_config(t, "scenario.semi_axes");
    cfg.regions.push_back(r);
  } else if (kind == "two_bubbles") {
    cfg.kind = ScenarioKind::TwoBubbles;
    cfg.inside_phase = Phase::Gas;
    const auto centers = t.get("scenario.centers").as_double_matrix("scenario.centers");
    const double radius = t.get_double("scenario.radius");
    for (const auto& c : centers) {
      if (c.size() != 2) throw config::ConfigError("'scenario.centers' rows must be [x, y]");
      Region r;
      r.shape = Region::Shape::Circle;
      r.center = Eigen::Vector2d(c[0], c[1]);
      r.extent.setConstant(radius);
      cfg.regions.push_back(r);
    }
  } else if (kind == "custom") {
    cfg.kind = ScenarioKind::Custom;
    const std::string inside = t.get_string("scenario.inside", "liquid");
    if (inside == "gas") {
      cfg.inside_phase = Phase::Gas;
    } else if (inside == "liquid") {
      cfg.inside_phase = Phase::Liquid;
    } else {
      throw config::ConfigError("'scenario.inside' must be gas or liquid");
    }
    if (t.has("scenario.shape")) {
      const std::string shape = t.get_string("scenario.shape");
      Region r;
      r.center = t.has("scenario.center") ? point_from_config(t, "scenario.center")
                                          : domain_center;
      if (shape == "square") {
        r.shape = Region::Shape::Square;
        r.extent.setConstant(t.get_double("scenario.half_width"));
      } else if (shape == "ellipse") {
        r.shape = Region::Shape::Ellipse;
        r.extent = point_from_config(t, "scenario.semi_axes");
      } else if (shape == "circle") {
        r.shape = Region::Shape::Circle;
        r.extent.setConstant(t.get_double("scenario.radius"));
      } else {
        throw config::ConfigError("unknown scenario shape '" + shape + "'");
      }
      cfg.regions.push_back(r);
    }
  } else {
    throw config::ConfigError("unknown scenario type '" + kind + "'");
  }

  if (t.has("output.directory")) {
    std::filesystem::path dir = t.get_string("output.directory");
    cfg.output.directory = dir;
  }
  cfg.output.snapshot_every = t.get_int("output.snapshot_every", 1);
  cfg.output.format = format_from_string(t.get_string("output.format", "csv"));
  if (cfg.output.snapshot_every < 1) {
    throw config::ConfigError("'output.snapshot_every' must be >= 1");
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig load_config_file(const std::filesystem::path& path) {
  const config::Table t = config::parse_file(path);
  return load_config(t, path.has_parent_path() ? path.parent_path()
                                               : std::filesystem::path("."));
}

stepper::SimState build_initial_state(const ScenarioConfig& cfg) {
  cfg.validate();
  const Eigen::Index m = cfg.mixture.size();
  const Eigen::VectorXd& n_in =
      cfg.inside_phase == Phase::Liquid ? cfg.n_liquid : cfg.n_gas;
  const Eigen::VectorXd& n_out =
      cfg.inside_phase == Phase::Liquid ? cfg.n_gas : cfg.n_liquid;

  stepper::SimState state;
  state.n.assign(static_cast<std::size_t>(m), grid::CellField(cfg.grid));
  state.u = grid::FaceField(cfg.grid);

  const double w = cfg.smoothing_cells * 0.5 * (cfg.grid.hx() + cfg.grid.hy());
  for (int j = 0; j < cfg.grid.ny; ++j) {
    for (int i = 0; i < cfg.grid.nx; ++i) {
      const double x = cfg.grid.cell_center_x(i);
      const double y = cfg.grid.cell_center_y(j);
      double d = -std::numeric_limits<double>::infinity();
      bool any = false;
      for (const Region& r : cfg.regions) {
        if (r.extent.minCoeff() <= 0.0) continue;  // zero-size region holds no phase
        d = std::max(d, r.inside_distance(x, y));
        any = true;
      }
      double frac;  // fraction of the inside phase
      if (!any) {
        frac = 0.0;
      } else if (w > 0.0) {
        frac = 0.5 * (1.0 + std::tanh(2.0 * d / w));
      } else {
        frac = d > 0.0 ? 1.0 : 0.0;
      }
      for (Eigen::Index ic = 0; ic < m; ++ic) {
        state.n[static_cast<std::size_t>(ic)](i, j) =
            n_out[ic] + frac * (n_in[ic] - n_out[ic]);
      }
    }
  }
  return state;
}

int run(const ScenarioConfig& cfg) {
  try {
    cfg.validate();
    std::filesystem::create_directories(cfg.output.directory);

    const stepper::Stepper stepper(cfg.grid, cfg.mixture, cfg.solver, cfg.eta, cfg.xi);
    stepper::SimState state = build_initial_state(cfg);

    std::ofstream energy(cfg.output.directory / "energy.csv");
    if (!energy) {
      throw std::runtime_error("cannot open " +
                               (cfg.output.directory / "energy.csv").string());
    }
    const eos::EosModel& model = stepper.model();
    output::write_energy_header(energy, model.size());
    output::write_energy_row(energy, diag::compute_energy(cfg.grid, model, state));
    energy.flush();
    output::write_snapshot(cfg.output.directory, cfg.grid, model, state,
                           to_output(cfg.output.format));

    for (long k = 1; k <= cfg.solver.n_steps; ++k) {
      const stepper::StepReport rep = stepper.step(state);
      output::write_energy_row(energy, diag::compute_energy(cfg.grid, model, state));
      energy.flush();
      if (k % cfg.output.snapshot_every == 0 || k == cfg.solver.n_steps) {
        output::write_snapshot(cfg.output.directory, cfg.grid, model, state,
                               to_output(cfg.output.format));
      }
      if (rep.clamped) {
        std::cerr << "step " << k << ": iterate clamped to the feasible region\n";
      }
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace prflow::scenario
