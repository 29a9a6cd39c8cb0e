#include "prflow/output.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace prflow::output {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void require_stream(const std::ostream& out, const std::filesystem::path& path) {
  if (!out) throw std::runtime_error("cannot write output file: " + path.string());
}

}  // namespace

void write_energy_header(std::ostream& out, Eigen::Index n_components) {
  out << "step,t,F_bulk,F_grad,F,E,total";
  for (Eigen::Index i = 0; i < n_components; ++i) out << ",moles_" << (i + 1);
  out << "\n";
}

void write_energy_row(std::ostream& out, const diag::EnergyReport& report) {
  out << report.step << ',' << fmt17(report.t) << ',' << fmt17(report.F_bulk) << ','
      << fmt17(report.F_grad) << ',' << fmt17(report.F) << ','
      << fmt17(report.E_kinetic) << ',' << fmt17(report.total);
  for (Eigen::Index i = 0; i < report.moles.size(); ++i) {
    out << ',' << fmt17(report.moles[i]);
  }
  out << "\n";
}

void write_field_csv(const std::filesystem::path& path, const grid::GridSpec& g,
                     const grid::CellField& field) {
  std::ofstream out(path);
  require_stream(out, path);
  out << "x,y,value\n";
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      out << fmt17(g.cell_center_x(i)) << ',' << fmt17(g.cell_center_y(j)) << ','
          << fmt17(field(i, j)) << "\n";
    }
  }
  require_stream(out, path);
}

grid::CellField read_field_csv(const std::filesystem::path& path,
                               const grid::GridSpec& g) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read field file: " + path.string());
  std::string line;
  std::getline(in, line);  // header
  grid::CellField field(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!std::getline(in, line)) {
        throw std::runtime_error("truncated field file: " + path.string());
      }
      const std::size_t c2 = line.rfind(',');
      if (c2 == std::string::npos) {
        throw std::runtime_error("malformed field row in " + path.string());
      }
      field(i, j) = std::stod(line.substr(c2 + 1));
    }
  }
  return field;
}

namespace {

void write_vtk(const std::filesystem::path& path, const grid::GridSpec& g,
               const std::vector<std::pair<std::string, const grid::CellField*>>& fields) {
  std::ofstream out(path);
  require_stream(out, path);
  out << "# vtk DataFile Version 3.0\n";
  out << "prflow fields\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << g.nx << ' ' << g.ny << " 1\n";
  out << "ORIGIN " << fmt17(g.cell_center_x(0)) << ' ' << fmt17(g.cell_center_y(0))
      << " 0\n";
  out << "SPACING " << fmt17(g.hx()) << ' ' << fmt17(g.hy()) << " 1\n";
  out << "POINT_DATA " << g.cells() << "\n";
  for (const auto& [name, field] : fields) {
    out << "SCALARS " << name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        out << fmt17((*field)(i, j)) << "\n";
      }
    }
  }
  require_stream(out, path);
}

}  // namespace

std::filesystem::path write_snapshot(const std::filesystem::path& out_dir,
                                     const grid::GridSpec& g,
                                     const eos::EosModel& model,
                                     const stepper::SimState& state,
                                     SnapshotFormat format) {
  char name[32];
  std::snprintf(name, sizeof(name), "snapshot_%06ld", state.step);
  const std::filesystem::path dir = out_dir / name;
  std::filesystem::create_directories(dir);

  const Eigen::Index m = model.size();

  // mu with the full chemical potential, velocity at centers, pressure
  stepper::Fields mu(static_cast<std::size_t>(m), grid::CellField(g));
  {
    stepper::Fields lap(static_cast<std::size_t>(m));
    for (Eigen::Index jc = 0; jc < m; ++jc) {
      lap[static_cast<std::size_t>(jc)] = grid::div_face_to_cell(
          g, grid::grad_cell_to_face(g, state.n[static_cast<std::size_t>(jc)]));
    }
    const Eigen::MatrixXd& c = model.influence();
    Eigen::VectorXd nc(m);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        for (Eigen::Index ic = 0; ic < m; ++ic) {
          nc[ic] = state.n[static_cast<std::size_t>(ic)](i, j);
        }
        const Eigen::VectorXd mu_b = model.chemical_potential(nc);
        for (Eigen::Index ic = 0; ic < m; ++ic) {
          double grad_term = 0.0;
          for (Eigen::Index jc = 0; jc < m; ++jc) {
            grad_term += c(ic, jc) * lap[static_cast<std::size_t>(jc)](i, j);
          }
          mu[static_cast<std::size_t>(ic)](i, j) = mu_b[ic] - grad_term;
        }
      }
    }
  }
  const auto [ux, uy] = grid::interp_face_to_cell(g, state.u);
  const grid::CellField p = diag::pressure_field(g, model, state.n);

  std::vector<std::pair<std::string, const grid::CellField*>> fields;
  for (Eigen::Index ic = 0; ic < m; ++ic) {
    fields.emplace_back("n_" + std::to_string(ic + 1),
                        &state.n[static_cast<std::size_t>(ic)]);
  }
  for (Eigen::Index ic = 0; ic < m; ++ic) {
    fields.emplace_back("mu_" + std::to_string(ic + 1),
                        &mu[static_cast<std::size_t>(ic)]);
  }
  fields.emplace_back("u_x", &ux);
  fields.emplace_back("u_y", &uy);
  fields.emplace_back("p", &p);

  if (format == SnapshotFormat::Csv || format == SnapshotFormat::Both) {
    for (const auto& [fname, field] : fields) {
      write_field_csv(dir / (fname + ".csv"), g, *field);
    }
  }
  if (format == SnapshotFormat::Vtk || format == SnapshotFormat::Both) {
    write_vtk(dir / "fields.vtk", g, fields);
  }
  return dir;
}

}  // namespace prflow::output
