#ifndef PRFLOW_OUTPUT_HPP
#define PRFLOW_OUTPUT_HPP

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "prflow/diagnostics.hpp"
#include "prflow/eos.hpp"
#include "prflow/grid.hpp"
#include "prflow/stepper.hpp"

namespace prflow::output {

enum class SnapshotFormat { Csv, Vtk, Both };

/// energy.csv schema: step,t,F_bulk,F_grad,F,E,total,moles_1..moles_M.
void write_energy_header(std::ostream& out, Eigen::Index n_components);
void write_energy_row(std::ostream& out, const diag::EnergyReport& report);

/// Writes one snapshot directory `snapshot_XXXXXX` under out_dir containing
/// one CSV per field (n_i, mu_i, cell-interpolated u_x/u_y, p) and/or a
/// legacy-VTK structured-points file bundling all fields. Returns the
/// snapshot directory.
std::filesystem::path write_snapshot(const std::filesystem::path& out_dir,
                                     const grid::GridSpec& g,
                                     const eos::EosModel& model,
                                     const stepper::SimState& state,
                                     SnapshotFormat format);

/// CSV schema used for every field file: header "x,y,value", row-major
/// cell-center rows, 17 significant digits.
void write_field_csv(const std::filesystem::path& path, const grid::GridSpec& g,
                     const grid::CellField& field);
grid::CellField read_field_csv(const std::filesystem::path& path,
                               const grid::GridSpec& g);

}  // namespace prflow::output

#endif  // PRFLOW_OUTPUT_HPP
