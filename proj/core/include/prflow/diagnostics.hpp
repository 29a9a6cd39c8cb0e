#ifndef PRFLOW_DIAGNOSTICS_HPP
#define PRFLOW_DIAGNOSTICS_HPP

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "prflow/eos.hpp"
#include "prflow/grid.hpp"
#include "prflow/stepper.hpp"

namespace prflow::diag {

/// Dissipation/conservation ledger for one state snapshot. In 2-D the
/// integrals carry an implicit unit depth, so the energies are J/m.
struct EnergyReport {
  double F_bulk = 0.0;
  double F_grad = 0.0;
  double F = 0.0;
  double E_kinetic = 0.0;
  double total = 0.0;
  Eigen::VectorXd moles;  // per-component total moles (per unit depth)
  double t = 0.0;
  long step = 0;
};

/// F = sum_cells f_b vol + 1/2 sum_ij c_ij <grad n_i, grad n_j>_faces,
/// E = 1/2 sum_faces rho_face u^2 vol. The gradient term uses the same
/// discrete operator as the stepper, which is what makes the discrete
/// dissipation ledger telescope.
EnergyReport compute_energy(const grid::GridSpec& g, const eos::EosModel& model,
                            const stepper::SimState& state);

/// Cell-centered pressure of the inhomogeneous fluid:
/// p = p_b - sum_ij n_i div(c_ij grad n_j) - 1/2 sum_ij c_ij grad n_i . grad n_j.
grid::CellField pressure_field(const grid::GridSpec& g, const eos::EosModel& model,
                               const stepper::Fields& n);

/// Discrete L2 norm over interior faces of
/// sum_i n_i grad mu_i - grad p - sum_ij div(c_ij grad n_i x grad n_j).
/// Diagnostic only; never feeds the stepper.
double driving_force_identity_residual(const grid::GridSpec& g, const eos::EosModel& model,
                      const stepper::Fields& n);

/// Central-difference gradient of a scalar energy callable; the independent
/// oracle used by thermodynamic consistency tests.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& eps);

/// Central-difference Jacobian of a vector-valued callable (per-column eps).
Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, const Eigen::VectorXd& eps);

}  // namespace prflow::diag

#endif  // PRFLOW_DIAGNOSTICS_HPP
