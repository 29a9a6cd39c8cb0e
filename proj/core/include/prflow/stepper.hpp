#ifndef PRFLOW_STEPPER_HPP
#define PRFLOW_STEPPER_HPP

#include <Eigen/Sparse>

#include <stdexcept>
#include <vector>

#include "prflow/eos.hpp"
#include "prflow/grid.hpp"

namespace prflow::stepper {

struct SolverConfig {
  double dt = 0.0;            // [s]
  long n_steps = 0;
  double nonlinear_tol = 1e-3;    // relative 2-norm change of (n, u)
  int max_nonlinear_iters = 5;
  double linear_tol = 1e-9;       // relative residual for sparse solves
  double lambda = 1.0;            // convex-split weight

  void validate() const;
};

/// All evolved fields plus time bookkeeping.
struct SimState {
  std::vector<grid::CellField> n;  // per-component molar density [mol/m^3]
  grid::FaceField u;               // mass-averaged velocity [m/s]
  double t = 0.0;
  long step = 0;
};

struct StepReport {
  int nonlinear_iters = 0;
  double final_rel_change = 0.0;
  std::vector<double> linear_residuals;  // one per sparse solve, in order
  bool clamped = false;                  // any iterate was projected to feasibility
};

struct LinearSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd rhs;
};

/// The coupled (n, mu) system, posed in increments about the reference
/// vector so that exact fixed points solve to exactly zero: the unknown is
/// x with (n^{k+1,l+1}, mu^{k+1,l+1}) = reference + x. `reference` holds
/// (n^k, mu_ref) in the same per-cell interleaved ordering, where mu_ref is
/// the chemical potential the constraint rows produce at n^{k+1,l+1} = n^k.
struct MassSystem {
  LinearSystem system;
  Eigen::VectorXd reference;

  Eigen::VectorXd recover(const Eigen::VectorXd& x) const { return reference + x; }
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Fields = std::vector<grid::CellField>;

/// Semi-implicit time integrator: per step, the coupled (n, mu) system and
/// the momentum system are solved sequentially inside a mixed
/// Newton/Picard iteration until the combined relative change of (n, u)
/// drops below nonlinear_tol.
class Stepper {
 public:
  Stepper(grid::GridSpec g, const eos::MixtureSpec& mix, SolverConfig cfg,
          double eta, double xi);
  /// Same, but with a prebuilt model (e.g. the raw-parameter hook).
  Stepper(grid::GridSpec g, eos::EosModel model, SolverConfig cfg, double eta,
          double xi);

  /// Advances the state by one time step in place.
  StepReport step(SimState& state) const;

  /// Full chemical potential mu_i = mu_i^b(n) - sum_j div(c_ij grad n_j).
  Fields chemical_potential_field(const Fields& n) const;
  /// Time-split form: convex bulk part at n_new, concave at n_old, gradient
  /// term at n_new.
  Fields chemical_potential_field(const Fields& n_new, const Fields& n_old) const;

  /// J_i = -(D_i n_i / RT) grad mu_i with the mobility face values built from
  /// n_mobility (time level k in the scheme). Boundary normal fluxes are 0.
  std::vector<grid::FaceField> diffusion_flux(const Fields& n_mobility,
                                              const Fields& mu) const;

  /// Coupled system determining (n^{k+1,l+1}, mu^{k+1,l+1}); per-cell
  /// interleaved ordering (n_1..n_M, mu_1..mu_M), lexicographic cells.
  MassSystem assemble_mass_system(const Fields& n_k, const grid::FaceField& u_l,
                                  const Fields& n_l) const;

  /// System in u^{k+1,l+1}: x-face unknowns first, then y-face; boundary
  /// normal faces are pinned to zero.
  LinearSystem assemble_momentum_system(const Fields& n_l, const Fields& mu_next,
                                        const std::vector<grid::FaceField>& flux_next,
                                        const grid::FaceField& u_k,
                                        const grid::FaceField& u_l,
                                        const Fields& n_k) const;

  const eos::EosModel& model() const { return model_; }
  const grid::GridSpec& grid_spec() const { return grid_; }
  const SolverConfig& config() const { return cfg_; }

  /// Test hook: skip the momentum solve and keep u fixed at its current
  /// value, reducing the scheme to the density update alone.
  void set_momentum_enabled(bool enabled) { solve_momentum_ = enabled; }

 private:
  Eigen::VectorXd solve_sparse(const LinearSystem& sys, const char* what,
                               std::vector<double>& residuals) const;
  grid::FaceField face_mobility(const grid::CellField& n_comp, double D) const;

  grid::GridSpec grid_;
  eos::EosModel model_;
  SolverConfig cfg_;
  double eta_;
  double xi_;
  bool solve_momentum_ = true;
};

}  // namespace prflow::stepper

#endif  // PRFLOW_STEPPER_HPP
