#ifndef PRFLOW_EOS_HPP
#define PRFLOW_EOS_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace prflow::eos {

inline constexpr double kGasConstant = 8.314462618;  // J/(mol K)

// Molar densities are floored at this value before any logarithm is taken,
// so transient solver undershoot cannot produce NaNs. Stored fields are
// never mutated by the floor.
inline constexpr double kDensityFloor = 1e-8;  // mol/m^3

struct ComponentSpec {
  std::string name;
  double T_c = 0.0;    // critical temperature [K]
  double P_c = 0.0;    // critical pressure [Pa]
  double omega = 0.0;  // acentric factor [-]
  double M_w = 0.0;    // molar weight [kg/mol]
  double D = 0.0;      // diffusion coefficient [m^2/s]
};

struct MixtureSpec {
  std::vector<ComponentSpec> components;
  Eigen::MatrixXd k;     // binary energy interaction coefficients (MxM, symmetric)
  Eigen::MatrixXd beta;  // influence-parameter interaction coefficients (MxM, symmetric, zero diagonal)
  double lambda = 1.0;   // convex-split weight on the auxiliary term
  double T = 0.0;        // temperature [K]

  Eigen::Index size() const { return static_cast<Eigen::Index>(components.size()); }

  /// Throws std::invalid_argument when any type invariant is violated.
  void validate() const;
};

/// Per-cell molar density vector n [mol/m^3].
struct Composition {
  Eigen::VectorXd n;

  Composition() = default;
  explicit Composition(Eigen::VectorXd values) : n(std::move(values)) {}
};

struct EosParams {
  double a = 0.0;       // mixture energy parameter [Pa m^6/mol^2]
  double b = 0.0;       // mixture covolume [m^3/mol]
  Eigen::VectorXd a_i;  // per-component energy parameters
  Eigen::VectorXd b_i;  // per-component covolumes
  Eigen::VectorXd m_i;  // per-component slope coefficients
};

struct BulkEnergy {
  double ideal = 0.0;
  double repulsion = 0.0;
  double attraction = 0.0;
  double total() const { return ideal + repulsion + attraction; }
};

struct EnergySplit {
  double convex = 0.0;
  double concave = 0.0;
};

struct MuSplit {
  Eigen::VectorXd convex;
  Eigen::VectorXd concave;
};

/// Pointwise Peng-Robinson thermodynamics for a fixed mixture and temperature.
///
/// All evaluations are pure functions of the molar-density vector; the model
/// itself is immutable after construction, so concurrent evaluation across
/// grid cells is safe.
class EosModel {
 public:
  explicit EosModel(const MixtureSpec& mix);

  /// Test hook: build a model directly from raw (a_i, b_i) parameters,
  /// bypassing the critical-property correlations. Enables analytic limits
  /// (ideal gas via a_i = b_i = 0) that are unreachable through physical
  /// T_c/P_c inputs. The influence matrix defaults to zero.
  static EosModel from_raw(Eigen::VectorXd a_pure, Eigen::VectorXd b_pure,
                           Eigen::MatrixXd k, double T, double lambda = 1.0,
                           Eigen::MatrixXd influence = Eigen::MatrixXd());

  Eigen::Index size() const { return b_pure_.size(); }
  double temperature() const { return T_; }
  double lambda() const { return lambda_; }
  const Eigen::VectorXd& diffusion() const { return D_; }
  const Eigen::VectorXd& molar_weights() const { return Mw_; }
  const Eigen::VectorXd& covolumes() const { return b_pure_; }

  EosParams params(const Eigen::VectorXd& n) const;

  BulkEnergy bulk_energy(const Eigen::VectorXd& n) const;
  Eigen::VectorXd chemical_potential(const Eigen::VectorXd& n) const;
  double pressure(const Eigen::VectorXd& n) const;
  /// Pressure via p = sum_i mu_i n_i - f_b; algebraically identical to
  /// pressure() for homogeneous states.
  double pressure_identity(const Eigen::VectorXd& n) const;

  EnergySplit energy_split(const Eigen::VectorXd& n) const;
  MuSplit chemical_potential_split(const Eigen::VectorXd& n) const;
  Eigen::MatrixXd convex_hessian(const Eigen::VectorXd& n) const;
  /// Diagonal of the auxiliary-term Hessian alone (test hook for the
  /// closed form RT/n_i + RT b_i/(1-b_i n_i) + RT b_i/(1-b_i n_i)^2).
  Eigen::VectorXd auxiliary_hessian_diag(const Eigen::VectorXd& n) const;

  /// Cross influence parameters c_ij [J m^5/mol^2]; constant per run.
  const Eigen::MatrixXd& influence() const { return c_; }

  double mass_density(const Eigen::VectorXd& n) const;

  /// True when n_i > 0 for all i, b(n)*n < 1 and b_i n_i < 1.
  bool feasible(const Eigen::VectorXd& n) const;
  /// Projects n onto the feasible interior, staying a distance of
  /// kFeasibilityMargin from each bound. Returns true when anything moved.
  bool clamp_to_feasible(Eigen::Ref<Eigen::VectorXd> n) const;

  static constexpr double kFeasibilityMargin = 1e-12;

 private:
  EosModel() = default;

  void build_influence(const MixtureSpec& mix);

  double T_ = 0.0;
  double lambda_ = 1.0;
  Eigen::VectorXd a_pure_;   // a_i
  Eigen::VectorXd b_pure_;   // b_i
  Eigen::VectorXd m_;        // m_i
  Eigen::MatrixXd a_cross_;  // sqrt(a_i a_j)(1 - k_ij)
  Eigen::MatrixXd c_;        // influence matrix
  Eigen::VectorXd D_;
  Eigen::VectorXd Mw_;
};

// Spec-level operation surface; thin wrappers over EosModel for callers that
// hold a MixtureSpec. Hot paths should construct one EosModel and reuse it.
EosParams eos_params(const MixtureSpec& mix, const Composition& comp);
BulkEnergy f_bulk(const MixtureSpec& mix, const Composition& comp);
Eigen::VectorXd mu_bulk(const MixtureSpec& mix, const Composition& comp);
double pressure_eos(const MixtureSpec& mix, const Composition& comp);
double pressure_identity(const MixtureSpec& mix, const Composition& comp);
EnergySplit split_energy(const MixtureSpec& mix, const Composition& comp);
MuSplit split_mu(const MixtureSpec& mix, const Composition& comp);
Eigen::MatrixXd hessian_convex(const MixtureSpec& mix, const Composition& comp);
Eigen::MatrixXd influence_matrix(const MixtureSpec& mix);
double mass_density(const MixtureSpec& mix, const Composition& comp);

}  // namespace prflow::eos

#endif  // PRFLOW_EOS_HPP
