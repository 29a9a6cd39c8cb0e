#include "prflow/eos.hpp"

#include <cmath>
#include <stdexcept>

namespace prflow::eos {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Below this value of b*n the attraction term switches to its b->0 limit,
// which is what the raw-parameter hook with b_i = 0 exercises.
constexpr double kCovolumeEps = 1e-14;

// State shared by the pointwise evaluations: floored densities and the
// mixing-rule aggregates.
struct Mixed {
  Eigen::VectorXd n;   // floored molar densities
  double total;        // sum n_i
  double B;            // sum b_i n_i  (= b*n)
  double A;            // sum a_ij n_i n_j  (= a*n^2)
  Eigen::VectorXd Ai;  // 2 sum_j a_ij n_j
};

Mixed mix_at(const Eigen::VectorXd& a_pure, const Eigen::VectorXd& b_pure,
             const Eigen::MatrixXd& a_cross, const Eigen::VectorXd& n_in) {
  Mixed w;
  w.n = n_in.cwiseMax(kDensityFloor);
  w.total = w.n.sum();
  w.B = b_pure.dot(w.n);
  w.Ai = 2.0 * (a_cross * w.n);
  w.A = 0.5 * w.Ai.dot(w.n);
  (void)a_pure;
  return w;
}

void require_covolume(const Mixed& w) {
  if (1.0 - w.B <= 0.0) {
    throw std::domain_error("covolume constraint violated: b*n >= 1 (b*n = " +
                            std::to_string(w.B) + ")");
  }
}

// ln[(1 + (1-sqrt2) x) / (1 + (1+sqrt2) x)]
double attraction_log(double x) {
  return std::log((1.0 + (1.0 - kSqrt2) * x) / (1.0 + (1.0 + kSqrt2) * x));
}

double slope_coefficient(double omega) {
  if (omega <= 0.49) {
    return 0.37464 + 1.54226 * omega - 0.26992 * omega * omega;
  }
  return 0.379642 + 1.485030 * omega - 0.164423 * omega * omega +
         0.016666 * omega * omega * omega;
}

}  // namespace

void MixtureSpec::validate() const {
  const Eigen::Index m = size();
  if (m == 0) throw std::invalid_argument("mixture has no components");
  if (T <= 0.0) throw std::domain_error("temperature must be positive");
  if (lambda <= 0.0) throw std::domain_error("lambda must be positive");
  for (const auto& c : components) {
    if (c.T_c <= 0.0) throw std::domain_error(c.name + ": T_c must be positive");
    if (c.P_c <= 0.0) throw std::domain_error(c.name + ": P_c must be positive");
    if (c.M_w <= 0.0) throw std::domain_error(c.name + ": M_w must be positive");
    if (c.D < 0.0) throw std::domain_error(c.name + ": D must be non-negative");
  }
  if (k.rows() != m || k.cols() != m) {
    throw std::invalid_argument("k matrix must be MxM");
  }
  if (beta.rows() != m || beta.cols() != m) {
    throw std::invalid_argument("beta matrix must be MxM");
  }
  if (!k.isApprox(k.transpose(), 1e-12)) {
    throw std::invalid_argument("k matrix must be symmetric");
  }
  if (!beta.isApprox(beta.transpose(), 1e-12)) {
    throw std::invalid_argument("beta matrix must be symmetric");
  }
  if (beta.diagonal().cwiseAbs().maxCoeff() > 0.0) {
    throw std::invalid_argument("beta diagonal must be zero");
  }
}

EosModel::EosModel(const MixtureSpec& mix) {
  mix.validate();
  const Eigen::Index m = mix.size();
  T_ = mix.T;
  lambda_ = mix.lambda;
  a_pure_.resize(m);
  b_pure_.resize(m);
  m_.resize(m);
  D_.resize(m);
  Mw_.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const ComponentSpec& c = mix.components[static_cast<std::size_t>(i)];
    const double Tr = T_ / c.T_c;
    m_[i] = slope_coefficient(c.omega);
    const double alpha = 1.0 + m_[i] * (1.0 - std::sqrt(Tr));
    a_pure_[i] = 0.45724 * kGasConstant * kGasConstant * c.T_c * c.T_c / c.P_c *
                 alpha * alpha;
    b_pure_[i] = 0.07780 * kGasConstant * c.T_c / c.P_c;
    D_[i] = c.D;
    Mw_[i] = c.M_w;
  }
  a_cross_.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      a_cross_(i, j) = std::sqrt(a_pure_[i] * a_pure_[j]) * (1.0 - mix.k(i, j));
    }
  }
  build_influence(mix);
}

void EosModel::build_influence(const MixtureSpec& mix) {
  const Eigen::Index m = mix.size();
  Eigen::VectorXd c_pure(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const ComponentSpec& c = mix.components[static_cast<std::size_t>(i)];
    const double Tr = T_ / c.T_c;
    const double alpha_i = -1e-16 / (1.2326 + 1.3757 * c.omega);
    const double beta_i = 1e-16 / (0.9051 + 1.5410 * c.omega);
    c_pure[i] = a_pure_[i] * std::pow(b_pure_[i], 2.0 / 3.0) *
                (alpha_i * (1.0 - Tr) + beta_i);
    if (c_pure[i] < 0.0) {
      throw std::domain_error(c.name + ": negative pure influence parameter");
    }
  }
  c_.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      c_(i, j) = (1.0 - mix.beta(i, j)) * std::sqrt(c_pure[i] * c_pure[j]);
    }
  }
}

EosModel EosModel::from_raw(Eigen::VectorXd a_pure, Eigen::VectorXd b_pure,
                            Eigen::MatrixXd k, double T, double lambda,
                            Eigen::MatrixXd influence) {
  if (T <= 0.0) throw std::domain_error("temperature must be positive");
  const Eigen::Index m = a_pure.size();
  EosModel model;
  model.T_ = T;
  model.lambda_ = lambda;
  model.a_pure_ = std::move(a_pure);
  model.b_pure_ = std::move(b_pure);
  model.m_ = Eigen::VectorXd::Zero(m);
  model.D_ = Eigen::VectorXd::Zero(m);
  model.Mw_ = Eigen::VectorXd::Ones(m);
  if (k.size() == 0) k = Eigen::MatrixXd::Zero(m, m);
  model.a_cross_.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      model.a_cross_(i, j) =
          std::sqrt(model.a_pure_[i] * model.a_pure_[j]) * (1.0 - k(i, j));
    }
  }
  model.c_ = influence.size() == 0 ? Eigen::MatrixXd::Zero(m, m) : std::move(influence);
  return model;
}

EosParams EosModel::params(const Eigen::VectorXd& n) const {
  const Mixed w = mix_at(a_pure_, b_pure_, a_cross_, n);
  EosParams p;
  p.a_i = a_pure_;
  p.b_i = b_pure_;
  p.m_i = m_;
  p.a = w.A / (w.total * w.total);
  p.b = w.B / w.total;
  return p;
}

BulkEnergy EosModel::bulk_energy(const Eigen::VectorXd& n) const {
  const Mixed w = mix_at(a_pure_, b_pure_, a_cross_, n);
  require_covolume(w);
  const double RT = kGasConstant * T_;
  BulkEnergy e;
  e.ideal = RT * (w.n.array() * (w.n.array().log() - 1.0)).sum();
  e.repulsion = -w.total * RT * std::log(1.0 - w.B);
  e.attraction = w.B < kCovolumeEps
                     ? -w.A
                     : w.A / (2.0 * kSqrt2 * w.B) * attraction_log(w.B);
  return e;
}

Eigen::VectorXd EosModel::chemical_potential(const Eigen::VectorXd& n) const {
  const Mixed w = mix_at(a_pure_, b_pure_, a_cross_, n);
  require_covolume(w);
  const double RT = kGasConstant * T_;
  const double one_m_B = 1.0 - w.B;
  Eigen::VectorXd mu(size());
  if (w.B < kCovolumeEps) {
    mu = RT * (w.n.array().log() + b_pure_.array() * w.total / one_m_B -
               std::log(one_m_B))
             .matrix() -
         w.Ai;
    return mu;
  }
  const double L = attraction_log(w.B);
  const double P = 1.0 + 2.0 * w.B - w.B * w.B;
  for (Eigen::Index i = 0; i < size(); ++i) {
    const double rep = b_pure_[i] * w.total / one_m_B - std::log(one_m_B);
    const double att = (w.Ai[i] / w.B - w.A * b_pure_[i] / (w.B * w.B)) * L /
                           (2.0 * kSqrt2) -
                       w.A * b_pure_[i] / (w.B * P);
    mu[i] = RT * (std::log(w.n[i]) + rep) + att;
  }
  return mu;
}

double EosModel::pressure(const Eigen::VectorXd& n) const {
  const Mixed w = mix_at(a_pure_, b_pure_, a_cross_, n);
  require_covolume(w);
  const double P = 1.0 + 2.0 * w.B - w.B * w.B;
  return w.total * kGasConstant * T_ / (1.0 - w.B) - w.A / P;
}

double EosModel::pressure_identity(const Eigen::VectorXd& n) const {
  const Mixed w = mix_at(a_pure_, b_pure_, a_cross_, n);
  const Eigen::VectorXd mu = chemical_potential(n);
  return mu.dot(w.n) - bulk_energy(n).total();
}

EnergySplit EosModel::energy_split(const Eigen::VectorXd& n) const {
  const Mixed w = mix_at(a_pure_, b_pure_, a_cross_, n);
  require_covolume(w);
  const double RT = kGasConstant * T_;
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (b_pure_[i] * w.n[i] >= 1.0) {
      throw std::domain_error("separate repulsion constraint violated: b_i n_i >= 1");
    }
  }
  const BulkEnergy e = bulk_energy(n);
  double f_sr = 0.0;
  for (Eigen::Index i = 0; i < size(); ++i) {
    f_sr -= RT * w.n[i] * std::log(1.0 - b_pure_[i] * w.n[i]);
  }
  const double f_aux = e.ideal + f_sr;
  EnergySplit s;
  s.convex = e.ideal + e.repulsion + lambda_ * f_aux;
  s.concave = e.attraction - lambda_ * f_aux;
  return s;
}

MuSplit EosModel::chemical_potential_split(const Eigen::VectorXd& n) const {
  const Mixed w = mix_at(a_pure_, b_pure_, a_cross_, n);
  require_covolume(w);
  const double RT = kGasConstant * T_;
  const double one_m_B = 1.0 - w.B;
  MuSplit s;
  s.convex.resize(size());
  s.concave.resize(size());
  const bool tiny_B = w.B < kCovolumeEps;
  const double L = tiny_B ? 0.0 : attraction_log(w.B);
  const double P = 1.0 + 2.0 * w.B - w.B * w.B;
  for (Eigen::Index i = 0; i < size(); ++i) {
    const double bn_i = b_pure_[i] * w.n[i];
    if (bn_i >= 1.0) {
      throw std::domain_error("separate repulsion constraint violated: b_i n_i >= 1");
    }
    const double mu_ideal = RT * std::log(w.n[i]);
    const double mu_rep =
        RT * (b_pure_[i] * w.total / one_m_B - std::log(one_m_B));
    const double mu_aux = mu_ideal + RT * (-std::log(1.0 - bn_i) +
                                           bn_i / (1.0 - bn_i));
    double mu_att;
    if (tiny_B) {
      mu_att = -w.Ai[i];
    } else {
      mu_att = (w.Ai[i] / w.B - w.A * b_pure_[i] / (w.B * w.B)) * L /
                   (2.0 * kSqrt2) -
               w.A * b_pure_[i] / (w.B * P);
    }
    s.convex[i] = mu_ideal + mu_rep + lambda_ * mu_aux;
    s.concave[i] = mu_att - lambda_ * mu_aux;
  }
  return s;
}

Eigen::VectorXd EosModel::auxiliary_hessian_diag(const Eigen::VectorXd& n) const {
  const Eigen::VectorXd nf = n.cwiseMax(kDensityFloor);
  const double RT = kGasConstant * T_;
  Eigen::VectorXd d(size());
  for (Eigen::Index i = 0; i < size(); ++i) {
    const double g = 1.0 - b_pure_[i] * nf[i];
    if (g <= 0.0) {
      throw std::domain_error("separate repulsion constraint violated: b_i n_i >= 1");
    }
    d[i] = RT / nf[i] + RT * b_pure_[i] / g + RT * b_pure_[i] / (g * g);
  }
  return d;
}

Eigen::MatrixXd EosModel::convex_hessian(const Eigen::VectorXd& n) const {
  const Mixed w = mix_at(a_pure_, b_pure_, a_cross_, n);
  require_covolume(w);
  const double RT = kGasConstant * T_;
  const double one_m_B = 1.0 - w.B;
  const Eigen::Index m = size();
  Eigen::MatrixXd H(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      H(i, j) = RT * ((b_pure_[i] + b_pure_[j]) / one_m_B +
                      w.total * b_pure_[i] * b_pure_[j] / (one_m_B * one_m_B));
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    H(i, i) += RT / w.n[i];
  }
  H.diagonal() += lambda_ * auxiliary_hessian_diag(n);
  return H;
}

double EosModel::mass_density(const Eigen::VectorXd& n) const {
  return Mw_.dot(n);
}

bool EosModel::feasible(const Eigen::VectorXd& n) const {
  if ((n.array() <= 0.0).any()) return false;
  const Eigen::ArrayXd nf = n.array().max(kDensityFloor);
  if ((b_pure_.array() * nf >= 1.0).any()) return false;
  if ((b_pure_.array() * nf).sum() >= 1.0) return false;
  return true;
}

bool EosModel::clamp_to_feasible(Eigen::Ref<Eigen::VectorXd> n) const {
  // bounds are enforced on the floored values the evaluations actually see
  bool clamped = false;
  double B = 0.0;
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    if (n[i] <= 0.0) {
      n[i] = kFeasibilityMargin;
      clamped = true;
    }
    const double cap = (1.0 - kFeasibilityMargin) / b_pure_[i];
    if (b_pure_[i] > 0.0 && std::max(n[i], kDensityFloor) > cap) {
      n[i] = cap;
      clamped = true;
    }
    B += b_pure_[i] * std::max(n[i], kDensityFloor);
  }
  if (B >= 1.0 - kFeasibilityMargin) {
    n *= (1.0 - kFeasibilityMargin) / B;
    clamped = true;
  }
  return clamped;
}

EosParams eos_params(const MixtureSpec& mix, const Composition& comp) {
  return EosModel(mix).params(comp.n);
}
BulkEnergy f_bulk(const MixtureSpec& mix, const Composition& comp) {
  return EosModel(mix).bulk_energy(comp.n);
}
Eigen::VectorXd mu_bulk(const MixtureSpec& mix, const Composition& comp) {
  return EosModel(mix).chemical_potential(comp.n);
}
double pressure_eos(const MixtureSpec& mix, const Composition& comp) {
  return EosModel(mix).pressure(comp.n);
}
double pressure_identity(const MixtureSpec& mix, const Composition& comp) {
  return EosModel(mix).pressure_identity(comp.n);
}
EnergySplit split_energy(const MixtureSpec& mix, const Composition& comp) {
  return EosModel(mix).energy_split(comp.n);
}
MuSplit split_mu(const MixtureSpec& mix, const Composition& comp) {
  return EosModel(mix).chemical_potential_split(comp.n);
}
Eigen::MatrixXd hessian_convex(const MixtureSpec& mix, const Composition& comp) {
  return EosModel(mix).convex_hessian(comp.n);
}
Eigen::MatrixXd influence_matrix(const MixtureSpec& mix) {
  return EosModel(mix).influence();
}
double mass_density(const MixtureSpec& mix, const Composition& comp) {
  return EosModel(mix).mass_density(comp.n);
}

}  // namespace prflow::eos
