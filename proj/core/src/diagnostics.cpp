#include "prflow/diagnostics.hpp"

#include <cmath>

namespace prflow::diag {

namespace {

using grid::CellField;
using grid::FaceField;
using grid::GridSpec;
using stepper::Fields;

Eigen::VectorXd cell_vector(const Fields& f, int i, int j) {
  Eigen::VectorXd n(static_cast<Eigen::Index>(f.size()));
  for (std::size_t c = 0; c < f.size(); ++c) n[static_cast<Eigen::Index>(c)] = f[c](i, j);
  return n;
}

// <a, b> over all faces with the cell volume as face measure; boundary faces
// carry zero gradients and drop out.
double face_inner(const GridSpec& g, const FaceField& a, const FaceField& b) {
  double s = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) s += a.x(i, j) * b.x(i, j);
  }
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) s += a.y(i, j) * b.y(i, j);
  }
  return s * g.cell_volume();
}

}  // namespace

EnergyReport compute_energy(const GridSpec& g, const eos::EosModel& model,
                            const stepper::SimState& state) {
  const Eigen::Index m = model.size();
  const double vol = g.cell_volume();

  EnergyReport rep;
  rep.t = state.t;
  rep.step = state.step;
  rep.moles = Eigen::VectorXd::Zero(m);

  CellField rho(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Eigen::VectorXd n = cell_vector(state.n, i, j);
      rep.F_bulk += model.bulk_energy(n).total() * vol;
      rep.moles += n * vol;
      rho(i, j) = model.mass_density(n);
    }
  }

  std::vector<FaceField> grads;
  grads.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index ic = 0; ic < m; ++ic) {
    grads.push_back(grid::grad_cell_to_face(g, state.n[static_cast<std::size_t>(ic)]));
  }
  const Eigen::MatrixXd& c = model.influence();
  for (Eigen::Index ic = 0; ic < m; ++ic) {
    for (Eigen::Index jc = 0; jc < m; ++jc) {
      if (c(ic, jc) != 0.0) {
        rep.F_grad += 0.5 * c(ic, jc) *
                      face_inner(g, grads[static_cast<std::size_t>(ic)],
                                 grads[static_cast<std::size_t>(jc)]);
      }
    }
  }

  const FaceField rho_f = grid::interp_cell_to_face(g, rho);
  double e = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      e += rho_f.x(i, j) * state.u.x(i, j) * state.u.x(i, j);
    }
  }
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      e += rho_f.y(i, j) * state.u.y(i, j) * state.u.y(i, j);
    }
  }
  rep.E_kinetic = 0.5 * e * vol;

  rep.F = rep.F_bulk + rep.F_grad;
  rep.total = rep.F + rep.E_kinetic;
  return rep;
}

grid::CellField pressure_field(const GridSpec& g, const eos::EosModel& model,
                               const Fields& n) {
  const Eigen::Index m = model.size();
  const Eigen::MatrixXd& c = model.influence();

  Fields lap(static_cast<std::size_t>(m));
  std::vector<FaceField> grads(static_cast<std::size_t>(m));
  std::vector<std::pair<CellField, CellField>> grad_c(static_cast<std::size_t>(m));
  for (Eigen::Index ic = 0; ic < m; ++ic) {
    const std::size_t s = static_cast<std::size_t>(ic);
    grads[s] = grid::grad_cell_to_face(g, n[s]);
    lap[s] = grid::div_face_to_cell(g, grads[s]);
    grad_c[s] = grid::interp_face_to_cell(g, grads[s]);
  }

  CellField p(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Eigen::VectorXd nc = cell_vector(n, i, j);
      double val = model.pressure(nc);
      for (Eigen::Index ic = 0; ic < m; ++ic) {
        for (Eigen::Index jc = 0; jc < m; ++jc) {
          const double cij = c(ic, jc);
          if (cij == 0.0) continue;
          const std::size_t sj = static_cast<std::size_t>(jc);
          const std::size_t si = static_cast<std::size_t>(ic);
          val -= nc[ic] * cij * lap[sj](i, j);
          val -= 0.5 * cij *
                 (grad_c[si].first(i, j) * grad_c[sj].first(i, j) +
                  grad_c[si].second(i, j) * grad_c[sj].second(i, j));
        }
      }
      p(i, j) = val;
    }
  }
  return p;
}

double driving_force_identity_residual(const GridSpec& g, const eos::EosModel& model,
                      const Fields& n) {
  const Eigen::Index m = model.size();
  const Eigen::MatrixXd& c = model.influence();
  const double hx = g.hx();
  const double hy = g.hy();

  // left side: sum_i n_i grad mu_i at faces, with the full chemical potential
  Fields mu;
  {
    // build mu = mu_b - sum_j c_ij lap n_j directly (no stepper needed)
    Fields lap(static_cast<std::size_t>(m));
    for (Eigen::Index jc = 0; jc < m; ++jc) {
      lap[static_cast<std::size_t>(jc)] = grid::div_face_to_cell(
          g, grid::grad_cell_to_face(g, n[static_cast<std::size_t>(jc)]));
    }
    mu.assign(static_cast<std::size_t>(m), CellField(g));
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const Eigen::VectorXd mu_b = model.chemical_potential(cell_vector(n, i, j));
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

  FaceField lhs(g);
  for (Eigen::Index ic = 0; ic < m; ++ic) {
    const std::size_t s = static_cast<std::size_t>(ic);
    const FaceField gmu = grid::grad_cell_to_face(g, mu[s]);
    const FaceField nf = grid::interp_cell_to_face(g, n[s]);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 1; i < g.nx; ++i) lhs.x(i, j) += nf.x(i, j) * gmu.x(i, j);
    }
    for (int j = 1; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) lhs.y(i, j) += nf.y(i, j) * gmu.y(i, j);
    }
  }

  // right side: grad p + sum_ij div(c_ij grad n_i x grad n_j)
  const CellField p = pressure_field(g, model, n);
  FaceField rhs = grid::grad_cell_to_face(g, p);

  // tensor components: Txx, Tyy at cells; Txy at nodes
  std::vector<FaceField> grads(static_cast<std::size_t>(m));
  std::vector<std::pair<CellField, CellField>> grad_c(static_cast<std::size_t>(m));
  for (Eigen::Index ic = 0; ic < m; ++ic) {
    const std::size_t s = static_cast<std::size_t>(ic);
    grads[s] = grid::grad_cell_to_face(g, n[s]);
    grad_c[s] = grid::interp_face_to_cell(g, grads[s]);
  }
  CellField Txx(g), Tyy(g);
  // node storage: (nx+1) x (ny+1)
  const int nodes_x = g.nx + 1;
  std::vector<double> Txy(static_cast<std::size_t>(nodes_x) * (g.ny + 1), 0.0);
  auto node = [nodes_x](int i, int jn) {
    return static_cast<std::size_t>(jn) * nodes_x + i;
  };

  // gradient components at nodes, averaged from the adjacent faces
  auto dndx_node = [&](const FaceField& gr, int i, int jn) {
    const double below = jn >= 1 ? gr.x(i, jn - 1) : 0.0;
    const double above = jn <= g.ny - 1 ? gr.x(i, jn) : 0.0;
    const int cnt = (jn >= 1 ? 1 : 0) + (jn <= g.ny - 1 ? 1 : 0);
    return cnt > 0 ? (below + above) / cnt : 0.0;
  };
  auto dndy_node = [&](const FaceField& gr, int i, int jn) {
    const double left = i >= 1 ? gr.y(i - 1, jn) : 0.0;
    const double right = i <= g.nx - 1 ? gr.y(i, jn) : 0.0;
    const int cnt = (i >= 1 ? 1 : 0) + (i <= g.nx - 1 ? 1 : 0);
    return cnt > 0 ? (left + right) / cnt : 0.0;
  };

  for (Eigen::Index ic = 0; ic < m; ++ic) {
    for (Eigen::Index jc = 0; jc < m; ++jc) {
      const double cij = c(ic, jc);
      if (cij == 0.0) continue;
      const std::size_t si = static_cast<std::size_t>(ic);
      const std::size_t sj = static_cast<std::size_t>(jc);
      for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
          Txx(i, j) += cij * grad_c[si].first(i, j) * grad_c[sj].first(i, j);
          Tyy(i, j) += cij * grad_c[si].second(i, j) * grad_c[sj].second(i, j);
        }
      }
      for (int jn = 0; jn <= g.ny; ++jn) {
        for (int i = 0; i <= g.nx; ++i) {
          Txy[node(i, jn)] += cij * dndx_node(grads[si], i, jn) *
                              dndy_node(grads[sj], i, jn);
        }
      }
    }
  }

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) {
      rhs.x(i, j) += (Txx(i, j) - Txx(i - 1, j)) / hx +
                     (Txy[node(i, j + 1)] - Txy[node(i, j)]) / hy;
    }
  }
  for (int j = 1; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      rhs.y(i, j) += (Tyy(i, j) - Tyy(i, j - 1)) / hy +
                     (Txy[node(i + 1, j)] - Txy[node(i, j)]) / hx;
    }
  }

  double s2 = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) {
      const double d = lhs.x(i, j) - rhs.x(i, j);
      s2 += d * d;
    }
  }
  for (int j = 1; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double d = lhs.y(i, j) - rhs.y(i, j);
      s2 += d * d;
    }
  }
  return std::sqrt(s2 * g.cell_volume());
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& eps) {
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + eps[i];
    xm[i] = x[i] - eps[i];
    grad[i] = (f(xp) - f(xm)) / (2.0 * eps[i]);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return grad;
}

Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, const Eigen::VectorXd& eps) {
  Eigen::MatrixXd jac;
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + eps[i];
    xm[i] = x[i] - eps[i];
    const Eigen::VectorXd col = (f(xp) - f(xm)) / (2.0 * eps[i]);
    if (jac.size() == 0) jac.resize(col.size(), x.size());
    jac.col(i) = col;
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return jac;
}

}  // namespace prflow::diag
