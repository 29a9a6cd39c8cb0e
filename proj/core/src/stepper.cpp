#include "prflow/stepper.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <string>

namespace prflow::stepper {

namespace {

using grid::CellField;
using grid::FaceField;
using grid::GridSpec;

// Rethrows an eos domain error with the offending cell attached.
[[noreturn]] void rethrow_at_cell(const std::domain_error& e, int i, int j) {
  throw std::domain_error("cell (" + std::to_string(i) + "," + std::to_string(j) +
                          "): " + e.what());
}

Eigen::VectorXd cell_vector(const Fields& f, int i, int j) {
  Eigen::VectorXd n(static_cast<Eigen::Index>(f.size()));
  for (std::size_t c = 0; c < f.size(); ++c) n[static_cast<Eigen::Index>(c)] = f[c](i, j);
  return n;
}

}  // namespace

void SolverConfig::validate() const {
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  if (n_steps < 0) throw std::invalid_argument("n_steps must be non-negative");
  if (!(nonlinear_tol > 0.0 && nonlinear_tol < 1.0)) {
    throw std::invalid_argument("nonlinear_tol must lie in (0,1)");
  }
  if (!(linear_tol > 0.0 && linear_tol < 1.0)) {
    throw std::invalid_argument("linear_tol must lie in (0,1)");
  }
  if (max_nonlinear_iters < 1) {
    throw std::invalid_argument("max_nonlinear_iters must be >= 1");
  }
  if (lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
}

Stepper::Stepper(GridSpec g, const eos::MixtureSpec& mix, SolverConfig cfg,
                 double eta, double xi)
    : Stepper(g,
              [&] {
                eos::MixtureSpec m = mix;
                m.lambda = cfg.lambda;
                return eos::EosModel(m);
              }(),
              cfg, eta, xi) {}

Stepper::Stepper(GridSpec g, eos::EosModel model, SolverConfig cfg, double eta,
                 double xi)
    : grid_(g), model_(std::move(model)), cfg_(cfg), eta_(eta), xi_(xi) {
  grid_.validate();
  cfg_.validate();
  if (!(eta_ > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(xi_ > 2.0 / 3.0 * eta_)) {
    throw std::invalid_argument("xi must exceed 2*eta/3");
  }
}

Fields Stepper::chemical_potential_field(const Fields& n) const {
  return chemical_potential_field(n, n);
}

Fields Stepper::chemical_potential_field(const Fields& n_new,
                                         const Fields& n_old) const {
  const Eigen::Index m = model_.size();
  const Eigen::MatrixXd& c = model_.influence();
  Fields mu(static_cast<std::size_t>(m), CellField(grid_));

  // Laplacians of each component (Neumann closure shared with the stepper).
  Fields lap(static_cast<std::size_t>(m));
  for (Eigen::Index jc = 0; jc < m; ++jc) {
    lap[jc] = grid::div_face_to_cell(
        grid_, grid::grad_cell_to_face(grid_, n_new[static_cast<std::size_t>(jc)]));
  }

  const bool split = &n_new != &n_old;
  for (int j = 0; j < grid_.ny; ++j) {
    for (int i = 0; i < grid_.nx; ++i) {
      Eigen::VectorXd mu_b;
      try {
        if (split) {
          const eos::MuSplit s_new =
              model_.chemical_potential_split(cell_vector(n_new, i, j));
          const eos::MuSplit s_old =
              model_.chemical_potential_split(cell_vector(n_old, i, j));
          mu_b = s_new.convex + s_old.concave;
        } else {
          mu_b = model_.chemical_potential(cell_vector(n_new, i, j));
        }
      } catch (const std::domain_error& e) {
        rethrow_at_cell(e, i, j);
      }
      for (Eigen::Index ic = 0; ic < m; ++ic) {
        double grad_term = 0.0;
        for (Eigen::Index jc = 0; jc < m; ++jc) {
          grad_term += c(ic, jc) * lap[static_cast<std::size_t>(jc)](i, j);
        }
        mu[static_cast<std::size_t>(ic)](i, j) = mu_b[ic] - grad_term;
      }
    }
  }
  return mu;
}

grid::FaceField Stepper::face_mobility(const CellField& n_comp, double D) const {
  const double iRT = 1.0 / (eos::kGasConstant * model_.temperature());
  FaceField mob(grid_);
  const FaceField avg = grid::interp_cell_to_face(grid_, n_comp);
  for (int j = 0; j < grid_.ny; ++j) {
    for (int i = 0; i <= grid_.nx; ++i) {
      mob.x(i, j) = D * std::max(avg.x(i, j), eos::kDensityFloor) * iRT;
    }
  }
  for (int j = 0; j <= grid_.ny; ++j) {
    for (int i = 0; i < grid_.nx; ++i) {
      mob.y(i, j) = D * std::max(avg.y(i, j), eos::kDensityFloor) * iRT;
    }
  }
  return mob;
}

std::vector<grid::FaceField> Stepper::diffusion_flux(const Fields& n_mobility,
                                                     const Fields& mu) const {
  const Eigen::Index m = model_.size();
  std::vector<FaceField> flux(static_cast<std::size_t>(m), FaceField(grid_));
  for (Eigen::Index ic = 0; ic < m; ++ic) {
    const std::size_t c = static_cast<std::size_t>(ic);
    const FaceField mob = face_mobility(n_mobility[c], model_.diffusion()[ic]);
    const FaceField gmu = grid::grad_cell_to_face(grid_, mu[c]);
    for (int j = 0; j < grid_.ny; ++j) {
      for (int i = 1; i < grid_.nx; ++i) {
        flux[c].x(i, j) = -mob.x(i, j) * gmu.x(i, j);
      }
    }
    for (int j = 1; j < grid_.ny; ++j) {
      for (int i = 0; i < grid_.nx; ++i) {
        flux[c].y(i, j) = -mob.y(i, j) * gmu.y(i, j);
      }
    }
  }
  return flux;
}

MassSystem Stepper::assemble_mass_system(const Fields& n_k,
                                         const grid::FaceField& u_l,
                                         const Fields& n_l) const {
  const int nx = grid_.nx;
  const int ny = grid_.ny;
  const Eigen::Index m = model_.size();
  const int mm = static_cast<int>(m);
  const int stride = 2 * mm;
  const int n_unknowns = grid_.cells() * stride;
  const double ihx = 1.0 / grid_.hx();
  const double ihy = 1.0 / grid_.hy();
  const double ihx2 = ihx * ihx;
  const double ihy2 = ihy * ihy;
  const double idt = 1.0 / cfg_.dt;
  const Eigen::MatrixXd& c = model_.influence();

  auto cell = [nx](int i, int j) { return j * nx + i; };
  auto idx_n = [stride](int c_, int comp) { return c_ * stride + comp; };
  auto idx_mu = [stride, mm](int c_, int comp) { return c_ * stride + mm + comp; };

  // Frozen face mobilities from n^k.
  std::vector<FaceField> mob;
  mob.reserve(static_cast<std::size_t>(mm));
  for (int ic = 0; ic < mm; ++ic) {
    mob.push_back(face_mobility(n_k[static_cast<std::size_t>(ic)],
                                model_.diffusion()[ic]));
  }

  // Pass 1: pointwise thermodynamics and the reference chemical potential
  // mu_ref = mu of the constraint row evaluated at n^{k+1,l+1} = n^k.
  std::vector<Eigen::MatrixXd> hess(static_cast<std::size_t>(grid_.cells()));
  Fields mu_ref(static_cast<std::size_t>(mm), CellField(grid_));
  Fields lap_k(static_cast<std::size_t>(mm));
  for (int jc = 0; jc < mm; ++jc) {
    lap_k[static_cast<std::size_t>(jc)] = grid::div_face_to_cell(
        grid_, grid::grad_cell_to_face(grid_, n_k[static_cast<std::size_t>(jc)]));
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int cc = cell(i, j);
      const Eigen::VectorXd nl = cell_vector(n_l, i, j);
      const Eigen::VectorXd nk = cell_vector(n_k, i, j);
      try {
        hess[static_cast<std::size_t>(cc)] = model_.convex_hessian(nl);
        const Eigen::VectorXd mu_conv_l = model_.chemical_potential_split(nl).convex;
        const Eigen::VectorXd mu_conc_k = model_.chemical_potential_split(nk).concave;
        const Eigen::MatrixXd& H = hess[static_cast<std::size_t>(cc)];
        for (int ic = 0; ic < mm; ++ic) {
          double grad_term = 0.0;
          for (int jc = 0; jc < mm; ++jc) {
            grad_term += c(ic, jc) * lap_k[static_cast<std::size_t>(jc)](i, j);
          }
          mu_ref[static_cast<std::size_t>(ic)](i, j) =
              mu_conv_l[ic] + H.row(ic).dot(nk - nl) + mu_conc_k[ic] - grad_term;
        }
      } catch (const std::domain_error& e) {
        rethrow_at_cell(e, i, j);
      }
    }
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n_unknowns) * 8);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_unknowns);
  Eigen::VectorXd reference(n_unknowns);

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int cc = cell(i, j);
      const Eigen::MatrixXd& H = hess[static_cast<std::size_t>(cc)];

      for (int ic = 0; ic < mm; ++ic) {
        const std::size_t sc = static_cast<std::size_t>(ic);
        reference[idx_n(cc, ic)] = n_k[sc](i, j);
        reference[idx_mu(cc, ic)] = mu_ref[sc](i, j);

        const int rn = idx_n(cc, ic);
        trips.emplace_back(rn, idx_n(cc, ic), idt);

        // advection of the increment, upwind against u_l; the n^k part goes
        // to the rhs as explicit face fluxes
        double adv_div = 0.0;
        {
          const double ue = u_l.x(i + 1, j);
          if (i + 1 <= nx - 1 && ue != 0.0) {
            const int donor = ue > 0.0 ? cc : cell(i + 1, j);
            trips.emplace_back(rn, idx_n(donor, ic), ue * ihx);
            adv_div += ue * (ue > 0.0 ? n_k[sc](i, j) : n_k[sc](i + 1, j)) * ihx;
          }
        }
        {
          const double uw = u_l.x(i, j);
          if (i >= 1 && uw != 0.0) {
            const int donor = uw > 0.0 ? cell(i - 1, j) : cc;
            trips.emplace_back(rn, idx_n(donor, ic), -uw * ihx);
            adv_div -= uw * (uw > 0.0 ? n_k[sc](i - 1, j) : n_k[sc](i, j)) * ihx;
          }
        }
        {
          const double un = u_l.y(i, j + 1);
          if (j + 1 <= ny - 1 && un != 0.0) {
            const int donor = un > 0.0 ? cc : cell(i, j + 1);
            trips.emplace_back(rn, idx_n(donor, ic), un * ihy);
            adv_div += un * (un > 0.0 ? n_k[sc](i, j) : n_k[sc](i, j + 1)) * ihy;
          }
        }
        {
          const double us = u_l.y(i, j);
          if (j >= 1 && us != 0.0) {
            const int donor = us > 0.0 ? cell(i, j - 1) : cc;
            trips.emplace_back(rn, idx_n(donor, ic), -us * ihy);
            adv_div -= us * (us > 0.0 ? n_k[sc](i, j - 1) : n_k[sc](i, j)) * ihy;
          }
        }

        // diffusion: div J with J = -mob grad mu; the mu_ref part goes to the
        // rhs as explicit face fluxes (differences first, so uniform states
        // produce exact zeros)
        const auto& mo = mob[sc];
        double diff_div = 0.0;
        if (i + 1 <= nx - 1) {
          const double w = mo.x(i + 1, j) * ihx2;
          trips.emplace_back(rn, idx_mu(cc, ic), w);
          trips.emplace_back(rn, idx_mu(cell(i + 1, j), ic), -w);
          diff_div += w * (mu_ref[sc](i + 1, j) - mu_ref[sc](i, j));
        }
        if (i >= 1) {
          const double w = mo.x(i, j) * ihx2;
          trips.emplace_back(rn, idx_mu(cc, ic), w);
          trips.emplace_back(rn, idx_mu(cell(i - 1, j), ic), -w);
          diff_div -= w * (mu_ref[sc](i, j) - mu_ref[sc](i - 1, j));
        }
        if (j + 1 <= ny - 1) {
          const double w = mo.y(i, j + 1) * ihy2;
          trips.emplace_back(rn, idx_mu(cc, ic), w);
          trips.emplace_back(rn, idx_mu(cell(i, j + 1), ic), -w);
          diff_div += w * (mu_ref[sc](i, j + 1) - mu_ref[sc](i, j));
        }
        if (j >= 1) {
          const double w = mo.y(i, j) * ihy2;
          trips.emplace_back(rn, idx_mu(cc, ic), w);
          trips.emplace_back(rn, idx_mu(cell(i, j - 1), ic), -w);
          diff_div -= w * (mu_ref[sc](i, j) - mu_ref[sc](i, j - 1));
        }

        rhs[rn] = -adv_div + diff_div;

        // constraint row: d(mu) - H d(n) + sum_j c_ij lap(d n_j) = 0
        const int rmu = idx_mu(cc, ic);
        trips.emplace_back(rmu, idx_mu(cc, ic), 1.0);
        for (int jc = 0; jc < mm; ++jc) {
          trips.emplace_back(rmu, idx_n(cc, jc), -H(ic, jc));

          const double cij = c(ic, jc);
          if (cij != 0.0) {
            double diag = 0.0;
            if (i + 1 <= nx - 1) {
              trips.emplace_back(rmu, idx_n(cell(i + 1, j), jc), cij * ihx2);
              diag -= cij * ihx2;
            }
            if (i >= 1) {
              trips.emplace_back(rmu, idx_n(cell(i - 1, j), jc), cij * ihx2);
              diag -= cij * ihx2;
            }
            if (j + 1 <= ny - 1) {
              trips.emplace_back(rmu, idx_n(cell(i, j + 1), jc), cij * ihy2);
              diag -= cij * ihy2;
            }
            if (j >= 1) {
              trips.emplace_back(rmu, idx_n(cell(i, j - 1), jc), cij * ihy2);
              diag -= cij * ihy2;
            }
            trips.emplace_back(rmu, idx_n(cc, jc), diag);
          }
        }
        rhs[rmu] = 0.0;
      }
    }
  }

  MassSystem out;
  out.system.A.resize(n_unknowns, n_unknowns);
  out.system.A.setFromTriplets(trips.begin(), trips.end());
  out.system.rhs = std::move(rhs);
  out.reference = std::move(reference);
  return out;
}

LinearSystem Stepper::assemble_momentum_system(
    const Fields& n_l, const Fields& mu_next,
    const std::vector<grid::FaceField>& flux_next, const grid::FaceField& u_k,
    const grid::FaceField& u_l, const Fields& n_k) const {
  const int nx = grid_.nx;
  const int ny = grid_.ny;
  const Eigen::Index m = model_.size();
  const int mm = static_cast<int>(m);
  const double hx = grid_.hx();
  const double hy = grid_.hy();
  const double ihx = 1.0 / hx;
  const double ihy = 1.0 / hy;
  const double idt = 1.0 / cfg_.dt;
  const double zeta = xi_ - 2.0 / 3.0 * eta_;  // volumetric part of the stress

  const int nux = (nx + 1) * ny;
  const int n_unknowns = nux + nx * (ny + 1);
  auto iu = [nx](int i, int j) { return j * (nx + 1) + i; };
  auto iv = [nx, nux](int i, int j) { return nux + j * nx + i; };

  // Cell mass densities at both levels.
  CellField rho_k(grid_), rho_l(grid_);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      rho_k(i, j) = model_.mass_density(cell_vector(n_k, i, j));
      rho_l(i, j) = model_.mass_density(cell_vector(n_l, i, j));
    }
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n_unknowns) * 12);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_unknowns);
  auto add = [&trips](int r, int col, double w) {
    if (w != 0.0) trips.emplace_back(r, col, w);
  };

  // Gradients of mu_next at faces (forcing) reuse the shared operator.
  std::vector<FaceField> gmu;
  gmu.reserve(static_cast<std::size_t>(mm));
  for (int ic = 0; ic < mm; ++ic) {
    gmu.push_back(grid::grad_cell_to_face(grid_, mu_next[static_cast<std::size_t>(ic)]));
  }

  // ---- x-momentum rows ----
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const int r = iu(i, j);
      if (i == 0 || i == nx) {  // pinned: u.gamma = 0
        add(r, r, 1.0);
        continue;
      }
      const double rho_k_f = 0.5 * (rho_k(i - 1, j) + rho_k(i, j));
      const double rho_l_f = 0.5 * (rho_l(i - 1, j) + rho_l(i, j));

      add(r, r, rho_k_f * idt);
      rhs[r] += rho_k_f * u_k.x(i, j) * idt;

      // convection, upwind against u_l
      const double s = u_l.x(i, j);
      if (s > 0.0) {
        add(r, iu(i, j), rho_l_f * s * ihx);
        add(r, iu(i - 1, j), -rho_l_f * s * ihx);
      } else if (s < 0.0) {
        add(r, iu(i + 1, j), rho_l_f * s * ihx);
        add(r, iu(i, j), -rho_l_f * s * ihx);
      }
      const double v =
          0.25 * (u_l.y(i - 1, j) + u_l.y(i, j) + u_l.y(i - 1, j + 1) + u_l.y(i, j + 1));
      if (v > 0.0) {
        if (j >= 1) {
          add(r, iu(i, j), rho_l_f * v * ihy);
          add(r, iu(i, j - 1), -rho_l_f * v * ihy);
        } else {  // no-slip ghost below
          add(r, iu(i, j), rho_l_f * v * 2.0 * ihy);
        }
      } else if (v < 0.0) {
        if (j + 1 <= ny - 1) {
          add(r, iu(i, j + 1), rho_l_f * v * ihy);
          add(r, iu(i, j), -rho_l_f * v * ihy);
        } else {  // no-slip ghost above
          add(r, iu(i, j), -rho_l_f * v * 2.0 * ihy);
        }
      }

      // viscous stress divergence, fully implicit. LHS -= d/dx(Txx) + d/dy(Txy)
      // Txx(I,J) = (2 eta + zeta) dudx + zeta dvdy at cell (I,J)
      for (int side = 0; side < 2; ++side) {
        const int I = side == 0 ? i : i - 1;       // cell right / left of the face
        const double sgn = side == 0 ? 1.0 : -1.0;  // +Txx(i,j), -Txx(i-1,j)
        const double w = sgn * ihx;
        add(r, iu(I + 1, j), -w * (2.0 * eta_ + zeta) * ihx);
        add(r, iu(I, j), w * (2.0 * eta_ + zeta) * ihx);
        add(r, iv(I, j + 1), -w * zeta * ihy);
        add(r, iv(I, j), w * zeta * ihy);
      }
      // Txy(node i, jn) = eta (dudy + dvdx); nodes jn = j+1 (top), jn = j (bottom)
      for (int side = 0; side < 2; ++side) {
        const int jn = side == 0 ? j + 1 : j;
        const double sgn = side == 0 ? 1.0 : -1.0;
        const double w = sgn * ihy;
        // dudy at node
        if (jn == 0) {
          add(r, iu(i, 0), -w * eta_ * 2.0 * ihy);
        } else if (jn == ny) {
          add(r, iu(i, ny - 1), w * eta_ * 2.0 * ihy);
        } else {
          add(r, iu(i, jn), -w * eta_ * ihy);
          add(r, iu(i, jn - 1), w * eta_ * ihy);
        }
        // dvdx at node (i interior here)
        add(r, iv(i, jn), -w * eta_ * ihx);
        add(r, iv(i - 1, jn), w * eta_ * ihx);
      }

      // explicit diffusion-drag: sum_i Mw_i J_i . grad(u_l)
      const double dudx = (u_l.x(i + 1, j) - u_l.x(i - 1, j)) * 0.5 * ihx;
      const double up = j + 1 <= ny - 1 ? u_l.x(i, j + 1) : -u_l.x(i, j);
      const double dn = j >= 1 ? u_l.x(i, j - 1) : -u_l.x(i, j);
      const double dudy = (up - dn) * 0.5 * ihy;
      double drag = 0.0;
      for (int ic = 0; ic < mm; ++ic) {
        const auto& Ji = flux_next[static_cast<std::size_t>(ic)];
        const double jx = Ji.x(i, j);
        const double jy = 0.25 * (Ji.y(i - 1, j) + Ji.y(i, j) + Ji.y(i - 1, j + 1) +
                                  Ji.y(i, j + 1));
        drag += model_.molar_weights()[ic] * (jx * dudx + jy * dudy);
      }
      rhs[r] -= drag;

      // forcing: - sum_i n_i grad mu_i
      double force = 0.0;
      for (int ic = 0; ic < mm; ++ic) {
        const auto& nf = n_l[static_cast<std::size_t>(ic)];
        force += 0.5 * (nf(i - 1, j) + nf(i, j)) * gmu[static_cast<std::size_t>(ic)].x(i, j);
      }
      rhs[r] -= force;
    }
  }

  // ---- y-momentum rows ----
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int r = iv(i, j);
      if (j == 0 || j == ny) {
        add(r, r, 1.0);
        continue;
      }
      const double rho_k_f = 0.5 * (rho_k(i, j - 1) + rho_k(i, j));
      const double rho_l_f = 0.5 * (rho_l(i, j - 1) + rho_l(i, j));

      add(r, r, rho_k_f * idt);
      rhs[r] += rho_k_f * u_k.y(i, j) * idt;

      const double s =
          0.25 * (u_l.x(i, j - 1) + u_l.x(i + 1, j - 1) + u_l.x(i, j) + u_l.x(i + 1, j));
      if (s > 0.0) {
        if (i >= 1) {
          add(r, iv(i, j), rho_l_f * s * ihx);
          add(r, iv(i - 1, j), -rho_l_f * s * ihx);
        } else {
          add(r, iv(i, j), rho_l_f * s * 2.0 * ihx);
        }
      } else if (s < 0.0) {
        if (i + 1 <= nx - 1) {
          add(r, iv(i + 1, j), rho_l_f * s * ihx);
          add(r, iv(i, j), -rho_l_f * s * ihx);
        } else {
          add(r, iv(i, j), -rho_l_f * s * 2.0 * ihx);
        }
      }
      const double v = u_l.y(i, j);
      if (v > 0.0) {
        add(r, iv(i, j), rho_l_f * v * ihy);
        add(r, iv(i, j - 1), -rho_l_f * v * ihy);
      } else if (v < 0.0) {
        add(r, iv(i, j + 1), rho_l_f * v * ihy);
        add(r, iv(i, j), -rho_l_f * v * ihy);
      }

      // LHS -= d/dy(Tyy) + d/dx(Txy)
      for (int side = 0; side < 2; ++side) {
        const int J = side == 0 ? j : j - 1;
        const double sgn = side == 0 ? 1.0 : -1.0;
        const double w = sgn * ihy;
        add(r, iv(i, J + 1), -w * (2.0 * eta_ + zeta) * ihy);
        add(r, iv(i, J), w * (2.0 * eta_ + zeta) * ihy);
        add(r, iu(i + 1, J), -w * zeta * ihx);
        add(r, iu(i, J), w * zeta * ihx);
      }
      for (int side = 0; side < 2; ++side) {
        const int in = side == 0 ? i + 1 : i;
        const double sgn = side == 0 ? 1.0 : -1.0;
        const double w = sgn * ihx;
        // dvdx at node
        if (in == 0) {
          add(r, iv(0, j), -w * eta_ * 2.0 * ihx);
        } else if (in == nx) {
          add(r, iv(nx - 1, j), w * eta_ * 2.0 * ihx);
        } else {
          add(r, iv(in, j), -w * eta_ * ihx);
          add(r, iv(in - 1, j), w * eta_ * ihx);
        }
        // dudy at node (j interior here)
        add(r, iu(in, j), -w * eta_ * ihy);
        add(r, iu(in, j - 1), w * eta_ * ihy);
      }

      const double lf = i >= 1 ? u_l.y(i - 1, j) : -u_l.y(i, j);
      const double rt = i + 1 <= nx - 1 ? u_l.y(i + 1, j) : -u_l.y(i, j);
      const double dvdx = (rt - lf) * 0.5 * ihx;
      const double dvdy = (u_l.y(i, j + 1) - u_l.y(i, j - 1)) * 0.5 * ihy;
      double drag = 0.0;
      for (int ic = 0; ic < mm; ++ic) {
        const auto& Ji = flux_next[static_cast<std::size_t>(ic)];
        const double jy = Ji.y(i, j);
        const double jx = 0.25 * (Ji.x(i, j - 1) + Ji.x(i + 1, j - 1) + Ji.x(i, j) +
                                  Ji.x(i + 1, j));
        drag += model_.molar_weights()[ic] * (jx * dvdx + jy * dvdy);
      }
      rhs[r] -= drag;

      double force = 0.0;
      for (int ic = 0; ic < mm; ++ic) {
        const auto& nf = n_l[static_cast<std::size_t>(ic)];
        force += 0.5 * (nf(i, j - 1) + nf(i, j)) * gmu[static_cast<std::size_t>(ic)].y(i, j);
      }
      rhs[r] -= force;
    }
  }

  LinearSystem sys;
  sys.A.resize(n_unknowns, n_unknowns);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.rhs = std::move(rhs);
  return sys;
}

Eigen::VectorXd Stepper::solve_sparse(const LinearSystem& sys, const char* what,
                                      std::vector<double>& residuals) const {
  const Eigen::Index n = sys.A.rows();

  // infinity-norm equilibration; the raw system mixes 1/dt, mobility/h^2 and
  // Hessian scales that differ by many orders of magnitude
  Eigen::VectorXd row_scale = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < sys.A.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, k); it; ++it) {
      row_scale[it.row()] = std::max(row_scale[it.row()], std::abs(it.value()));
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    row_scale[i] = row_scale[i] > 0.0 ? 1.0 / row_scale[i] : 1.0;
  }
  Eigen::SparseMatrix<double> As = row_scale.asDiagonal() * sys.A;
  Eigen::VectorXd col_scale = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < As.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(As, k); it; ++it) {
      col_scale[it.col()] = std::max(col_scale[it.col()], std::abs(it.value()));
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    col_scale[i] = col_scale[i] > 0.0 ? 1.0 / col_scale[i] : 1.0;
  }
  As = As * col_scale.asDiagonal();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(As);
  if (lu.info() != Eigen::Success) {
    throw SolverError(std::string(what) + ": sparse factorization failed");
  }

  // normwise backward error ||r|| / (||A||_inf ||x|| + ||b||)
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < sys.A.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, k); it; ++it) {
      row_sums[it.row()] += std::abs(it.value());
    }
  }
  const double anorm = row_sums.maxCoeff();
  auto backward_error = [&](const Eigen::VectorXd& x) {
    const double r = (sys.A * x - sys.rhs).norm();
    if (r == 0.0) return 0.0;
    return r / std::max(anorm * x.norm() + sys.rhs.norm(), 1e-300);
  };

  Eigen::VectorXd x =
      col_scale.asDiagonal() * lu.solve((row_scale.array() * sys.rhs.array()).matrix());
  double rel = backward_error(x);
  for (int pass = 0; pass < 3 && rel > 0.01 * cfg_.linear_tol; ++pass) {
    const Eigen::VectorXd r = sys.rhs - sys.A * x;
    const Eigen::VectorXd x_new =
        x + col_scale.asDiagonal() * lu.solve((row_scale.array() * r.array()).matrix());
    const double rel_new = backward_error(x_new);
    if (rel_new >= rel) break;
    x = x_new;
    rel = rel_new;
  }
  if (!(rel <= cfg_.linear_tol)) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", rel);
    throw SolverError(std::string(what) + ": linear solve stagnated at relative residual " + buf);
  }
  residuals.push_back(rel);
  return x;
}

StepReport Stepper::step(SimState& state) const {
  const int nx = grid_.nx;
  const int ny = grid_.ny;
  const Eigen::Index m = model_.size();
  const int mm = static_cast<int>(m);
  const int stride = 2 * mm;
  StepReport report;

  const Fields n_k = state.n;
  const FaceField u_k = state.u;

  Fields n_l = n_k;
  FaceField u_l = u_k;

  auto clamp_fields = [&](Fields& f) {
    bool any = false;
    Eigen::VectorXd n(m);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        for (int ic = 0; ic < mm; ++ic) n[ic] = f[static_cast<std::size_t>(ic)](i, j);
        if (model_.clamp_to_feasible(n)) {
          any = true;
          for (int ic = 0; ic < mm; ++ic) f[static_cast<std::size_t>(ic)](i, j) = n[ic];
        }
      }
    }
    return any;
  };

  for (int l = 0; l < cfg_.max_nonlinear_iters; ++l) {
    report.clamped |= clamp_fields(n_l);

    const MassSystem mass = assemble_mass_system(n_k, u_l, n_l);
    const Eigen::VectorXd sol = mass.recover(
        solve_sparse(mass.system, "mass system", report.linear_residuals));

    Fields n_next(static_cast<std::size_t>(mm), CellField(grid_));
    Fields mu_next(static_cast<std::size_t>(mm), CellField(grid_));
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int cc = j * nx + i;
        for (int ic = 0; ic < mm; ++ic) {
          n_next[static_cast<std::size_t>(ic)](i, j) = sol[cc * stride + ic];
          mu_next[static_cast<std::size_t>(ic)](i, j) = sol[cc * stride + mm + ic];
        }
      }
    }

    FaceField u_next = u_l;
    if (solve_momentum_) {
      const std::vector<FaceField> flux = diffusion_flux(n_k, mu_next);
      const LinearSystem mom =
          assemble_momentum_system(n_l, mu_next, flux, u_k, u_l, n_k);
      const Eigen::VectorXd usol =
          solve_sparse(mom, "momentum system", report.linear_residuals);
      for (int j = 0; j < ny; ++j) {
        for (int i = 0; i <= nx; ++i) u_next.x(i, j) = usol[j * (nx + 1) + i];
      }
      const int nux = (nx + 1) * ny;
      for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i < nx; ++i) u_next.y(i, j) = usol[nux + j * nx + i];
      }
      u_next.zero_boundary_normals();
    }

    // combined relative 2-norm change of (n, u)
    double dn2 = 0.0, nn2 = 0.0;
    for (int ic = 0; ic < mm; ++ic) {
      const auto& a = n_next[static_cast<std::size_t>(ic)];
      const auto& b = n_l[static_cast<std::size_t>(ic)];
      for (std::size_t q = 0; q < a.size(); ++q) {
        const double d = a[q] - b[q];
        dn2 += d * d;
        nn2 += a[q] * a[q];
      }
    }
    double du2 = 0.0, uu2 = 0.0;
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        const double d = u_next.x(i, j) - u_l.x(i, j);
        du2 += d * d;
        uu2 += u_next.x(i, j) * u_next.x(i, j);
      }
    }
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const double d = u_next.y(i, j) - u_l.y(i, j);
        du2 += d * d;
        uu2 += u_next.y(i, j) * u_next.y(i, j);
      }
    }
    const double rel =
        std::sqrt(dn2 / std::max(nn2, 1e-300) + du2 / std::max(uu2, 1e-300));

    n_l = std::move(n_next);
    u_l = std::move(u_next);
    report.nonlinear_iters = l + 1;
    report.final_rel_change = rel;
    if (rel < cfg_.nonlinear_tol) break;
  }

  report.clamped |= clamp_fields(n_l);
  state.n = std::move(n_l);
  state.u = std::move(u_l);
  state.t += cfg_.dt;
  state.step += 1;
  return report;
}

}  // namespace prflow::stepper
