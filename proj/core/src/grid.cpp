#include "prflow/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace prflow::grid {

void GridSpec::validate() const {
  if (nx < 2 || ny < 2) throw std::invalid_argument("grid needs nx, ny >= 2");
  if (lx <= 0.0 || ly <= 0.0) throw std::invalid_argument("grid extents must be positive");
}

double CellField::sum() const {
  double s = 0.0;
  for (double v : v_) s += v;
  return s;
}

double CellField::max_abs() const {
  double s = 0.0;
  for (double v : v_) s = std::max(s, std::abs(v));
  return s;
}

void FaceField::zero_boundary_normals() {
  for (int j = 0; j < ny_; ++j) {
    x(0, j) = 0.0;
    x(nx_, j) = 0.0;
  }
  for (int i = 0; i < nx_; ++i) {
    y(i, 0) = 0.0;
    y(i, ny_) = 0.0;
  }
}

double FaceField::max_abs() const {
  double s = 0.0;
  for (double v : fx_) s = std::max(s, std::abs(v));
  for (double v : fy_) s = std::max(s, std::abs(v));
  return s;
}

FaceField grad_cell_to_face(const GridSpec& g, const CellField& phi) {
  FaceField out(g);
  const double ihx = 1.0 / g.hx();
  const double ihy = 1.0 / g.hy();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) {
      out.x(i, j) = (phi(i, j) - phi(i - 1, j)) * ihx;
    }
  }
  for (int j = 1; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      out.y(i, j) = (phi(i, j) - phi(i, j - 1)) * ihy;
    }
  }
  return out;
}

CellField div_face_to_cell(const GridSpec& g, const FaceField& f) {
  CellField out(g);
  const double ihx = 1.0 / g.hx();
  const double ihy = 1.0 / g.hy();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      out(i, j) = (f.x(i + 1, j) - f.x(i, j)) * ihx +
                  (f.y(i, j + 1) - f.y(i, j)) * ihy;
    }
  }
  return out;
}

FaceField upwind_face_value(const GridSpec& g, const CellField& phi,
                            const FaceField& u) {
  FaceField out(g);
  for (int j = 0; j < g.ny; ++j) {
    out.x(0, j) = phi(0, j);
    out.x(g.nx, j) = phi(g.nx - 1, j);
    for (int i = 1; i < g.nx; ++i) {
      const double s = u.x(i, j);
      if (s > 0.0) {
        out.x(i, j) = phi(i - 1, j);
      } else if (s < 0.0) {
        out.x(i, j) = phi(i, j);
      } else {
        out.x(i, j) = 0.5 * (phi(i - 1, j) + phi(i, j));
      }
    }
  }
  for (int i = 0; i < g.nx; ++i) {
    out.y(i, 0) = phi(i, 0);
    out.y(i, g.ny) = phi(i, g.ny - 1);
    for (int j = 1; j < g.ny; ++j) {
      const double s = u.y(i, j);
      if (s > 0.0) {
        out.y(i, j) = phi(i, j - 1);
      } else if (s < 0.0) {
        out.y(i, j) = phi(i, j);
      } else {
        out.y(i, j) = 0.5 * (phi(i, j - 1) + phi(i, j));
      }
    }
  }
  return out;
}

FaceField interp_cell_to_face(const GridSpec& g, const CellField& phi) {
  FaceField out(g);
  for (int j = 0; j < g.ny; ++j) {
    out.x(0, j) = phi(0, j);
    out.x(g.nx, j) = phi(g.nx - 1, j);
    for (int i = 1; i < g.nx; ++i) {
      out.x(i, j) = 0.5 * (phi(i - 1, j) + phi(i, j));
    }
  }
  for (int i = 0; i < g.nx; ++i) {
    out.y(i, 0) = phi(i, 0);
    out.y(i, g.ny) = phi(i, g.ny - 1);
    for (int j = 1; j < g.ny; ++j) {
      out.y(i, j) = 0.5 * (phi(i, j - 1) + phi(i, j));
    }
  }
  return out;
}

std::pair<CellField, CellField> interp_face_to_cell(const GridSpec& g,
                                                    const FaceField& u) {
  CellField cx(g);
  CellField cy(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      cx(i, j) = 0.5 * (u.x(i, j) + u.x(i + 1, j));
      cy(i, j) = 0.5 * (u.y(i, j) + u.y(i, j + 1));
    }
  }
  return {std::move(cx), std::move(cy)};
}

Eigen::SparseMatrix<double> neumann_laplacian(const GridSpec& g) {
  const int n = g.cells();
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * 5);
  auto cell = [&](int i, int j) { return j * g.nx + i; };
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int c = cell(i, j);
      double diag = 0.0;
      if (i > 0) {
        trips.emplace_back(c, cell(i - 1, j), ihx2);
        diag -= ihx2;
      }
      if (i < g.nx - 1) {
        trips.emplace_back(c, cell(i + 1, j), ihx2);
        diag -= ihx2;
      }
      if (j > 0) {
        trips.emplace_back(c, cell(i, j - 1), ihy2);
        diag -= ihy2;
      }
      if (j < g.ny - 1) {
        trips.emplace_back(c, cell(i, j + 1), ihy2);
        diag -= ihy2;
      }
      trips.emplace_back(c, c, diag);
    }
  }
  Eigen::SparseMatrix<double> lap(n, n);
  lap.setFromTriplets(trips.begin(), trips.end());
  return lap;
}

}  // namespace prflow::grid
