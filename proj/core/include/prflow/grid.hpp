#ifndef PRFLOW_GRID_HPP
#define PRFLOW_GRID_HPP

#include <Eigen/Sparse>

#include <utility>
#include <vector>

namespace prflow::grid {

/// Uniform 2-D rectangular mesh. Scalars live at cell centers, velocity and
/// flux components at cell faces (MAC layout).
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double lx = 0.0;  // [m]
  double ly = 0.0;  // [m]

  double hx() const { return lx / nx; }
  double hy() const { return ly / ny; }
  double cell_volume() const { return hx() * hy(); }
  int cells() const { return nx * ny; }
  double cell_center_x(int i) const { return (i + 0.5) * hx(); }
  double cell_center_y(int j) const { return (j + 0.5) * hy(); }

  /// Throws std::invalid_argument when any invariant is violated.
  void validate() const;
};

/// Cell-centered scalar field, nx * ny values, x-fastest storage.
class CellField {
 public:
  CellField() = default;
  CellField(int nx, int ny, double value = 0.0)
      : nx_(nx), ny_(ny), v_(static_cast<std::size_t>(nx) * ny, value) {}
  explicit CellField(const GridSpec& g, double value = 0.0)
      : CellField(g.nx, g.ny, value) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return v_.size(); }

  double& operator()(int i, int j) { return v_[idx(i, j)]; }
  double operator()(int i, int j) const { return v_[idx(i, j)]; }
  double& operator[](std::size_t k) { return v_[k]; }
  double operator[](std::size_t k) const { return v_[k]; }

  double sum() const;
  double max_abs() const;

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(j) * nx_ + i;
  }
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> v_;
};

/// Face-centered vector field: x-components at the (nx+1) x ny vertical
/// faces, y-components at the nx x (ny+1) horizontal faces.
class FaceField {
 public:
  FaceField() = default;
  FaceField(int nx, int ny)
      : nx_(nx),
        ny_(ny),
        fx_(static_cast<std::size_t>(nx + 1) * ny, 0.0),
        fy_(static_cast<std::size_t>(nx) * (ny + 1), 0.0) {}
  explicit FaceField(const GridSpec& g) : FaceField(g.nx, g.ny) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }

  // i in [0, nx], j in [0, ny-1]
  double& x(int i, int j) { return fx_[xi(i, j)]; }
  double x(int i, int j) const { return fx_[xi(i, j)]; }
  // i in [0, nx-1], j in [0, ny]
  double& y(int i, int j) { return fy_[yi(i, j)]; }
  double y(int i, int j) const { return fy_[yi(i, j)]; }

  std::size_t xi(int i, int j) const {
    return static_cast<std::size_t>(j) * (nx_ + 1) + i;
  }
  std::size_t yi(int i, int j) const {
    return static_cast<std::size_t>(j) * nx_ + i;
  }
  std::size_t x_count() const { return fx_.size(); }
  std::size_t y_count() const { return fy_.size(); }

  bool is_boundary_x(int i, int /*j*/) const { return i == 0 || i == nx_; }
  bool is_boundary_y(int /*i*/, int j) const { return j == 0 || j == ny_; }

  /// Zeroes the normal components on the domain boundary.
  void zero_boundary_normals();
  double max_abs() const;

 private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> fx_;
  std::vector<double> fy_;
};

/// Two-point difference gradient; boundary faces carry 0 (homogeneous
/// Neumann closure).
FaceField grad_cell_to_face(const GridSpec& g, const CellField& phi);

/// Per-cell flux balance (F_e - F_w)/hx + (F_n - F_s)/hy.
CellField div_face_to_cell(const GridSpec& g, const FaceField& f);

/// First-order upwind face value of phi against the face-normal velocity;
/// ties at u = 0 take the arithmetic mean. Boundary faces copy the adjacent
/// cell.
FaceField upwind_face_value(const GridSpec& g, const CellField& phi,
                            const FaceField& u);

/// Arithmetic two-point average; boundary faces copy the adjacent cell.
FaceField interp_cell_to_face(const GridSpec& g, const CellField& phi);

/// Averages face components back to cell centers; returns (x, y) fields.
std::pair<CellField, CellField> interp_face_to_cell(const GridSpec& g,
                                                    const FaceField& u);

/// The 5-point Laplacian with homogeneous Neumann closure, identical by
/// construction to div_face_to_cell(grad_cell_to_face(.)). Cells are indexed
/// lexicographically (x fastest).
Eigen::SparseMatrix<double> neumann_laplacian(const GridSpec& g);

}  // namespace prflow::grid

#endif  // PRFLOW_GRID_HPP
