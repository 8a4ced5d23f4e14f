#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace viscoctl {

// Nodal values on the interior nodes of a Grid. Dirichlet quantities are
// implicitly zero on the boundary nodes, which are never stored.
using Field = Eigen::VectorXd;

// One Field per time level 0..M.
using SpaceTimeField = std::vector<Field>;

// Boolean per interior node (0 or 1).
using NodeMask = std::vector<std::uint8_t>;

// Physical point. In 1D only x() is meaningful and y() is kept at zero.
using Point = Eigen::Vector2d;

using SparseMatrix = Eigen::SparseMatrix<double>;

// Uniform tensor grid over an interval (1D) or an axis-aligned rectangle
// (2D) anchored at the origin, together with a uniform time axis.
class Grid {
 public:
  // node_counts include the two boundary nodes per axis.
  static Grid build(int dimension, std::vector<double> extents,
                    std::vector<int> node_counts, double horizon, int steps);

  int dimension() const { return dimension_; }
  double extent(int axis) const { return extents_[axis]; }
  int nodes(int axis) const { return nodes_[axis]; }
  int interior(int axis) const { return nodes_[axis] - 2; }
  double h(int axis) const { return h_[axis]; }
  double min_h() const;
  Eigen::Index size() const { return size_; }

  double horizon() const { return horizon_; }
  int steps() const { return steps_; }
  double dt() const { return horizon_ / steps_; }
  double time(int level) const { return level * dt(); }

  // Quadrature weight of a single interior node (h in 1D, hx*hy in 2D).
  double cell_measure() const;
  // Measure of the domain.
  double measure() const;

  // Row-major over (x fastest) interior indices.
  Eigen::Index index(int ix, int iy = 0) const { return ix + Eigen::Index(iy) * interior(0); }
  std::array<int, 2> multi_index(Eigen::Index i) const;
  Point coord(Eigen::Index i) const;

  // Neighbouring interior nodes (4-neighbourhood in 2D).
  template <typename Visit>
  void for_each_neighbour(Eigen::Index i, Visit&& visit) const {
    const auto [ix, iy] = multi_index(i);
    if (ix > 0) visit(index(ix - 1, iy));
    if (ix + 1 < interior(0)) visit(index(ix + 1, iy));
    if (dimension_ == 2) {
      if (iy > 0) visit(index(ix, iy - 1));
      if (iy + 1 < interior(1)) visit(index(ix, iy + 1));
    }
  }

  // True if the node touches the boundary along some axis.
  bool next_to_boundary(Eigen::Index i) const;

  template <typename F>
  Field sample(F&& f) const {
    Field out(size_);
    for (Eigen::Index i = 0; i < size_; ++i) out[i] = f(coord(i));
    return out;
  }

  Grid with_horizon(double horizon, int steps) const;
  bool same_space(const Grid& other) const;

  // Distance from a point to the boundary of the domain (negative outside).
  double boundary_distance(const Point& p) const;
  bool contains(const Point& p) const { return boundary_distance(p) > 0.0; }

  std::string serialize() const;
  static Grid parse(const std::string& text);

 private:
  int dimension_ = 1;
  std::array<double, 2> extents_{1.0, 0.0};
  std::array<int, 2> nodes_{0, 1};
  std::array<double, 2> h_{0.0, 0.0};
  Eigen::Index size_ = 0;
  double horizon_ = 1.0;
  int steps_ = 1;
};

// Five-point (three-point in 1D) Dirichlet Laplacian.
Field apply_laplacian(const Grid& grid, const Field& u);
SparseMatrix laplacian_matrix(const Grid& grid);

// Quadrature-weighted L2 pairing.
double inner(const Grid& grid, const Field& u, const Field& v);
double l2_norm(const Grid& grid, const Field& u);

// Centered-difference gradient with zero Dirichlet ghosts.
std::array<Field, 2> gradient(const Grid& grid, const Field& u);
// Sum of squared centered-difference gradient components.
Field gradient_norm_sq(const Grid& grid, const Field& u);

// Smallest exact eigenvalue of the discrete -Laplacian.
double discrete_dirichlet_eigenvalue(const Grid& grid, int mode_x, int mode_y = 1);

void check_same_size(const Grid& grid, const Field& u, const char* what);
void check_levels(const Grid& grid, const SpaceTimeField& f, const char* what);

SpaceTimeField zero_spacetime(const Grid& grid);

// CSV snapshots: header "x,value" or "x,y,value".
void write_field_csv(std::ostream& out, const Grid& grid, const Field& u);
// Long format: "level,t,x[,y],value".
void write_spacetime_csv(std::ostream& out, const Grid& grid, const SpaceTimeField& f,
                         int level_stride = 1);

}  // namespace viscoctl
