#include "viscoctl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <map>

#include "viscoctl/errors.hpp"

namespace viscoctl {

Grid Grid::build(int dimension, std::vector<double> extents, std::vector<int> node_counts,
                 double horizon, int steps) {
  if (dimension != 1 && dimension != 2)
    throw PreconditionError("grid dimension must be 1 or 2");
  if (int(extents.size()) != dimension || int(node_counts.size()) != dimension)
    throw PreconditionError("grid: one extent and one node count per axis required");
  if (!(horizon > 0.0)) throw PreconditionError("grid: time horizon must be positive");
  if (steps < 2) throw PreconditionError("grid: at least two time steps required");

  Grid g;
  g.dimension_ = dimension;
  g.size_ = 1;
  for (int a = 0; a < dimension; ++a) {
    if (!(extents[a] > 0.0)) throw PreconditionError("grid: extents must be positive");
    // Three interior nodes per axis is the smallest grid on which the
    // stencil touches a node with two interior neighbours.
    if (node_counts[a] < 5)
      throw PreconditionError("grid: stencil undefined (need at least 5 nodes per axis, got " +
                              std::to_string(node_counts[a]) + ")");
    g.extents_[a] = extents[a];
    g.nodes_[a] = node_counts[a];
    g.h_[a] = extents[a] / (node_counts[a] - 1);
    g.size_ *= node_counts[a] - 2;
  }
  if (dimension == 1) {
    g.extents_[1] = 0.0;
    g.nodes_[1] = 3;  // one pseudo interior row keeps index arithmetic uniform
    g.h_[1] = 1.0;
  }
  g.horizon_ = horizon;
  g.steps_ = steps;
  return g;
}

double Grid::min_h() const { return dimension_ == 1 ? h_[0] : std::min(h_[0], h_[1]); }

double Grid::cell_measure() const { return dimension_ == 1 ? h_[0] : h_[0] * h_[1]; }

double Grid::measure() const {
  return dimension_ == 1 ? extents_[0] : extents_[0] * extents_[1];
}

std::array<int, 2> Grid::multi_index(Eigen::Index i) const {
  const int nx = interior(0);
  return {int(i % nx), int(i / nx)};
}

Point Grid::coord(Eigen::Index i) const {
  const auto [ix, iy] = multi_index(i);
  Point p((ix + 1) * h_[0], 0.0);
  if (dimension_ == 2) p.y() = (iy + 1) * h_[1];
  return p;
}

bool Grid::next_to_boundary(Eigen::Index i) const {
  const auto [ix, iy] = multi_index(i);
  if (ix == 0 || ix + 1 == interior(0)) return true;
  return dimension_ == 2 && (iy == 0 || iy + 1 == interior(1));
}

Grid Grid::with_horizon(double horizon, int steps) const {
  if (!(horizon > 0.0) || steps < 1) throw PreconditionError("grid: invalid time axis");
  Grid g = *this;
  g.horizon_ = horizon;
  g.steps_ = steps;
  return g;
}

bool Grid::same_space(const Grid& o) const {
  return dimension_ == o.dimension_ && nodes_ == o.nodes_ && extents_ == o.extents_;
}

double Grid::boundary_distance(const Point& p) const {
  double d = std::min(p.x(), extents_[0] - p.x());
  if (dimension_ == 2) d = std::min({d, p.y(), extents_[1] - p.y()});
  return d;
}

std::string Grid::serialize() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "dimension = " << dimension_ << "\n";
  for (int a = 0; a < dimension_; ++a) {
    os << "extent." << a << " = " << extents_[a] << "\n";
    os << "nodes." << a << " = " << nodes_[a] << "\n";
  }
  os << "T = " << horizon_ << "\n";
  os << "M = " << steps_ << "\n";
  return os.str();
}

Grid Grid::parse(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto get = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw ConfigError("grid: missing key '" + k + "'");
    return it->second;
  };
  const int dim = std::stoi(get("dimension"));
  std::vector<double> ext;
  std::vector<int> nodes;
  for (int a = 0; a < dim; ++a) {
    ext.push_back(std::stod(get("extent." + std::to_string(a))));
    nodes.push_back(std::stoi(get("nodes." + std::to_string(a))));
  }
  return build(dim, ext, nodes, std::stod(get("T")), std::stoi(get("M")));
}

void check_same_size(const Grid& grid, const Field& u, const char* what) {
  if (u.size() != grid.size())
    throw PreconditionError(std::string(what) + ": field size " + std::to_string(u.size()) +
                            " does not match grid (" + std::to_string(grid.size()) + ")");
}

void check_levels(const Grid& grid, const SpaceTimeField& f, const char* what) {
  if (int(f.size()) != grid.steps() + 1)
    throw PreconditionError(std::string(what) + ": expected " + std::to_string(grid.steps() + 1) +
                            " time levels, got " + std::to_string(f.size()));
  for (const auto& s : f) check_same_size(grid, s, what);
}

SpaceTimeField zero_spacetime(const Grid& grid) {
  return SpaceTimeField(grid.steps() + 1, Field::Zero(grid.size()));
}

Field apply_laplacian(const Grid& grid, const Field& u) {
  check_same_size(grid, u, "apply_laplacian");
  Field out(grid.size());
  const int nx = grid.interior(0);
  const int ny = grid.dimension() == 2 ? grid.interior(1) : 1;
  const double ihx = 1.0 / (grid.h(0) * grid.h(0));
  const double ihy = grid.dimension() == 2 ? 1.0 / (grid.h(1) * grid.h(1)) : 0.0;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const auto i = grid.index(ix, iy);
      const double c = u[i];
      const double w = ix > 0 ? u[i - 1] : 0.0;
      const double e = ix + 1 < nx ? u[i + 1] : 0.0;
      double v = (w - 2.0 * c + e) * ihx;
      if (grid.dimension() == 2) {
        const double s = iy > 0 ? u[i - nx] : 0.0;
        const double n = iy + 1 < ny ? u[i + nx] : 0.0;
        v += (s - 2.0 * c + n) * ihy;
      }
      out[i] = v;
    }
  }
  return out;
}

SparseMatrix laplacian_matrix(const Grid& grid) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(std::size_t(grid.size()) * 5);
  const double ihx = 1.0 / (grid.h(0) * grid.h(0));
  const double ihy = grid.dimension() == 2 ? 1.0 / (grid.h(1) * grid.h(1)) : 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto [ix, iy] = grid.multi_index(i);
    t.emplace_back(i, i, -2.0 * ihx - 2.0 * ihy);
    grid.for_each_neighbour(i, [&](Eigen::Index j) {
      const auto [jx, jy] = grid.multi_index(j);
      t.emplace_back(i, j, jy == iy ? ihx : ihy);
      (void)jx;
    });
  }
  SparseMatrix L(grid.size(), grid.size());
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

double inner(const Grid& grid, const Field& u, const Field& v) {
  check_same_size(grid, u, "inner");
  check_same_size(grid, v, "inner");
  // Sequential sum keeps the reduction order fixed.
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return grid.cell_measure() * s;
}

double l2_norm(const Grid& grid, const Field& u) { return std::sqrt(inner(grid, u, u)); }

std::array<Field, 2> gradient(const Grid& grid, const Field& u) {
  check_same_size(grid, u, "gradient");
  std::array<Field, 2> g{Field::Zero(grid.size()), Field::Zero(grid.size())};
  const int nx = grid.interior(0);
  const int ny = grid.dimension() == 2 ? grid.interior(1) : 1;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const auto i = grid.index(ix, iy);
      const double w = ix > 0 ? u[i - 1] : 0.0;
      const double e = ix + 1 < nx ? u[i + 1] : 0.0;
      g[0][i] = (e - w) / (2.0 * grid.h(0));
      if (grid.dimension() == 2) {
        const double s = iy > 0 ? u[i - nx] : 0.0;
        const double n = iy + 1 < ny ? u[i + nx] : 0.0;
        g[1][i] = (n - s) / (2.0 * grid.h(1));
      }
    }
  }
  return g;
}

Field gradient_norm_sq(const Grid& grid, const Field& u) {
  const auto g = gradient(grid, u);
  return g[0].cwiseAbs2() + g[1].cwiseAbs2();
}

double discrete_dirichlet_eigenvalue(const Grid& grid, int mode_x, int mode_y) {
  auto one = [&](int axis, int k) {
    const double h = grid.h(axis);
    const double s = std::sin(k * M_PI * h / (2.0 * grid.extent(axis)));
    return 4.0 / (h * h) * s * s;
  };
  double lam = one(0, mode_x);
  if (grid.dimension() == 2) lam += one(1, mode_y);
  return lam;
}

void write_field_csv(std::ostream& out, const Grid& grid, const Field& u) {
  check_same_size(grid, u, "write_field_csv");
  out << std::setprecision(12);
  out << (grid.dimension() == 1 ? "x,value\n" : "x,y,value\n");
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Point p = grid.coord(i);
    out << p.x() << ',';
    if (grid.dimension() == 2) out << p.y() << ',';
    out << u[i] << '\n';
  }
}

void write_spacetime_csv(std::ostream& out, const Grid& grid, const SpaceTimeField& f,
                         int level_stride) {
  out << std::setprecision(12);
  out << (grid.dimension() == 1 ? "level,t,x,value\n" : "level,t,x,y,value\n");
  level_stride = std::max(1, level_stride);
  for (int n = 0; n < int(f.size()); n += level_stride) {
    check_same_size(grid, f[n], "write_spacetime_csv");
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      const Point p = grid.coord(i);
      out << n << ',' << grid.time(n) << ',' << p.x() << ',';
      if (grid.dimension() == 2) out << p.y() << ',';
      out << f[n][i] << '\n';
    }
  }
}

}  // namespace viscoctl
