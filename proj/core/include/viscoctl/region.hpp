#pragma once

#include <string>
#include <variant>
#include <vector>

#include "viscoctl/flow.hpp"
#include "viscoctl/grid.hpp"

namespace viscoctl {

// Open axis-aligned box. In 1D only the x coordinates are used.
struct Box {
  Point lo;
  Point hi;
};

// Open ball (an interval in 1D).
struct Ball {
  Point center;
  double radius = 0.0;
};

using Primitive = std::variant<Box, Ball>;

// Finite union of open primitives.
class Shape {
 public:
  Shape() = default;
  Shape(int dimension, std::vector<Primitive> parts);

  static Shape interval(double a, double b);
  static Shape box(const Point& lo, const Point& hi);
  static Shape ball(int dimension, const Point& center, double radius);

  int dimension() const { return dimension_; }
  const std::vector<Primitive>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }

  bool contains(const Point& p) const;
  // Distance to the shape (zero inside).
  double distance(const Point& p) const;
  // Distance to the complement (zero outside). Exact for a single primitive,
  // a lower bound for unions.
  double depth(const Point& p) const;

  Shape inflated(double margin) const;
  Shape unite(const Shape& other) const;

  // Smallest gap between closure(this) and the complement of `outer`;
  // positive iff closure(this) is contained in `outer`.
  double inclusion_margin(const Shape& outer) const;

  std::string describe() const;

 private:
  int dimension_ = 1;
  std::vector<Primitive> parts_;
};

// Reference sets omega0 < omega1 < omega, with strict inclusion of closures.
struct RegionSpec {
  Shape omega0;
  Shape omega1;
  Shape omega;

  // Throws PreconditionError if the nesting margins are not positive.
  void validate() const;
  double margin01() const { return omega0.inclusion_margin(omega1); }
  double margin1() const { return omega1.inclusion_margin(omega); }

  // omega1 and omega obtained by inflating omega0.
  static RegionSpec nested(const Shape& omega0, double margin1, double margin);
};

// C^1 cutoff: 1 on omega1, 0 off omega, smoothstep ramp in between.
double cutoff(const RegionSpec& spec, const Point& reference_point);

enum class RegionSet { Omega0, Omega1, Omega };

// The moving sets X(S, t_n, 0) sampled on the grid at every time level.
struct MovingRegion {
  Grid grid;
  FlowField flow;
  RegionSpec spec;
  int substeps = 8;  // RK4 substeps per time level

  std::vector<NodeMask> omega0;
  std::vector<NodeMask> omega1;
  std::vector<NodeMask> omega;
  // Smoothed mask zeta_n(x) = xi(X(x, 0, t_n)).
  std::vector<Field> zeta;
  // Levels at which the omega0 mask has no node.
  std::vector<int> empty_omega0_levels;

  const std::vector<NodeMask>& masks(RegionSet s) const;
  int levels() const { return int(omega0.size()); }
};

// Pull x back through the flow, X(x, 0, t), as done when building masks.
Point pull_back(const FlowField& flow, const Point& x, double t, int substeps_per_level,
                double dt);

MovingRegion build_moving_region(const FlowField& flow, const RegionSpec& spec, const Grid& grid);

// One-cell (8-neighbourhood) dilation, used as the closure of a mask.
NodeMask dilate(const Grid& grid, const NodeMask& mask);

// Connected components of the nodes with free[i] != 0 (4-neighbourhood).
// labels[i] = component id or -1; returns the component count.
int label_components(const Grid& grid, const NodeMask& free, std::vector<int>& labels);

int count(const NodeMask& m);

// Mask of X(S, t, 0) as a Field of 0/1 (for multiplying controls).
Field as_field(const NodeMask& m);

void write_mask_csv(std::ostream& out, const Grid& grid, const std::vector<NodeMask>& masks,
                    int level_stride = 1);

}  // namespace viscoctl
