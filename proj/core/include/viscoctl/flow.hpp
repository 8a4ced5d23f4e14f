#pragma once

#include <functional>
#include <string>
#include <vector>

#include "viscoctl/grid.hpp"

namespace viscoctl {

// Velocity field f(x, t) generating the flow X(x, t, t0).
class FlowField {
 public:
  using Velocity = std::function<Point(const Point&, double)>;

  // f(x,t) = c.
  static FlowField translation(const Point& velocity);
  // f(x,t) = c + a sin(2 pi t / period): the translation x + gamma(t) - gamma(t0).
  static FlowField oscillating_translation(const Point& base, const Point& amplitude,
                                           double period);
  // f(x) = omega J (x - center), J the quarter-turn matrix. 2D only.
  static FlowField rotation(const Point& center, double angular_velocity);
  // Steady field sampled on a uniform lattice over [lo, hi] (1D: x only) and
  // interpolated bilinearly; queries outside the lattice are clamped.
  static FlowField tabulated(int dimension, const Point& lo, const Point& hi,
                             std::array<int, 2> counts, std::vector<Point> samples);
  static FlowField custom(std::string name, Velocity f, double lipschitz,
                          bool spatially_uniform = false);

  Point operator()(const Point& x, double t) const { return f_(x, t); }

  const std::string& name() const { return name_; }
  double lipschitz() const { return lipschitz_; }
  // True when f does not depend on x, so X(x,t,t0) - x is the same for all x.
  bool spatially_uniform() const { return uniform_; }

 private:
  std::string name_;
  Velocity f_;
  double lipschitz_ = 0.0;
  bool uniform_ = false;
};

// Fixed-substep classical RK4 integration of the flow from t0 to t1 (either
// direction). Returns X(x, t1, t0).
Point integrate_flow(const FlowField& f, const Point& x, double t0, double t1, int substeps);

struct FlowTrace {
  Point end;
  bool left_box = false;  // the trajectory exited the bounding box at some substep
};

FlowTrace integrate_flow_checked(const FlowField& f, const Point& x, double t0, double t1,
                                 int substeps, const Point& box_lo, const Point& box_hi);

// | X(X(x,t1,t0),t2,t1) - X(x,t2,t0) |, with `substeps` per unit of |t_b - t_a|
// scaled so each leg uses the same step size.
double group_property_residual(const FlowField& f, const Point& x, double t0, double t1,
                               double t2, int substeps_per_unit_time);

// Substeps per time level: max(8, ceil(Lip * dt * 8)).
int flow_substeps(const FlowField& f, double dt);

}  // namespace viscoctl
