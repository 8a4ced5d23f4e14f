#include "viscoctl/flow.hpp"

#include <algorithm>
#include <cmath>

#include "viscoctl/errors.hpp"

namespace viscoctl {

FlowField FlowField::translation(const Point& velocity) {
  FlowField f;
  f.name_ = "translation";
  f.f_ = [velocity](const Point&, double) { return velocity; };
  f.uniform_ = true;
  return f;
}

FlowField FlowField::oscillating_translation(const Point& base, const Point& amplitude,
                                             double period) {
  if (!(period > 0.0)) throw PreconditionError("oscillating translation: period must be positive");
  FlowField f;
  f.name_ = "oscillating";
  f.f_ = [=](const Point&, double t) {
    return Point(base + amplitude * std::sin(2.0 * M_PI * t / period));
  };
  f.uniform_ = true;
  return f;
}

FlowField FlowField::rotation(const Point& center, double angular_velocity) {
  FlowField f;
  f.name_ = "rotation";
  f.f_ = [=](const Point& x, double) {
    const Point r = x - center;
    return Point(-angular_velocity * r.y(), angular_velocity * r.x());
  };
  f.lipschitz_ = std::abs(angular_velocity);
  return f;
}

FlowField FlowField::tabulated(int dimension, const Point& lo, const Point& hi,
                               std::array<int, 2> counts, std::vector<Point> samples) {
  if (dimension == 1) counts[1] = 1;
  if (counts[0] < 2 || (dimension == 2 && counts[1] < 2))
    throw PreconditionError("tabulated flow: need at least two samples per axis");
  if (int(samples.size()) != counts[0] * counts[1])
    throw PreconditionError("tabulated flow: sample count does not match lattice");
  for (const auto& s : samples)
    if (!s.allFinite()) throw PreconditionError("tabulated flow: non-finite sample");

  const double dx = (hi.x() - lo.x()) / (counts[0] - 1);
  const double dy = dimension == 2 ? (hi.y() - lo.y()) / (counts[1] - 1) : 1.0;
  if (!(dx > 0.0) || !(dy > 0.0)) throw PreconditionError("tabulated flow: empty lattice box");

  // Lipschitz estimate from neighbouring sample differences.
  double lip = 0.0;
  auto at = [&](int i, int j) -> const Point& { return samples[std::size_t(i + j * counts[0])]; };
  for (int j = 0; j < counts[1]; ++j)
    for (int i = 0; i < counts[0]; ++i) {
      if (i + 1 < counts[0]) lip = std::max(lip, (at(i + 1, j) - at(i, j)).norm() / dx);
      if (j + 1 < counts[1]) lip = std::max(lip, (at(i, j + 1) - at(i, j)).norm() / dy);
    }

  FlowField f;
  f.name_ = "tabulated";
  f.lipschitz_ = lip;
  f.f_ = [=, samples = std::move(samples)](const Point& x, double) {
    auto locate = [](double v, double origin, double step, int n, int& cell, double& frac) {
      double s = std::clamp((v - origin) / step, 0.0, double(n - 1));
      cell = std::min(int(s), n - 2);
      frac = s - cell;
    };
    int i = 0, j = 0;
    double fx = 0.0, fy = 0.0;
    locate(x.x(), lo.x(), dx, counts[0], i, fx);
    auto s = [&](int a, int b) { return samples[std::size_t(a + b * counts[0])]; };
    if (dimension == 1) return Point((1.0 - fx) * s(i, 0) + fx * s(i + 1, 0));
    locate(x.y(), lo.y(), dy, counts[1], j, fy);
    return Point((1.0 - fx) * (1.0 - fy) * s(i, j) + fx * (1.0 - fy) * s(i + 1, j) +
                 (1.0 - fx) * fy * s(i, j + 1) + fx * fy * s(i + 1, j + 1));
  };
  return f;
}

FlowField FlowField::custom(std::string name, Velocity v, double lipschitz, bool spatially_uniform) {
  FlowField f;
  f.name_ = std::move(name);
  f.f_ = std::move(v);
  f.lipschitz_ = lipschitz;
  f.uniform_ = spatially_uniform;
  return f;
}

namespace {

Point rk4_step(const FlowField& f, const Point& x, double t, double h) {
  const Point k1 = f(x, t);
  const Point k2 = f(x + 0.5 * h * k1, t + 0.5 * h);
  const Point k3 = f(x + 0.5 * h * k2, t + 0.5 * h);
  const Point k4 = f(x + h * k3, t + h);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Point integrate_flow(const FlowField& f, const Point& x, double t0, double t1, int substeps) {
  if (t0 == t1) return x;
  substeps = std::max(1, substeps);
  const double h = (t1 - t0) / substeps;
  Point y = x;
  for (int k = 0; k < substeps; ++k) y = rk4_step(f, y, t0 + k * h, h);
  return y;
}

FlowTrace integrate_flow_checked(const FlowField& f, const Point& x, double t0, double t1,
                                 int substeps, const Point& box_lo, const Point& box_hi) {
  FlowTrace out{x, false};
  if (t0 == t1) return out;
  substeps = std::max(1, substeps);
  const double h = (t1 - t0) / substeps;
  for (int k = 0; k < substeps; ++k) {
    out.end = rk4_step(f, out.end, t0 + k * h, h);
    if ((out.end.array() < box_lo.array()).any() || (out.end.array() > box_hi.array()).any())
      out.left_box = true;
  }
  return out;
}

double group_property_residual(const FlowField& f, const Point& x, double t0, double t1,
                               double t2, int substeps_per_unit_time) {
  auto steps = [&](double a, double b) {
    return std::max(1, int(std::ceil(std::abs(b - a) * substeps_per_unit_time)));
  };
  const Point mid = integrate_flow(f, x, t0, t1, steps(t0, t1));
  const Point composed = integrate_flow(f, mid, t1, t2, steps(t1, t2));
  const Point direct = integrate_flow(f, x, t0, t2, steps(t0, t2));
  return (composed - direct).norm();
}

int flow_substeps(const FlowField& f, double dt) {
  return std::max(8, int(std::ceil(f.lipschitz() * dt * 8.0)));
}

}  // namespace viscoctl
