#include "viscoctl/region.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "viscoctl/errors.hpp"

namespace viscoctl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double box_distance(int dim, const Box& b, const Point& p) {
  const double dx = std::max({b.lo.x() - p.x(), 0.0, p.x() - b.hi.x()});
  if (dim == 1) return dx;
  const double dy = std::max({b.lo.y() - p.y(), 0.0, p.y() - b.hi.y()});
  return std::hypot(dx, dy);
}

double box_depth(int dim, const Box& b, const Point& p) {
  double d = std::min(p.x() - b.lo.x(), b.hi.x() - p.x());
  if (dim == 2) d = std::min({d, p.y() - b.lo.y(), b.hi.y() - p.y()});
  return std::max(d, 0.0);
}

double radial(int dim, const Point& p, const Point& c) {
  return dim == 1 ? std::abs(p.x() - c.x()) : (p - c).norm();
}

double pair_margin(int dim, const Primitive& inner, const Primitive& outer) {
  return std::visit(
      overloaded{
          [&](const Box& a, const Box& b) {
            double m = std::min(a.lo.x() - b.lo.x(), b.hi.x() - a.hi.x());
            if (dim == 2) m = std::min({m, a.lo.y() - b.lo.y(), b.hi.y() - a.hi.y()});
            return m;
          },
          [&](const Ball& a, const Box& b) {
            double m = std::min(a.center.x() - a.radius - b.lo.x(),
                                b.hi.x() - a.center.x() - a.radius);
            if (dim == 2)
              m = std::min({m, a.center.y() - a.radius - b.lo.y(),
                            b.hi.y() - a.center.y() - a.radius});
            return m;
          },
          [&](const Box& a, const Ball& b) {
            double far = 0.0;
            const int corners = dim == 1 ? 2 : 4;
            for (int k = 0; k < corners; ++k) {
              Point c((k & 1) ? a.hi.x() : a.lo.x(), (k & 2) ? a.hi.y() : a.lo.y());
              far = std::max(far, radial(dim, c, b.center));
            }
            return b.radius - far;
          },
          [&](const Ball& a, const Ball& b) {
            return b.radius - radial(dim, a.center, b.center) - a.radius;
          }},
      inner, outer);
}

}  // namespace

Shape::Shape(int dimension, std::vector<Primitive> parts)
    : dimension_(dimension), parts_(std::move(parts)) {
  if (dimension != 1 && dimension != 2) throw PreconditionError("shape dimension must be 1 or 2");
  for (const auto& p : parts_) {
    const bool ok = std::visit(overloaded{[&](const Box& b) {
                                            return b.lo.x() < b.hi.x() &&
                                                   (dimension == 1 || b.lo.y() < b.hi.y());
                                          },
                                          [](const Ball& b) { return b.radius > 0.0; }},
                               p);
    if (!ok) throw PreconditionError("shape: degenerate primitive");
  }
}

Shape Shape::interval(double a, double b) { return Shape(1, {Box{Point(a, 0.0), Point(b, 0.0)}}); }

Shape Shape::box(const Point& lo, const Point& hi) { return Shape(2, {Box{lo, hi}}); }

Shape Shape::ball(int dimension, const Point& center, double radius) {
  return Shape(dimension, {Ball{center, radius}});
}

bool Shape::contains(const Point& p) const {
  for (const auto& part : parts_) {
    const bool in = std::visit(
        overloaded{[&](const Box& b) {
                     const bool x = p.x() > b.lo.x() && p.x() < b.hi.x();
                     return dimension_ == 1 ? x : x && p.y() > b.lo.y() && p.y() < b.hi.y();
                   },
                   [&](const Ball& b) { return radial(dimension_, p, b.center) < b.radius; }},
        part);
    if (in) return true;
  }
  return false;
}

double Shape::distance(const Point& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& part : parts_)
    d = std::min(d, std::visit(overloaded{[&](const Box& b) { return box_distance(dimension_, b, p); },
                                          [&](const Ball& b) {
                                            return std::max(radial(dimension_, p, b.center) - b.radius, 0.0);
                                          }},
                               part));
  return d;
}

double Shape::depth(const Point& p) const {
  double d = 0.0;
  for (const auto& part : parts_)
    d = std::max(d, std::visit(overloaded{[&](const Box& b) { return box_depth(dimension_, b, p); },
                                          [&](const Ball& b) {
                                            return std::max(b.radius - radial(dimension_, p, b.center), 0.0);
                                          }},
                               part));
  return d;
}

Shape Shape::inflated(double margin) const {
  std::vector<Primitive> out;
  for (const auto& part : parts_)
    out.push_back(std::visit(overloaded{[&](const Box& b) -> Primitive {
                                          const Point m(margin, dimension_ == 2 ? margin : 0.0);
                                          return Box{b.lo - m, b.hi + m};
                                        },
                                        [&](const Ball& b) -> Primitive {
                                          return Ball{b.center, b.radius + margin};
                                        }},
                             part));
  return Shape(dimension_, std::move(out));
}

Shape Shape::unite(const Shape& other) const {
  if (!empty() && !other.empty() && other.dimension_ != dimension_)
    throw PreconditionError("shape union: dimension mismatch");
  std::vector<Primitive> parts = parts_;
  parts.insert(parts.end(), other.parts_.begin(), other.parts_.end());
  return Shape(empty() ? other.dimension_ : dimension_, std::move(parts));
}

double Shape::inclusion_margin(const Shape& outer) const {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& in : parts_) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& out : outer.parts_) best = std::max(best, pair_margin(dimension_, in, out));
    worst = std::min(worst, best);
  }
  return worst;
}

std::string Shape::describe() const {
  std::ostringstream os;
  os << std::setprecision(6);
  bool first = true;
  for (const auto& part : parts_) {
    if (!first) os << " | ";
    first = false;
    std::visit(overloaded{[&](const Box& b) {
                            os << "box:" << b.lo.x() << ',' << b.hi.x();
                            if (dimension_ == 2) os << ',' << b.lo.y() << ',' << b.hi.y();
                          },
                          [&](const Ball& b) {
                            os << "ball:" << b.center.x();
                            if (dimension_ == 2) os << ',' << b.center.y();
                            os << ',' << b.radius;
                          }},
               part);
  }
  return os.str();
}

void RegionSpec::validate() const {
  if (omega0.empty() || omega1.empty() || omega.empty())
    throw PreconditionError("region: omega0, omega1 and omega must be nonempty");
  if (omega0.dimension() != omega1.dimension() || omega1.dimension() != omega.dimension())
    throw PreconditionError("region: dimension mismatch between reference sets");
  if (!(margin01() > 0.0))
    throw PreconditionError("region: closure(omega0) must lie inside omega1 with a positive margin");
  if (!(margin1() > 0.0))
    throw PreconditionError("region: closure(omega1) must lie inside omega with a positive margin");
}

RegionSpec RegionSpec::nested(const Shape& omega0, double margin1, double margin) {
  if (!(margin1 > 0.0) || !(margin > margin1))
    throw PreconditionError("region: need 0 < margin(omega1) < margin(omega)");
  return RegionSpec{omega0, omega0.inflated(margin1), omega0.inflated(margin)};
}

double cutoff(const RegionSpec& spec, const Point& p) {
  const double d1 = spec.omega1.distance(p);
  if (d1 <= 0.0) return 1.0;
  const double d2 = spec.omega.depth(p);
  if (d2 <= 0.0) return 0.0;
  const double s = d2 / (d1 + d2);
  return s * s * (3.0 - 2.0 * s);
}

const std::vector<NodeMask>& MovingRegion::masks(RegionSet s) const {
  switch (s) {
    case RegionSet::Omega0: return omega0;
    case RegionSet::Omega1: return omega1;
    case RegionSet::Omega: break;
  }
  return omega;
}

Point pull_back(const FlowField& flow, const Point& x, double t, int substeps_per_level,
                double dt) {
  const int levels = std::max(1, int(std::lround(t / dt)));
  return integrate_flow(flow, x, t, 0.0, levels * substeps_per_level);
}

MovingRegion build_moving_region(const FlowField& flow, const RegionSpec& spec, const Grid& grid) {
  spec.validate();
  if (spec.omega0.dimension() != grid.dimension())
    throw PreconditionError("region: reference sets and grid differ in dimension");

  MovingRegion r{grid, flow, spec, flow_substeps(flow, grid.dt()), {}, {}, {}, {}, {}};
  const int levels = grid.steps() + 1;
  const auto n = std::size_t(grid.size());
  r.omega0.assign(levels, NodeMask(n, 0));
  r.omega1.assign(levels, NodeMask(n, 0));
  r.omega.assign(levels, NodeMask(n, 0));
  r.zeta.assign(levels, Field::Zero(grid.size()));

  for (int lv = 0; lv < levels; ++lv) {
    const double t = grid.time(lv);
    Point shift = Point::Zero();
    if (flow.spatially_uniform()) shift = pull_back(flow, Point::Zero(), t, r.substeps, grid.dt());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      const Point x = grid.coord(i);
      const Point ref = flow.spatially_uniform() ? Point(x + shift)
                                                 : pull_back(flow, x, t, r.substeps, grid.dt());
      r.omega0[lv][i] = spec.omega0.contains(ref);
      r.omega1[lv][i] = spec.omega1.contains(ref);
      r.omega[lv][i] = spec.omega.contains(ref);
      r.zeta[lv][i] = cutoff(spec, ref);
    }
    if (count(r.omega0[lv]) == 0) r.empty_omega0_levels.push_back(lv);
  }
  return r;
}

NodeMask dilate(const Grid& grid, const NodeMask& mask) {
  NodeMask out = mask;
  const int nx = grid.interior(0);
  const int ny = grid.dimension() == 2 ? grid.interior(1) : 1;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      if (!mask[grid.index(ix, iy)]) continue;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int jx = ix + dx, jy = iy + dy;
          if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
          out[grid.index(jx, jy)] = 1;
        }
    }
  return out;
}

int label_components(const Grid& grid, const NodeMask& free, std::vector<int>& labels) {
  labels.assign(free.size(), -1);
  std::vector<Eigen::Index> stack;
  int next = 0;
  for (Eigen::Index s = 0; s < grid.size(); ++s) {
    if (!free[s] || labels[s] >= 0) continue;
    labels[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      grid.for_each_neighbour(i, [&](Eigen::Index j) {
        if (free[j] && labels[j] < 0) {
          labels[j] = next;
          stack.push_back(j);
        }
      });
    }
    ++next;
  }
  return next;
}

int count(const NodeMask& m) { return int(std::count(m.begin(), m.end(), std::uint8_t{1})); }

Field as_field(const NodeMask& m) {
  Field f(Eigen::Index(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) f[Eigen::Index(i)] = m[i] ? 1.0 : 0.0;
  return f;
}

void write_mask_csv(std::ostream& out, const Grid& grid, const std::vector<NodeMask>& masks,
                    int level_stride) {
  out << std::setprecision(12);
  out << (grid.dimension() == 1 ? "level,t,x,inside\n" : "level,t,x,y,inside\n");
  level_stride = std::max(1, level_stride);
  for (int n = 0; n < int(masks.size()); n += level_stride)
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      const Point p = grid.coord(i);
      out << n << ',' << grid.time(n) << ',' << p.x() << ',';
      if (grid.dimension() == 2) out << p.y() << ',';
      out << int(masks[n][i]) << '\n';
    }
}

}  // namespace viscoctl
