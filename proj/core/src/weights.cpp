#include "viscoctl/weights.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "viscoctl/errors.hpp"

namespace viscoctl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double smoothstep01(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

}  // namespace

BaseWeight::BaseWeight(const Grid& grid, const Point& center) : dim_(grid.dimension()), center_(center) {
  for (int a = 0; a < dim_; ++a) {
    length_[a] = grid.extent(a);
    const double sc = center[a] / length_[a];
    if (!(sc > 0.0 && sc < 1.0)) throw PreconditionError("base weight: center outside the domain");
    ratio_[a] = sc / (1.0 - sc);
  }
}

double BaseWeight::axis_value(int a, double x) const {
  const double L = length_[a], s = x / L;
  const double u = L * s / (s + ratio_[a] * (1.0 - s));
  return u * (L - u);
}

double BaseWeight::axis_slope(int a, double x) const {
  const double L = length_[a], s = x / L, r = ratio_[a];
  const double den = s + r * (1.0 - s);
  const double u = L * s / den;
  return (L - 2.0 * u) * r / (den * den);
}

double BaseWeight::operator()(const Point& x) const {
  double v = axis_value(0, x.x());
  if (dim_ == 2) v *= axis_value(1, x.y());
  return v;
}

Point BaseWeight::gradient(const Point& x) const {
  if (dim_ == 1) return Point(axis_slope(0, x.x()), 0.0);
  return Point(axis_slope(0, x.x()) * axis_value(1, x.y()),
               axis_value(0, x.x()) * axis_slope(1, x.y()));
}

BaseWeight build_base_weight(const Grid& grid, const Point& center, double eps) {
  if (!(eps > 0.0)) throw PreconditionError("base weight: ball radius must be positive");
  if (grid.boundary_distance(center) < 3.0 * eps)
    throw PreconditionError("base weight: B(center, 3 eps) is not inside the domain");
  BaseWeight w(grid, center);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Point x = grid.coord(i);
    if ((x - center).norm() <= eps) continue;
    if (!(w.gradient(x).norm() > 0.0)) {
      std::ostringstream msg;
      msg << "base weight: critical point at (" << x.x() << ", " << x.y() << ") outside the ball";
      throw NumericalError(msg.str());
    }
  }
  return w;
}

double WeightSet::ghost_psi(int level, Eigen::Index i, int axis, int side) const {
  if (exact) {
    Point p = grid.coord(i);
    p[axis] += side * grid.h(axis);
    return exact(p, grid.time(level));
  }
  return (C2 * psi2[level][i] + C3) / scale;
}

std::array<Field, 2> psi_gradient(const WeightSet& ws, int level) {
  const Grid& g = ws.grid;
  const Field& u = ws.psi[level];
  std::array<Field, 2> out{Field::Zero(g.size()), Field::Zero(g.size())};
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const auto ix = g.multi_index(i);
    for (int a = 0; a < g.dimension(); ++a) {
      const int k = ix[a];
      const double lo = k > 0 ? u[a == 0 ? g.index(k - 1, ix[1]) : g.index(ix[0], k - 1)]
                              : ws.ghost_psi(level, i, a, -1);
      const double hi = k + 1 < g.interior(a) ? u[a == 0 ? g.index(k + 1, ix[1]) : g.index(ix[0], k + 1)]
                                              : ws.ghost_psi(level, i, a, +1);
      out[a][i] = (hi - lo) / (2.0 * g.h(a));
    }
  }
  return out;
}

Field psi_laplacian(const WeightSet& ws, int level) {
  const Grid& g = ws.grid;
  const Field& u = ws.psi[level];
  Field out = Field::Zero(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const auto ix = g.multi_index(i);
    for (int a = 0; a < g.dimension(); ++a) {
      const int k = ix[a];
      const double lo = k > 0 ? u[a == 0 ? g.index(k - 1, ix[1]) : g.index(ix[0], k - 1)]
                              : ws.ghost_psi(level, i, a, -1);
      const double hi = k + 1 < g.interior(a) ? u[a == 0 ? g.index(k + 1, ix[1]) : g.index(ix[0], k + 1)]
                                              : ws.ghost_psi(level, i, a, +1);
      out[i] += (hi - 2.0 * u[i] + lo) / (g.h(a) * g.h(a));
    }
  }
  return out;
}

Field psi_time_derivative(const WeightSet& ws, int level) {
  const int last = ws.levels() - 1;
  const double dt = ws.grid.dt();
  if (level == 0) return (ws.psi[1] - ws.psi[0]) / dt;
  if (level == last) return (ws.psi[last] - ws.psi[last - 1]) / dt;
  return (ws.psi[level + 1] - ws.psi[level - 1]) / (2.0 * dt);
}

SpaceTimeField build_psi2(const MovingRegion& region) {
  const Grid& g = region.grid;
  const auto n_nodes = static_cast<std::size_t>(g.size());
  SpaceTimeField out;
  out.reserve(static_cast<std::size_t>(region.levels()));
  std::vector<int> prev(n_nodes, 0), cur(n_nodes, 0), labels;

  for (int n = 0; n < region.levels(); ++n) {
    NodeMask free = dilate(g, region.omega0[n]);
    for (auto& f : free) f = !f;
    const int nc = label_components(g, free, labels);
    if (nc == 0) throw NumericalError("psi2: complement of omega0 is empty at level " + std::to_string(n));

    std::vector<int> overlap(std::size_t(nc), 0);  // bit 1: label 1, bit 2: label 2
    for (std::size_t i = 0; i < n_nodes; ++i)
      if (labels[i] >= 0 && prev[i] > 0) overlap[labels[i]] |= prev[i];

    std::vector<int> tag(std::size_t(nc), 0);
    bool used[3] = {false, false, false};
    for (int c = 0; c < nc; ++c) {
      if (n == 0) {
        if (nc > 1) throw NumericalError("psi2: complement is disconnected at t = 0");
        tag[c] = 1;
      } else if (overlap[c] == 3) {
        throw NumericalError("psi2: components merge at level " + std::to_string(n));
      } else {
        tag[c] = overlap[c];
      }
      if (tag[c] > 0) {
        if (used[tag[c]]) throw NumericalError("psi2: component splits at level " + std::to_string(n));
        used[tag[c]] = true;
      }
    }
    for (int c = 0; c < nc; ++c) {
      if (tag[c] != 0) continue;
      const int fresh = !used[2] ? 2 : !used[1] ? 1 : 0;
      if (fresh == 0) throw NumericalError("psi2: more than two components at level " + std::to_string(n));
      tag[c] = fresh;
      used[fresh] = true;
    }

    std::vector<Eigen::Index> members[3];
    for (std::size_t i = 0; i < n_nodes; ++i) {
      cur[i] = labels[i] >= 0 ? tag[labels[i]] : 0;
      if (cur[i] > 0) members[cur[i]].push_back(Eigen::Index(i));
    }

    Field S(g.size());
    for (std::size_t i = 0; i < n_nodes; ++i) {
      if (cur[i] == 1) { S[i] = 1.0; continue; }
      if (cur[i] == 2) { S[i] = -1.0; continue; }
      if (members[2].empty()) { S[i] = 1.0; continue; }
      if (members[1].empty()) { S[i] = -1.0; continue; }
      const Point x = g.coord(Eigen::Index(i));
      double d[3] = {0.0, kInf, kInf};
      for (int k = 1; k <= 2; ++k)
        for (auto j : members[k]) d[k] = std::min(d[k], (g.coord(j) - x).norm());
      S[i] = (d[2] - d[1]) / (d[1] + d[2]);
    }
    out.push_back(g.time(n) * S);
    prev.swap(cur);
  }
  return out;
}

SpaceTimeField build_psi1(const MovingRegion& region, const std::vector<Point>& pilot, double eps,
                          Psi1Mode mode) {
  const Grid& g = region.grid;
  const FlowField& f = region.flow;
  if (int(pilot.size()) != region.levels()) throw PreconditionError("psi1: pilot curve has wrong length");
  const BaseWeight base = build_base_weight(g, pilot.front(), eps);
  SpaceTimeField out;
  out.reserve(pilot.size());
  if (mode == Psi1Mode::MovingCenter) {
    for (const Point& c : pilot) {
      const BaseWeight w = build_base_weight(g, c, eps);
      out.push_back(g.sample([&](const Point& x) { return w(x); }));
    }
    return out;
  }
  auto ramp = [eps](double r) { return 1.0 - smoothstep01((r - eps) / eps); };

  // Pair (x, Gamma) integrated backward: Gamma follows the flow and x the
  // pilot flow, which carries the ball B(Gamma, eps) rigidly and fades out
  // at radius 2 eps.
  using Pair = Eigen::Vector4d;
  auto rhs = [&](const Pair& y, double t) {
    const Point gam = y.tail<2>();
    const Point v = f(gam, t);
    Pair d;
    d.head<2>() = v * ramp((y.head<2>() - gam).norm());
    d.tail<2>() = v;
    if (g.dimension() == 1) d[1] = d[3] = 0.0;
    return d;
  };

  for (int n = 0; n < region.levels(); ++n) {
    Field v(g.size());
    const int steps = n * region.substeps;
    const double h = n > 0 ? -g.time(n) / steps : 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      Pair y;
      y << g.coord(i), pilot[n];
      double t = g.time(n);
      for (int k = 0; k < steps; ++k, t += h) {
        const Pair k1 = rhs(y, t);
        const Pair k2 = rhs(y + 0.5 * h * k1, t + 0.5 * h);
        const Pair k3 = rhs(y + 0.5 * h * k2, t + 0.5 * h);
        const Pair k4 = rhs(y + h * k3, t + h);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      v[i] = base(y.head<2>());
    }
    out.push_back(std::move(v));
  }
  return out;
}

namespace {

void assemble(WeightSet& ws) {
  ws.psi.resize(ws.psi1.size());
  for (std::size_t n = 0; n < ws.psi1.size(); ++n)
    ws.psi[n] = (ws.psi1[n].array() + ws.C2 * ws.psi2[n].array() + ws.C3) / ws.scale;
}

}  // namespace

WeightSet build_psi(const MovingRegion& region, const GeometryReport& geo, const WeightOptions& opt) {
  if (!geo.admissible()) {
    std::ostringstream msg;
    msg << "weights need an admissible geometry (A3a " << to_string(geo.pilot.verdict) << ", A3b "
        << to_string(geo.covering.verdict) << ", A3c " << to_string(geo.connectivity.a3c) << ", A3d "
        << to_string(geo.connectivity.a3d) << ", A3e " << to_string(geo.escape.verdict) << ")";
    throw PreconditionError(msg.str());
  }
  const Grid& g = region.grid;
  const double T = g.horizon();
  const double t1 = geo.connectivity.t1, t2 = geo.connectivity.t2;
  if (!(t1 > 0.0) || !(t2 < T))
    throw PreconditionError("weights need 0 < t1 < t2 < T (delta would vanish)");
  if (!geo.pilot.transported_seed || !(geo.pilot.epsilon > 0.0))
    throw PreconditionError("weights need a pilot curve with a positive ball radius");

  WeightSet ws;
  ws.grid = g;
  ws.delta = std::min({t1, T - t2, T / 2.0}) / 2.0;
  ws.epsilon = geo.pilot.epsilon;
  ws.pilot_seed = geo.pilot.seed;
  ws.pilot_curve = geo.pilot.samples;
  ws.omega1 = region.omega1;

  ws.psi1 = build_psi1(region, ws.pilot_curve, ws.epsilon, opt.psi1_mode);
  ws.psi2 = build_psi2(region);
  ws.g = build_g(ws.delta, T, g.steps());

  auto search = [&](double& constant, auto&& ok, const char* what) {
    constant = 1.0;
    for (int k = 0;; ++k) {
      assemble(ws);
      if (ok(verify_psi_properties(ws, opt))) return;
      if (k >= opt.max_doublings)
        throw NumericalError(std::string("weights: constants not found (") + what + " reached the doubling cap)");
      constant *= 2.0;
    }
  };
  ws.C3 = 0.0;
  search(ws.C2, [](const PsiPropertyReport& r) { return r.p[1].pass && r.p[2].pass && r.p[3].pass; }, "C2");
  search(ws.C3, [](const PsiPropertyReport& r) { return r.p[5].pass; }, "C3");

  double m = 0.0;
  for (const auto& f : ws.psi) m = std::max(m, f.cwiseAbs().maxCoeff());
  ws.scale = m;
  assemble(ws);
  ws.psi_max = 1.0;
  return ws;
}

bool PsiPropertyReport::all_pass() const {
  return std::all_of(p.begin(), p.end(), [](const PropertyCheck& c) { return c.pass; });
}

PsiPropertyReport verify_psi_properties(const WeightSet& ws, const WeightOptions& opt) {
  const Grid& g = ws.grid;
  const int levels = ws.levels();
  const double T = g.horizon();
  PsiPropertyReport r;

  double lo = kInf, hi = -kInf, sup = 0.0;
  for (int n = 0; n < levels; ++n) {
    lo = std::min(lo, ws.psi[n].minCoeff());
    hi = std::max(hi, ws.psi[n].maxCoeff());
    sup = std::max(sup, ws.psi[n].cwiseAbs().maxCoeff());
  }
  // Ghost values count as samples of psi on the closed domain.
  auto for_each_ghost = [&](int n, auto&& visit) {
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const auto ix = g.multi_index(i);
      for (int a = 0; a < g.dimension(); ++a) {
        if (ix[a] == 0) visit(i, a, -1, ws.ghost_psi(n, i, a, -1));
        if (ix[a] + 1 == g.interior(a)) visit(i, a, +1, ws.ghost_psi(n, i, a, +1));
      }
    }
  };
  for (int n = 0; n < levels; ++n)
    for_each_ghost(n, [&](Eigen::Index, int, int, double v) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sup = std::max(sup, std::abs(v));
    });

  const double range = hi > lo ? hi - lo : 1.0;
  double L = g.extent(0);
  if (g.dimension() == 2) L = std::max(L, g.extent(1));
  r.tol_grad = opt.tol_grad_rel * range / L;
  r.tol_t = opt.tol_t_rel * range / T;

  for (auto& c : r.p) c.margin = kInf;
  auto record = [](PropertyCheck& c, double margin, int n, Eigen::Index i) {
    c.checked = true;
    if (margin < c.margin) {
      c.margin = margin;
      c.level = n;
      c.node = i;
    }
  };

  for (int n = 0; n < levels; ++n) {
    const auto grad = psi_gradient(ws, n);
    const Field dt = psi_time_derivative(ws, n);
    const double t = g.time(n);
    const bool early = t <= ws.delta, late = t >= T - ws.delta;
    const NodeMask* excl = ws.omega1.empty() ? nullptr : &ws.omega1[n];
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (excl && (*excl)[i]) continue;
      const double gn = std::hypot(grad[0][i], grad[1][i]);
      record(r.p[0], gn - r.tol_grad, n, i);
      record(r.p[1], std::abs(dt[i]) - r.tol_t, n, i);
      if (early) record(r.p[2], dt[i] - r.tol_t, n, i);
      if (late) record(r.p[3], -dt[i] - r.tol_t, n, i);
    }
    for_each_ghost(n, [&](Eigen::Index i, int a, int, double v) {
      record(r.p[4], -(v - ws.psi[n][i]) / g.h(a), n, i);
      record(r.p[5], v - 0.75 * sup, n, i);
    });
    for (Eigen::Index i = 0; i < g.size(); ++i) record(r.p[5], ws.psi[n][i] - 0.75 * sup, n, i);
  }
  for (std::size_t k = 0; k < r.p.size(); ++k) {
    auto& c = r.p[k];
    if (!c.checked) {
      c.margin = 0.0;
      c.pass = true;
    } else {
      c.pass = k == 4 ? c.margin >= 0.0 : c.margin > 0.0;
    }
  }
  return r;
}

double g_value(double t, double delta, double T) {
  if (t <= 0.0 || t >= T) return kInf;
  if (t > T / 2.0) t = T - t;
  const double a = delta / 2.0;
  if (t <= a) return 1.0 / t;
  if (t >= delta) return 1.0;
  const double u = (t - a) / a;
  const double h00 = 2 * u * u * u - 3 * u * u + 1, h10 = u * u * u - 2 * u * u + u;
  const double h01 = -2 * u * u * u + 3 * u * u;
  return h00 / a + h10 * a * (-1.0 / (a * a)) + h01;
}

std::vector<double> build_g(double delta, double T, int steps) {
  if (!(delta > 0.0) || !(delta < T / 2.0)) throw PreconditionError("g: need 0 < delta < T/2");
  if (delta > 4.0 / 3.0) throw PreconditionError("g: the cubic bridge is not monotone for delta > 4/3");
  std::vector<double> g(std::size_t(steps) + 1);
  for (int n = 0; n <= steps; ++n) g[n] = g_value(T * n / steps, delta, T);
  return g;
}

void eval_weights(WeightSet& ws, double lambda, double s) {
  if (!(lambda > 0.0) || !(s > 0.0)) throw PreconditionError("weights: lambda and s must be positive");
  double sup = 0.0;
  for (const auto& f : ws.psi) sup = std::max(sup, f.cwiseAbs().maxCoeff());
  if (lambda * sup > 700.0)
    throw NumericalError("weights: lambda * |psi| exceeds 700; rescale psi or lower lambda");
  ws.lambda = lambda;
  ws.s = s;
  ws.psi_max = sup;
  const double top = std::exp(1.5 * lambda * sup);
  const auto levels = ws.psi.size();
  ws.phi.assign(levels, Field());
  ws.theta.assign(levels, Field());
  ws.exp_weight.assign(levels, Field());
  double phi_min = kInf;
  for (std::size_t n = 0; n < levels; ++n) {
    const double gn = ws.g[n];
    const Field e = (lambda * ws.psi[n].array()).exp().matrix();
    if (std::isinf(gn)) {
      ws.phi[n] = Field::Constant(e.size(), kInf);
      ws.theta[n] = Field::Constant(e.size(), kInf);
      continue;
    }
    ws.phi[n] = gn * (top - e.array()).matrix();
    ws.theta[n] = gn * e;
    phi_min = std::min(phi_min, ws.phi[n].minCoeff());
  }
  ws.log_weight_shift = -2.0 * s * phi_min;
  for (std::size_t n = 0; n < levels; ++n) {
    Field w = (-2.0 * s * (ws.phi[n].array() - phi_min)).exp().matrix();
    for (auto& v : w) if (!(v >= 1e-300)) v = 0.0;
    ws.exp_weight[n] = std::move(w);
  }
}

double theta_time_ratio(const WeightSet& ws) {
  if (ws.theta.empty()) throw PreconditionError("theta_time_ratio: call eval_weights first");
  const Grid& g = ws.grid;
  const double T = g.horizon();
  double c = 0.0;
  for (int n = 2; n + 2 < ws.levels(); ++n) {
    const double t = g.time(n);
    if (t < ws.delta || t > T - ws.delta) continue;
    const Field dth = (ws.theta[n + 1] - ws.theta[n - 1]) / (2.0 * g.dt());
    c = std::max(c, (dth.array().abs() / (ws.lambda * ws.theta[n].array().square())).maxCoeff());
  }
  return c;
}

WeightSet periodic_candidate(const Grid& grid, double a, double C2, double C3) {
  WeightSet ws;
  ws.grid = grid;
  ws.C2 = C2;
  ws.C3 = C3;
  const double L = grid.extent(0), T = grid.horizon();
  ws.exact = [=](const Point& x, double t) {
    return C3 + a * std::cos(2.0 * M_PI * x.x() / L) + C2 * t * (T - t);
  };
  for (int n = 0; n <= grid.steps(); ++n) {
    const double t = grid.time(n);
    ws.psi1.push_back(grid.sample([&](const Point& x) { return a * std::cos(2.0 * M_PI * x.x() / L); }));
    ws.psi2.push_back(Field::Constant(grid.size(), t * (T - t)));
    ws.psi.push_back(grid.sample([&](const Point& x) { return ws.exact(x, t); }));
  }
  ws.delta = T / 4.0;
  ws.g = build_g(ws.delta, T, grid.steps());
  double m = 0.0;
  for (const auto& f : ws.psi) m = std::max(m, f.cwiseAbs().maxCoeff());
  ws.psi_max = m;
  return ws;
}

void write_psi_report(std::ostream& out, const WeightSet& ws, const PsiPropertyReport& r) {
  out << std::setprecision(10);
  for (std::size_t k = 0; k < r.p.size(); ++k) {
    const auto& c = r.p[k];
    out << 'P' << k + 1 << " = " << (c.pass ? "PASS" : "FAIL") << "  margin=" << c.margin
        << " level=" << c.level << " node=" << c.node << (c.checked ? "" : " (empty sample set)") << "\n";
  }
  out << "tol_grad = " << r.tol_grad << "\ntol_t = " << r.tol_t << "\n";
  out << "delta = " << ws.delta << "\nC2 = " << ws.C2 << "\nC3 = " << ws.C3 << "\n";
  out << "scale = " << ws.scale << "\nepsilon = " << ws.epsilon << "\n";
  out << "pilot_seed = " << ws.pilot_seed.x() << ' ' << ws.pilot_seed.y() << "\n";
  if (ws.lambda > 0.0) out << "lambda = " << ws.lambda << "\ns = " << ws.s << "\n";
}

void write_weights_csv(std::ostream& out, const WeightSet& ws, int stride) {
  const Grid& g = ws.grid;
  const bool evaluated = !ws.phi.empty();
  stride = std::max(1, stride);
  out << std::setprecision(12) << "level,t,x" << (g.dimension() == 2 ? ",y" : "") << ",psi";
  if (evaluated) out << ",phi,theta";
  out << "\n";
  for (int n = 0; n < ws.levels(); n += stride) {
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const Point x = g.coord(i);
      out << n << ',' << g.time(n) << ',' << x.x();
      if (g.dimension() == 2) out << ',' << x.y();
      out << ',' << ws.psi[n][i];
      if (evaluated) out << ',' << ws.phi[n][i] << ',' << ws.theta[n][i];
      out << "\n";
    }
  }
}

}  // namespace viscoctl
