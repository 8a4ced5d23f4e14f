#include "viscoctl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "viscoctl/errors.hpp"

namespace viscoctl {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: break;
  }
  return "INCONCLUSIVE";
}

CoveringResult check_covering(const MovingRegion& region, int first_level) {
  const Grid& g = region.grid;
  const int levels = region.levels();
  first_level = std::clamp(first_level, 0, levels - 1);
  CoveringResult out;
  std::vector<int> first(std::size_t(g.size()), -1);
  std::vector<int> hits(std::size_t(g.size()), 0);
  int covered = 0;
  out.coverage_fraction.assign(std::size_t(levels), 0.0);
  for (int n = first_level; n < levels; ++n) {
    const auto& m = region.omega0[n];
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (!m[i]) continue;
      ++hits[i];
      if (first[i] < 0) {
        first[i] = n;
        ++covered;
      }
    }
    out.coverage_fraction[n] = double(covered) / double(g.size());
  }
  out.uncovered_nodes = int(g.size()) - covered;
  if (out.uncovered_nodes == 0) {
    out.verdict = Verdict::Pass;
    out.covering_time = g.time(*std::max_element(first.begin(), first.end()));
    out.delta0 = g.dt() * *std::min_element(hits.begin(), hits.end());
  }
  return out;
}

ConnectivityResult check_connectivity_profile(const MovingRegion& region) {
  const Grid& g = region.grid;
  const int levels = region.levels();
  ConnectivityResult out;
  out.component_counts.resize(std::size_t(levels));
  std::vector<int> labels;
  for (int n = 0; n < levels; ++n) {
    NodeMask free = dilate(g, region.omega0[n]);
    for (auto& f : free) f = !f;
    out.component_counts[n] = label_components(g, free, labels);
  }
  const auto& c = out.component_counts;
  std::ostringstream ev;
  if (const auto z = std::find(c.begin(), c.end(), 0); z != c.end())
    ev << "complement empty at level " << (z - c.begin()) << "; ";

  int a = -1;
  while (a + 1 < levels && c[a + 1] == 1) ++a;
  int b = levels;
  while (b - 1 >= 0 && c[b - 1] == 1) --b;

  if (a >= 0 && b < levels) {
    out.a3c = Verdict::Pass;
  } else {
    ev << "complement not connected at " << (a < 0 ? "t=0" : "t=T") << " (count "
       << (a < 0 ? c.front() : c.back()) << "); ";
  }
  if (out.a3c == Verdict::Pass) {
    bool two = a + 1 <= b - 1;
    for (int n = a + 1; two && n <= b - 1; ++n) two = c[n] == 2;
    if (two) {
      out.a3d = Verdict::Pass;
      out.level_t1 = a;
      out.level_t2 = b;
      out.t1 = g.time(a);
      out.t2 = g.time(b);
    } else if (a + 1 > b - 1) {
      ev << "no level with two components; ";
    } else {
      const auto bad = std::find_if(c.begin() + a + 1, c.begin() + b, [](int k) { return k != 2; });
      ev << "level " << (bad - c.begin()) << " has " << *bad << " components between the connected phases; ";
    }
  }
  out.evidence = ev.str();
  return out;
}

namespace {

std::vector<Point> seed_points(const Shape& s) {
  std::vector<Point> seeds;
  for (const auto& part : s.parts()) {
    if (const auto* b = std::get_if<Box>(&part)) {
      const int nx = 21, ny = s.dimension() == 2 ? 21 : 1;
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          Point p(b->lo.x() + (i + 0.5) / nx * (b->hi.x() - b->lo.x()), 0.0);
          if (s.dimension() == 2) p.y() = b->lo.y() + (j + 0.5) / ny * (b->hi.y() - b->lo.y());
          seeds.push_back(p);
        }
    } else {
      const auto& ball = std::get<Ball>(part);
      seeds.push_back(ball.center);
      for (double f : {0.25, 0.5, 0.75}) {
        const int dirs = s.dimension() == 1 ? 2 : 12;
        for (int k = 0; k < dirs; ++k) {
          const double ang = 2.0 * M_PI * k / dirs;
          Point d(std::cos(ang), s.dimension() == 1 ? 0.0 : std::sin(ang));
          if (s.dimension() == 1) d.x() = k == 0 ? 1.0 : -1.0;
          seeds.push_back(ball.center + f * ball.radius * d);
        }
      }
    }
  }
  return seeds;
}

// Space-time reachability inside the moving omega0 mask: a node at level n+1
// is reachable when it lies in a component of mask_n | mask_{n+1} that holds
// a node reachable at level n.
bool reachable_inside(const MovingRegion& r, std::vector<Point>& path, int& fail_level) {
  const Grid& g = r.grid;
  const int levels = r.levels();
  std::vector<NodeMask> reach(static_cast<std::size_t>(levels));
  std::vector<std::vector<int>> step_labels(static_cast<std::size_t>(levels));
  reach[0] = r.omega0[0];
  if (count(reach[0]) == 0) {
    fail_level = 0;
    return false;
  }
  for (int n = 0; n + 1 < levels; ++n) {
    NodeMask uni(std::size_t(g.size()));
    for (std::size_t i = 0; i < uni.size(); ++i) uni[i] = r.omega0[n][i] || r.omega0[n + 1][i];
    auto& labels = step_labels[n];
    const int nc = label_components(g, uni, labels);
    std::vector<char> touched(std::size_t(nc), 0);
    for (std::size_t i = 0; i < uni.size(); ++i)
      if (reach[n][i]) touched[labels[i]] = 1;
    reach[n + 1].assign(uni.size(), 0);
    for (std::size_t i = 0; i < uni.size(); ++i)
      reach[n + 1][i] = r.omega0[n + 1][i] && labels[i] >= 0 && touched[labels[i]];
    if (count(reach[n + 1]) == 0) {
      fail_level = n + 1;
      return false;
    }
  }
  std::vector<Eigen::Index> nodes(static_cast<std::size_t>(levels));
  nodes.back() = std::find(reach.back().begin(), reach.back().end(), 1) - reach.back().begin();
  for (int n = levels - 2; n >= 0; --n) {
    const int lab = step_labels[n][nodes[n + 1]];
    for (Eigen::Index i = 0; i < g.size(); ++i)
      if (reach[n][i] && step_labels[n][i] == lab) {
        nodes[n] = i;
        break;
      }
  }
  path.clear();
  for (auto i : nodes) path.push_back(g.coord(i));
  return true;
}

}  // namespace

PilotCurveResult check_pilot_curve(const MovingRegion& r) {
  const Grid& g = r.grid;
  const int levels = r.levels();
  PilotCurveResult out;
  double best = -1.0;
  for (const Point& seed : seed_points(r.spec.omega0)) {
    std::vector<Point> curve(static_cast<std::size_t>(levels));
    curve[0] = seed;
    double margin = g.boundary_distance(seed);
    for (int n = 1; n < levels && margin > 0.0; ++n) {
      curve[n] = integrate_flow(r.flow, curve[n - 1], g.time(n - 1), g.time(n), r.substeps);
      margin = std::min(margin, g.boundary_distance(curve[n]));
    }
    if (!(margin > 0.0)) continue;
    const double eps = 0.9 * std::min(margin, r.spec.omega0.depth(seed)) / 3.0;
    if (eps > best) {
      best = eps;
      out.verdict = Verdict::Pass;
      out.transported_seed = true;
      out.seed = seed;
      out.samples = std::move(curve);
      out.epsilon = eps;
    }
  }
  if (out.verdict == Verdict::Pass) return out;

  std::vector<Point> path;
  int fail_level = -1;
  if (reachable_inside(r, path, fail_level)) {
    out.verdict = Verdict::Pass;
    out.samples = std::move(path);
  } else {
    out.failure_level = fail_level;
  }
  return out;
}

namespace {

// Returns true if a discrete avoiding path exists. `conservative` uses the
// dilated union of consecutive masks as the obstacle, otherwise their
// intersection.
bool avoiding_path(const MovingRegion& r, bool conservative, std::vector<Eigen::Index>* witness) {
  const Grid& g = r.grid;
  const int levels = r.levels();
  const auto n_nodes = std::size_t(g.size());
  std::vector<NodeMask> obst(static_cast<std::size_t>(levels));
  for (int n = 0; n < levels; ++n) obst[n] = conservative ? dilate(g, r.omega0[n]) : r.omega0[n];

  std::vector<NodeMask> avoid(static_cast<std::size_t>(levels));
  std::vector<std::vector<int>> step_labels(static_cast<std::size_t>(levels));
  avoid[0].assign(n_nodes, 0);
  for (std::size_t i = 0; i < n_nodes; ++i) avoid[0][i] = !obst[0][i];
  if (count(avoid[0]) == 0) return false;

  for (int n = 0; n + 1 < levels; ++n) {
    NodeMask free(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i)
      free[i] = conservative ? !(obst[n][i] || obst[n + 1][i]) : !(obst[n][i] && obst[n + 1][i]);
    auto& labels = step_labels[n];
    const int nc = label_components(g, free, labels);
    std::vector<char> touched(std::size_t(nc), 0);
    for (std::size_t i = 0; i < n_nodes; ++i)
      if (avoid[n][i] && labels[i] >= 0) touched[labels[i]] = 1;
    avoid[n + 1].assign(n_nodes, 0);
    for (std::size_t i = 0; i < n_nodes; ++i)
      avoid[n + 1][i] = labels[i] >= 0 && touched[labels[i]] && !obst[n + 1][i];
    if (count(avoid[n + 1]) == 0) return false;
  }

  if (witness) {
    witness->assign(std::size_t(levels), 0);
    const auto& last = avoid.back();
    witness->back() = std::find(last.begin(), last.end(), 1) - last.begin();
    for (int n = levels - 2; n >= 0; --n) {
      const int lab = step_labels[n][(*witness)[n + 1]];
      for (Eigen::Index i = 0; i < g.size(); ++i)
        if (avoid[n][i] && step_labels[n][i] == lab) {
          (*witness)[n] = i;
          break;
        }
    }
  }
  return true;
}

}  // namespace

EscapeResult check_escape_curve(const MovingRegion& region, int max_refinements) {
  EscapeResult out;
  out.steps_used = region.grid.steps();
  if (avoiding_path(region, true, &out.witness)) {
    out.verdict = Verdict::Fail;
    return out;
  }
  out.witness.clear();
  if (!avoiding_path(region, false, nullptr)) {
    out.verdict = Verdict::Pass;
    return out;
  }
  if (max_refinements <= 0) return out;
  const Grid finer = region.grid.with_horizon(region.grid.horizon(), 2 * region.grid.steps());
  EscapeResult refined =
      check_escape_curve(build_moving_region(region.flow, region.spec, finer), max_refinements - 1);
  refined.refinements += 1;
  return refined;
}

bool GeometryReport::admissible() const {
  return covering.verdict == Verdict::Pass && connectivity.a3c == Verdict::Pass &&
         connectivity.a3d == Verdict::Pass && pilot.verdict == Verdict::Pass &&
         escape.verdict == Verdict::Pass;
}

GeometryReport analyze_geometry(const MovingRegion& region) {
  GeometryReport r;
  r.covering = check_covering(region);
  r.connectivity = check_connectivity_profile(region);
  r.pilot = check_pilot_curve(region);
  r.escape = check_escape_curve(region);
  return r;
}

void write_geometry_report(std::ostream& out, const GeometryReport& r) {
  out << std::setprecision(10);
  out << "A3a = " << to_string(r.pilot.verdict) << "\n";
  out << "A3b = " << to_string(r.covering.verdict) << "\n";
  out << "A3c = " << to_string(r.connectivity.a3c) << "\n";
  out << "A3d = " << to_string(r.connectivity.a3d) << "\n";
  out << "A3e = " << to_string(r.escape.verdict) << "\n";
  out << "admissible = " << (r.admissible() ? "true" : "false") << "\n";
  out << "covering_time = " << r.covering.covering_time << "\n";
  out << "delta0 = " << r.covering.delta0 << "\n";
  out << "uncovered_nodes = " << r.covering.uncovered_nodes << "\n";
  out << "t1 = " << r.connectivity.t1 << "\n";
  out << "t2 = " << r.connectivity.t2 << "\n";
  out << "connectivity_evidence = " << r.connectivity.evidence << "\n";
  out << "pilot_transported_seed = " << (r.pilot.transported_seed ? "true" : "false") << "\n";
  out << "pilot_seed = " << r.pilot.seed.x() << ' ' << r.pilot.seed.y() << "\n";
  out << "pilot_epsilon = " << r.pilot.epsilon << "\n";
  out << "pilot_failure_level = " << r.pilot.failure_level << "\n";
  out << "escape_refinements = " << r.escape.refinements << "\n";
  out << "escape_steps = " << r.escape.steps_used << "\n";
  out << "escape_witness_nodes = " << r.escape.witness.size() << "\n";
}

void write_geometry_timeseries(std::ostream& out, const MovingRegion& region,
                               const GeometryReport& r) {
  out << std::setprecision(12) << "level,t,components,coverage_fraction\n";
  for (int n = 0; n < region.levels(); ++n)
    out << n << ',' << region.grid.time(n) << ',' << r.connectivity.component_counts[n] << ','
        << r.covering.coverage_fraction[n] << '\n';
}

}  // namespace viscoctl
