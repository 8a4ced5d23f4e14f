#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "viscoctl/region.hpp"

namespace viscoctl {

enum class Verdict { Pass, Fail, Inconclusive };

const char* to_string(Verdict v);

struct CoveringResult {
  Verdict verdict = Verdict::Fail;  // condition (A3b)
  double covering_time = -1.0;      // T0: first level at which every node has been covered
  double delta0 = 0.0;              // min over nodes of dt * #{levels covering the node}
  int uncovered_nodes = 0;
  std::vector<double> coverage_fraction;  // cumulative covered fraction per level
};

// Coverage of the interior nodes by the omega0 masks at levels >= first_level.
CoveringResult check_covering(const MovingRegion& region, int first_level = 0);

struct ConnectivityResult {
  Verdict a3c = Verdict::Fail;
  Verdict a3d = Verdict::Fail;
  double t1 = -1.0;  // last level of the initial connected phase
  double t2 = -1.0;  // first level of the final connected phase
  int level_t1 = -1;
  int level_t2 = -1;
  std::vector<int> component_counts;
  std::string evidence;
};

// Component counts of Omega \ closure(X(omega0, t_n, 0)), closure taken as a
// one-cell dilation of the mask.
ConnectivityResult check_connectivity_profile(const MovingRegion& region);

struct PilotCurveResult {
  Verdict verdict = Verdict::Fail;  // condition (A3a)
  bool transported_seed = false;    // Gamma = X(seed, t, 0) for a seed in omega0
  Point seed = Point::Zero();
  std::vector<Point> samples;       // Gamma(t_n)
  // Radius with B(Gamma(t), 3 eps) inside X(omega0, t, 0) and Omega (exact
  // for rigid flows; zero when the curve came from the reachability fallback).
  double epsilon = 0.0;
  int failure_level = -1;
};

PilotCurveResult check_pilot_curve(const MovingRegion& region);

struct EscapeResult {
  Verdict verdict = Verdict::Inconclusive;  // condition (A3e)
  int refinements = 0;
  int steps_used = 0;
  // One node index per level of an avoiding discrete path (FAIL only).
  std::vector<Eigen::Index> witness;
};

// Two-sided monotone space-time reachability test for a curve avoiding the
// moving omega0. INCONCLUSIVE results are retried with the time step halved
// up to max_refinements times.
EscapeResult check_escape_curve(const MovingRegion& region, int max_refinements = 2);

struct GeometryReport {
  CoveringResult covering;
  ConnectivityResult connectivity;
  PilotCurveResult pilot;
  EscapeResult escape;

  bool admissible() const;  // all five verdicts PASS
};

GeometryReport analyze_geometry(const MovingRegion& region);

void write_geometry_report(std::ostream& out, const GeometryReport& report);
// level,t,components,coverage_fraction
void write_geometry_timeseries(std::ostream& out, const MovingRegion& region,
                               const GeometryReport& report);

}  // namespace viscoctl
