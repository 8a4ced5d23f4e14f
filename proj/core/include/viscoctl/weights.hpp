#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "viscoctl/geometry.hpp"

namespace viscoctl {

// Separable positive weight vanishing on the boundary whose only critical
// point is `center`: prod_i p_i(L_i * B_i(x_i / L_i)) with p(u) = u (L - u)
// and B a Moebius remap of [0, 1] sending center_i / L_i to 1/2.
class BaseWeight {
 public:
  BaseWeight(const Grid& grid, const Point& center);

  double operator()(const Point& x) const;
  Point gradient(const Point& x) const;
  const Point& center() const { return center_; }

 private:
  double axis_value(int axis, double x) const;
  double axis_slope(int axis, double x) const;

  int dim_;
  std::array<double, 2> length_{};
  std::array<double, 2> ratio_{};
  Point center_;
};

// Builds the base weight and scans the interior nodes for a vanishing
// gradient outside B(center, eps). Throws PreconditionError if
// B(center, 3 eps) leaves the domain and NumericalError on a stray
// critical point.
BaseWeight build_base_weight(const Grid& grid, const Point& center, double eps);

// MovingCenter: psi1(., t) is the base weight centred at Gamma(t).
// PilotFlow: psi1(x, t) = base(Xp(x, 0, t)) with Xp the flow carrying
// B(Gamma, eps) rigidly and fading out at radius 2 eps.
enum class Psi1Mode { MovingCenter, PilotFlow };

struct WeightOptions {
  Psi1Mode psi1_mode = Psi1Mode::MovingCenter;
  double tol_grad_rel = 1e-3;
  double tol_t_rel = 1e-3;
  int max_doublings = 20;
};

struct WeightSet {
  Grid grid;
  SpaceTimeField psi;   // normalised so that max |psi| = 1
  SpaceTimeField psi1;  // unscaled pieces, kept for diagnostics
  SpaceTimeField psi2;
  std::vector<double> g;  // per level; +inf at levels 0 and M
  double psi_max = 0.0;
  double scale = 1.0;  // psi = (psi1 + C2 psi2 + C3) / scale
  double delta = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  double epsilon = 0.0;
  Point pilot_seed = Point::Zero();
  std::vector<Point> pilot_curve;
  std::vector<NodeMask> omega1;  // region where no property is required

  double lambda = 0.0;
  double s = 0.0;
  SpaceTimeField phi;
  SpaceTimeField theta;
  // exp(-2 s phi) = exp_weight * exp(log_weight_shift); entries below 1e-300
  // are stored as 0.
  SpaceTimeField exp_weight;
  double log_weight_shift = 0.0;

  // Closed form of psi, when psi did not come from build_psi.
  std::function<double(const Point&, double)> exact;

  int levels() const { return int(psi.size()); }
  // Value of psi at the ghost node beyond interior node i along `axis`
  // (side -1 or +1).
  double ghost_psi(int level, Eigen::Index i, int axis, int side) const;
};

// Centered-difference gradient of psi using its boundary values as ghosts.
std::array<Field, 2> psi_gradient(const WeightSet& ws, int level);
// Five-point Laplacian of psi with the same ghosts.
Field psi_laplacian(const WeightSet& ws, int level);
// Centered in time, one-sided at the first and last level.
Field psi_time_derivative(const WeightSet& ws, int level);

// psi2 = t * S with S = +1 on the component present at t = 0, -1 on the one
// present at t = T and a distance-ratio blend on the one-cell closure of the
// moving omega0. Throws NumericalError on ambiguous component tracking.
SpaceTimeField build_psi2(const MovingRegion& region);

SpaceTimeField build_psi1(const MovingRegion& region, const std::vector<Point>& pilot, double eps,
                          Psi1Mode mode);

WeightSet build_psi(const MovingRegion& region, const GeometryReport& geometry,
                    const WeightOptions& options = {});

struct PropertyCheck {
  bool pass = false;
  double margin = 0.0;  // positive when satisfied
  int level = -1;
  Eigen::Index node = -1;
  bool checked = false;  // false when the property's sample set is empty
};

struct PsiPropertyReport {
  std::array<PropertyCheck, 6> p;
  double tol_grad = 0.0;
  double tol_t = 0.0;
  bool all_pass() const;
};

PsiPropertyReport verify_psi_properties(const WeightSet& ws, const WeightOptions& options = {});

// g(t) = 1/t on (0, delta/2], a monotone C1 cubic up to 1 at delta, 1 until
// T/2 and mirrored afterwards. Sampled at levels 0..M with +inf at the ends.
double g_value(double t, double delta, double horizon);
std::vector<double> build_g(double delta, double horizon, int steps);

// Populates phi, theta and the shifted exp(-2 s phi).
void eval_weights(WeightSet& ws, double lambda, double s);

// max over levels in [delta, T - delta] of |theta_t| / (lambda theta^2).
double theta_time_ratio(const WeightSet& ws);

// psi = C3 + a cos(2 pi x / L) + C2 t (T - t): periodic in x, with a time
// derivative that must change sign.
WeightSet periodic_candidate(const Grid& grid, double a, double C2, double C3);

void write_psi_report(std::ostream& out, const WeightSet& ws, const PsiPropertyReport& r);
// level,t,x[,y],psi,phi,theta (phi/theta omitted before eval_weights)
void write_weights_csv(std::ostream& out, const WeightSet& ws, int level_stride = 1);

}  // namespace viscoctl
