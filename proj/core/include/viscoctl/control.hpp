#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "viscoctl/geometry.hpp"
#include "viscoctl/solvers.hpp"

namespace viscoctl {

struct CGOptions {
  double rel_tol = 1e-8;
  int max_iter = 500;
};

// Linear system u' = A u + chi h acting on the state block
// [offset, offset + grid.size()), with the pairings of LinearEvolution.
// Control space inner product: sum_k tau_k <h_k, h'_k> with trapezoid
// weights tau_k.
struct ControlSystem {
  Grid grid;
  std::shared_ptr<const LinearEvolution> evo;
  Eigen::Index offset = 0;
  SpaceTimeField chi;

  Eigen::Index state_size() const { return evo->size(); }
  double tau(int level) const;

  std::vector<Field> forcing(const SpaceTimeField& h) const;
  Field free_final(const Field& u0) const;
  Field apply_L(const SpaceTimeField& h) const;
  SpaceTimeField apply_Lstar(const Field& w) const;
  // Adjoint state at level 0 for terminal datum w.
  Field adjoint_initial(const Field& w) const;
  Field gramian(const Field& w) const;
  double control_norm_sq(const SpaceTimeField& h) const;
};

ControlSystem coupled_system(const Grid& grid, const ProblemSpec& spec, SpaceTimeField chi);
ControlSystem heat_system(const Grid& grid, SpaceTimeField chi);
// y' = -y + chi k, the ODE part of the cascade.
ControlSystem transport_system(const Grid& grid, SpaceTimeField chi);

struct CGResult {
  Field x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residuals;  // relative to |b|
};

// Conjugate-residual iteration for a symmetric positive semidefinite
// operator; the residual norm is monotone.
template <typename Apply>
CGResult conjugate_residual(Apply&& apply, const Field& b, const CGOptions& opt);

struct HUMReport {
  double beta_rel = 0.0;
  double beta_abs = 0.0;
  double gramian_max = 0.0;  // power-iteration estimate of lambda_max
  int iterations = 0;
  bool converged = false;
  std::vector<double> residuals;
  double initial_norm = 0.0;
  double terminal_norm = 0.0;  // recomputed by a forward solve with the stored control
  std::vector<double> terminal_blocks;  // per state block (y, z or v, y)
  double cost = 0.0;                    // sum_k tau_k |chi h_k|^2
  double dual_value = 0.0;              // J* = 1/2 <(Lambda + beta) w, w>
  double bound = 0.0;                   // sqrt(2 beta J*)
};

struct HUMResult {
  SpaceTimeField h;
  Field dual;  // terminal adjoint datum
  HUMReport report;
};

double gramian_max_eigenvalue(const ControlSystem& sys, int iterations = 30, unsigned long long seed = 1);

// Solves (Lambda + beta) w = -u_free(T), h = L* w, beta = beta_rel * lambda_max.
HUMResult penalized_hum(const ControlSystem& sys, const Field& u0, double beta_rel, const CGOptions& opt = {});

// Heat null control on [0, grid.horizon()] supported in a fixed mask.
HUMResult heat_hum_control(const Grid& grid, const Field& v0, const NodeMask& region, double beta_rel = 1e-8,
                           const CGOptions& opt = {});

HUMResult hum_control_coupled(const Grid& grid, const ProblemSpec& spec, const SpaceTimeField& chi,
                              const Field& y0, const Field& z0, double beta_rel = 1e-8,
                              const CGOptions& opt = {});

struct CascadeParameters {
  double epsilon = 0.0;
  int level = 0;
  NodeMask omega_m1;
};

// Largest epsilon (one step of slack) with full coverage on [epsilon, T] and
// the largest node box inside the omega0 masks on [0, epsilon].
CascadeParameters choose_cascade_parameters(const MovingRegion& region);

struct CascadeResult {
  SpaceTimeField h;  // heat control, nonzero only at levels <= level_eps
  SpaceTimeField k;  // ODE control, nonzero only at levels >= level_eps
  HUMReport phase1;
  int level_eps = 0;
  double delta0 = 0.0;
  Field q0;
  Field w;         // sum_n dt chi_n e^{2 (t_n - T)} over levels >= level_eps
  Field w_scheme;  // the same sum with the step's own weights, used for q0
  double w_lower = 0.0;  // e^{2 (eps - T)} delta0
  bool w_bound_holds = false;
  double initial_norm = 0.0;  // |v0| + |y0|
  double terminal_v = 0.0;
  double terminal_y = 0.0;
  CascadeParameters params;
};

// Two-phase control of v' = Lap v + chi h, y' = -y + v + chi k (b = 1).
// Throws PreconditionError if omega_{-1} leaves the omega0 masks on
// [0, eps] or coverage on [eps, T] fails.
CascadeResult cascade_control(const MovingRegion& region, const Field& v0, const Field& y0,
                              const CascadeParameters& params, double beta_rel = 1e-8,
                              const CGOptions& opt = {});

struct ObservabilityOptions {
  bool q_only = false;        // restrict terminal data to the controlled block
  bool terminal_lhs = false;  // |w(T)|^2 instead of |w(0)|^2 on the left
  int max_outer = 300;
  int block = 4;              // iterated subspace dimension
  double rel_tol = 1e-8;      // on |R^{-T} E x - mu R x| / (mu |R x|), Lambda = R^T R
  unsigned long long seed = 1;
};

struct ObservabilityEstimate {
  Verdict status = Verdict::Inconclusive;  // PASS when the certificate meets rel_tol
  double c_obs = 0.0;  // Rayleigh quotient <E x, x> / <Lambda x, x>; always a lower bound
  double residual = 0.0;
  int iterations = 0;
  Eigen::Index dimension = 0;
};

// Factors of the two quadratic forms over terminal adjoint data x:
//   <Lambda x, x> = |K x|^2,  <E x, x> = |S x|^2.
// K stacks sqrt(cell / tau_k) chi_k pairing_k(x) over the levels, S is the
// adjoint state at level 0 (or the identity with terminal_lhs), scaled by
// sqrt(cell).
struct ObservabilityFactors {
  Eigen::MatrixXd K;
  Eigen::MatrixXd S;
};

ObservabilityFactors assemble_observability(const ControlSystem& sys, const ObservabilityOptions& opt);

// Largest mu with E v = mu Lambda v by block inverse iteration
// X <- Lambda^{-1} E X with Rayleigh-Ritz extraction.
// Lambda^{-1} is applied through a Householder QR of K.
ObservabilityEstimate estimate_observability_constant(const ControlSystem& sys, const ObservabilityOptions& opt = {});

void write_hum_report(std::ostream& out, const HUMReport& r);
// iteration,residual
void write_residual_csv(std::ostream& out, const HUMReport& r);
void write_cascade_report(std::ostream& out, const CascadeResult& r);
void write_observability_report(std::ostream& out, const ObservabilityEstimate& e);

// ----------------------------------------------------------------------------

template <typename Apply>
CGResult conjugate_residual(Apply&& apply, const Field& b, const CGOptions& opt) {
  CGResult out;
  out.x = Field::Zero(b.size());
  const double bn = b.norm();
  if (bn == 0.0) {
    out.converged = true;
    out.residuals.push_back(0.0);
    return out;
  }
  Field r = b;
  Field Ar = apply(r);
  Field p = r, Ap = Ar;
  double rAr = r.dot(Ar);
  out.residuals.push_back(1.0);
  for (int it = 0; it < opt.max_iter; ++it) {
    const double ApAp = Ap.squaredNorm();
    if (!(ApAp > 0.0) || !(rAr > 0.0)) break;
    const double alpha = rAr / ApAp;
    out.x += alpha * p;
    r -= alpha * Ap;
    out.iterations = it + 1;
    const double rel = r.norm() / bn;
    out.residuals.push_back(rel);
    if (rel <= opt.rel_tol) {
      out.converged = true;
      break;
    }
    Ar = apply(r);
    const double rAr_new = r.dot(Ar);
    const double beta = rAr_new / rAr;
    rAr = rAr_new;
    p = r + beta * p;
    Ap = Ar + beta * Ap;
  }
  return out;
}

}  // namespace viscoctl
