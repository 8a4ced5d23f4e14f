#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/SparseLU>

#include "viscoctl/region.hpp"

namespace viscoctl {

// Damping coefficient b(x) sampled at the interior nodes; viscosity is 1.
struct ProblemSpec {
  Field b;

  static ProblemSpec constant(const Grid& grid, double value);
  static ProblemSpec from_function(const Grid& grid, const std::function<double(const Point&)>& b);
  void validate(const Grid& grid) const;
};

// Crank-Nicolson stepping of u' = A u + G(t) with trapezoidal forcing:
//   (I - dt/2 A) u^{n+1} = (I + dt/2 A) u^n + dt/2 (G^n + G^{n+1}).
// The adjoint sweep applies the exact transposes of these maps.
class LinearEvolution {
 public:
  LinearEvolution(const SparseMatrix& A, double dt);

  Eigen::Index size() const { return n_; }
  double dt() const { return dt_; }
  const SparseMatrix& matrix() const { return A_; }

  // u^{n+1} from u^n and the forcing at both ends of the step (either may be null).
  Field step(const Field& u, const Field* g_now, const Field* g_next) const;

  // All levels 0..steps. `forcing` is empty or holds steps+1 state-sized fields.
  std::vector<Field> forward(const Field& u0, int steps, const std::vector<Field>& forcing = {}) const;
  Field forward_final(const Field& u0, int steps, const std::vector<Field>& forcing = {}) const;

  struct Adjoint {
    std::vector<Field> w;  // w^n, n = 0..steps, with w^steps the terminal datum
    std::vector<Field> r;  // r^n = (I - dt/2 A)^{-T} w^n for n >= 1; r^0 unused
  };
  // w^n = (I + dt/2 A)^T (I - dt/2 A)^{-T} w^{n+1}. For this sweep
  //   <u^M, w^M> - <u^0, w^0> = sum_k <G^k, pairing_k(w)>.
  Adjoint adjoint(const Field& wM, int steps) const;

  // pairing_k = dt/2 (r^k + r^{k+1}) with the out-of-range term dropped.
  static std::vector<Field> pairing(const Adjoint& adj, double dt);

 private:
  Eigen::Index n_;
  double dt_;
  SparseMatrix A_;
  SparseMatrix Q_;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
};

// State (y, z): y' = Lap y - (b-1) y + z, z' = -z + (b-1) y + chi h.
SparseMatrix coupled_operator(const Grid& grid, const ProblemSpec& spec);
// State (y, y_t): y'' = Lap y + Lap y_t - b y_t + chi h.
SparseMatrix viscoelastic_operator(const Grid& grid, const ProblemSpec& spec);
// State (v, y) for b = 1: v' = Lap v + chi h, y' = -y + v + chi k.
SparseMatrix cascade_operator(const Grid& grid);

Field stack(const Field& a, const Field& b);
Field upper(const Field& u);
Field lower(const Field& u);

enum class MaskMode { Sharp, Smoothed };
// Per-level multiplier for the control: 0/1 masks or the smoothed cutoff.
SpaceTimeField control_masks(const MovingRegion& region, RegionSet set = RegionSet::Omega,
                             MaskMode mode = MaskMode::Sharp);
// The same fixed mask at every level.
SpaceTimeField fixed_masks(const Grid& grid, const NodeMask& mask);

struct CoupledTrajectory {
  SpaceTimeField y;
  SpaceTimeField z;
};

struct ViscoTrajectory {
  SpaceTimeField y;
  SpaceTimeField yt;
  std::vector<double> energy;   // 1/2 (|y_t|^2 + <-Lap y, y>) per level
  std::vector<double> balance;  // per step: E^{n+1} - E^n minus dt (work - dissipation)
};

struct AdjointTrajectory {
  SpaceTimeField p;
  SpaceTimeField q;
  SpaceTimeField pairing_q;  // q-block pairing density (see LinearEvolution::pairing)
};

// h may be empty (no control). chi multiplies h level by level.
CoupledTrajectory solve_coupled_forward(const Grid& grid, const ProblemSpec& spec, const Field& y0,
                                        const Field& z0, const SpaceTimeField& chi,
                                        const SpaceTimeField& h = {});

ViscoTrajectory solve_viscoelastic(const Grid& grid, const ProblemSpec& spec, const Field& y0,
                                   const Field& y1, const SpaceTimeField& chi,
                                   const SpaceTimeField& h = {});

AdjointTrajectory solve_adjoint(const Grid& grid, const ProblemSpec& spec, const Field& p0,
                                const Field& q0);

struct SplittingReport {
  double viscoelastic = 0.0;  // max_n |D_t Y - Lap y - Lap Y + b Y - chi h|, Y = z + Lap y - (b-1) y
  double v_equation = 0.0;    // max_n |D_t v - Lap v - chi h - (1-b)(v-y)|, v = y + Y
  double y_equation = 0.0;    // max_n |D_t y + y - v|
  double max() const;
};

// Residuals of the reconstructed second-order equation and of the (v, y)
// split at levels 1..M-1, centered time differences, discrete L2 norms.
SplittingReport verify_splitting(const Grid& grid, const ProblemSpec& spec, const CoupledTrajectory& traj,
                                 const SpaceTimeField& chi, const SpaceTimeField& h = {});

// Relative defect of the discrete duality identity for random data drawn
// from `seed`.
double adjoint_consistency(const Grid& grid, const ProblemSpec& spec, const SpaceTimeField& chi,
                           unsigned long long seed);

// Least-squares slope of log(error) against log(step).
double fitted_order(const std::vector<double>& steps, const std::vector<double>& errors);

// t,norm_y,norm_z
void write_coupled_norms(std::ostream& out, const Grid& grid, const CoupledTrajectory& traj);
// t,norm_y,norm_yt,energy,balance
void write_visco_norms(std::ostream& out, const Grid& grid, const ViscoTrajectory& traj);

}  // namespace viscoctl
