#include "viscoctl/solvers.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "viscoctl/errors.hpp"

namespace viscoctl {

ProblemSpec ProblemSpec::constant(const Grid& grid, double value) {
  return ProblemSpec{Field::Constant(grid.size(), value)};
}

ProblemSpec ProblemSpec::from_function(const Grid& grid, const std::function<double(const Point&)>& b) {
  return ProblemSpec{grid.sample(b)};
}

void ProblemSpec::validate(const Grid& grid) const {
  check_same_size(grid, b, "damping coefficient");
  if (!b.allFinite()) throw PreconditionError("damping coefficient has non-finite values");
}

LinearEvolution::LinearEvolution(const SparseMatrix& A, double dt) : n_(A.rows()), dt_(dt), A_(A) {
  if (A.rows() != A.cols()) throw PreconditionError("evolution operator must be square");
  if (!(dt > 0.0)) throw PreconditionError("time step must be positive");
  SparseMatrix I(n_, n_);
  I.setIdentity();
  SparseMatrix P = I - (0.5 * dt) * A;
  Q_ = I + (0.5 * dt) * A;
  P.makeCompressed();
  lu_ = std::make_shared<Eigen::SparseLU<SparseMatrix>>();
  lu_->analyzePattern(P);
  lu_->factorize(P);
  if (lu_->info() != Eigen::Success)
    throw NumericalError("implicit step matrix factorization failed: " + lu_->lastErrorMessage());
}

Field LinearEvolution::step(const Field& u, const Field* g_now, const Field* g_next) const {
  Field rhs = Q_ * u;
  if (g_now) rhs += (0.5 * dt_) * *g_now;
  if (g_next) rhs += (0.5 * dt_) * *g_next;
  Field out = lu_->solve(rhs);
  if (lu_->info() != Eigen::Success || !out.allFinite())
    throw NumericalError("implicit step solve failed");
  return out;
}

namespace {

void check_forcing(const std::vector<Field>& forcing, int steps, Eigen::Index n) {
  if (forcing.empty()) return;
  if (int(forcing.size()) != steps + 1) throw PreconditionError("forcing must have one field per level");
  for (const auto& f : forcing)
    if (f.size() != n) throw PreconditionError("forcing field has the wrong size");
}

}  // namespace

std::vector<Field> LinearEvolution::forward(const Field& u0, int steps, const std::vector<Field>& forcing) const {
  if (u0.size() != n_) throw PreconditionError("initial state has the wrong size");
  check_forcing(forcing, steps, n_);
  std::vector<Field> u;
  u.reserve(std::size_t(steps) + 1);
  u.push_back(u0);
  for (int k = 0; k < steps; ++k) {
    const Field* a = forcing.empty() ? nullptr : &forcing[k];
    const Field* b = forcing.empty() ? nullptr : &forcing[k + 1];
    u.push_back(step(u.back(), a, b));
  }
  return u;
}

Field LinearEvolution::forward_final(const Field& u0, int steps, const std::vector<Field>& forcing) const {
  if (u0.size() != n_) throw PreconditionError("initial state has the wrong size");
  check_forcing(forcing, steps, n_);
  Field u = u0;
  for (int k = 0; k < steps; ++k) {
    const Field* a = forcing.empty() ? nullptr : &forcing[k];
    const Field* b = forcing.empty() ? nullptr : &forcing[k + 1];
    u = step(u, a, b);
  }
  return u;
}

LinearEvolution::Adjoint LinearEvolution::adjoint(const Field& wM, int steps) const {
  if (wM.size() != n_) throw PreconditionError("terminal adjoint datum has the wrong size");
  Adjoint out;
  out.w.assign(std::size_t(steps) + 1, Field());
  out.r.assign(std::size_t(steps) + 1, Field::Zero(n_));
  out.w[steps] = wM;
  for (int k = steps; k >= 1; --k) {
    out.r[k] = lu_->transpose().solve(out.w[k]);
    out.w[k - 1] = Q_.transpose() * out.r[k];
  }
  return out;
}

std::vector<Field> LinearEvolution::pairing(const Adjoint& adj, double dt) {
  const int steps = int(adj.w.size()) - 1;
  std::vector<Field> g(adj.w.size(), Field::Zero(adj.w.front().size()));
  for (int k = 0; k <= steps; ++k) {
    if (k >= 1) g[k] += adj.r[k];
    if (k + 1 <= steps) g[k] += adj.r[k + 1];
    g[k] *= 0.5 * dt;
  }
  return g;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_block(Triplets& t, const SparseMatrix& m, Eigen::Index r0, Eigen::Index c0) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
}

void add_diagonal(Triplets& t, const Field& d, Eigen::Index r0, Eigen::Index c0) {
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (d[i] != 0.0) t.emplace_back(r0 + i, c0 + i, d[i]);
}

SparseMatrix assemble(Eigen::Index n, const Triplets& t) {
  SparseMatrix A(2 * n, 2 * n);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

}  // namespace

SparseMatrix coupled_operator(const Grid& grid, const ProblemSpec& spec) {
  spec.validate(grid);
  const Eigen::Index n = grid.size();
  const Field bm1 = spec.b.array() - 1.0;
  Triplets t;
  add_block(t, laplacian_matrix(grid), 0, 0);
  add_diagonal(t, -bm1, 0, 0);
  add_diagonal(t, Field::Ones(n), 0, n);
  add_diagonal(t, bm1, n, 0);
  add_diagonal(t, -Field::Ones(n), n, n);
  return assemble(n, t);
}

SparseMatrix viscoelastic_operator(const Grid& grid, const ProblemSpec& spec) {
  spec.validate(grid);
  const Eigen::Index n = grid.size();
  const SparseMatrix L = laplacian_matrix(grid);
  Triplets t;
  add_diagonal(t, Field::Ones(n), 0, n);
  add_block(t, L, n, 0);
  add_block(t, L, n, n);
  add_diagonal(t, -spec.b, n, n);
  return assemble(n, t);
}

SparseMatrix cascade_operator(const Grid& grid) {
  const Eigen::Index n = grid.size();
  Triplets t;
  add_block(t, laplacian_matrix(grid), 0, 0);
  add_diagonal(t, Field::Ones(n), n, 0);
  add_diagonal(t, -Field::Ones(n), n, n);
  return assemble(n, t);
}

Field stack(const Field& a, const Field& b) {
  Field u(a.size() + b.size());
  u << a, b;
  return u;
}

Field upper(const Field& u) { return u.head(u.size() / 2); }
Field lower(const Field& u) { return u.tail(u.size() / 2); }

SpaceTimeField control_masks(const MovingRegion& region, RegionSet set, MaskMode mode) {
  SpaceTimeField chi;
  chi.reserve(std::size_t(region.levels()));
  if (mode == MaskMode::Smoothed) {
    for (const auto& z : region.zeta) chi.push_back(z);
    return chi;
  }
  for (const auto& m : region.masks(set)) chi.push_back(as_field(m));
  return chi;
}

SpaceTimeField fixed_masks(const Grid& grid, const NodeMask& mask) {
  if (Eigen::Index(mask.size()) != grid.size()) throw PreconditionError("mask has the wrong size");
  return SpaceTimeField(std::size_t(grid.steps()) + 1, as_field(mask));
}

namespace {

std::vector<Field> control_forcing(const Grid& grid, const SpaceTimeField& chi, const SpaceTimeField& h,
                                   bool lower_block) {
  if (h.empty()) return {};
  check_levels(grid, h, "control");
  check_levels(grid, chi, "control mask");
  const Eigen::Index n = grid.size();
  std::vector<Field> g;
  g.reserve(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    Field f = Field::Zero(2 * n);
    f.segment(lower_block ? n : 0, n) = chi[k].cwiseProduct(h[k]);
    g.push_back(std::move(f));
  }
  return g;
}

}  // namespace

CoupledTrajectory solve_coupled_forward(const Grid& grid, const ProblemSpec& spec, const Field& y0,
                                        const Field& z0, const SpaceTimeField& chi, const SpaceTimeField& h) {
  check_same_size(grid, y0, "y0");
  check_same_size(grid, z0, "z0");
  const LinearEvolution evo(coupled_operator(grid, spec), grid.dt());
  const auto u = evo.forward(stack(y0, z0), grid.steps(), control_forcing(grid, chi, h, true));
  CoupledTrajectory out;
  for (const auto& s : u) {
    out.y.push_back(upper(s));
    out.z.push_back(lower(s));
  }
  return out;
}

ViscoTrajectory solve_viscoelastic(const Grid& grid, const ProblemSpec& spec, const Field& y0,
                                   const Field& y1, const SpaceTimeField& chi, const SpaceTimeField& h) {
  check_same_size(grid, y0, "y0");
  check_same_size(grid, y1, "y1");
  const LinearEvolution evo(viscoelastic_operator(grid, spec), grid.dt());
  const auto g = control_forcing(grid, chi, h, true);
  const auto u = evo.forward(stack(y0, y1), grid.steps(), g);
  ViscoTrajectory out;
  for (const auto& s : u) {
    out.y.push_back(upper(s));
    out.yt.push_back(lower(s));
    const Field& v = out.yt.back();
    out.energy.push_back(0.5 * (inner(grid, v, v) - inner(grid, apply_laplacian(grid, out.y.back()), out.y.back())));
  }
  const double dt = grid.dt();
  for (int k = 0; k < grid.steps(); ++k) {
    const Field vbar = 0.5 * (out.yt[k] + out.yt[k + 1]);
    double rate = inner(grid, apply_laplacian(grid, vbar), vbar) - inner(grid, spec.b.cwiseProduct(vbar), vbar);
    if (!g.empty()) rate += inner(grid, 0.5 * (lower(g[k]) + lower(g[k + 1])), vbar);
    out.balance.push_back(out.energy[k + 1] - out.energy[k] - dt * rate);
  }
  return out;
}

AdjointTrajectory solve_adjoint(const Grid& grid, const ProblemSpec& spec, const Field& p0, const Field& q0) {
  check_same_size(grid, p0, "p0");
  check_same_size(grid, q0, "q0");
  const LinearEvolution evo(coupled_operator(grid, spec), grid.dt());
  const auto adj = evo.adjoint(stack(p0, q0), grid.steps());
  const auto pair = LinearEvolution::pairing(adj, grid.dt());
  AdjointTrajectory out;
  for (std::size_t k = 0; k < adj.w.size(); ++k) {
    out.p.push_back(upper(adj.w[k]));
    out.q.push_back(lower(adj.w[k]));
    out.pairing_q.push_back(lower(pair[k]));
  }
  return out;
}

double SplittingReport::max() const { return std::max({viscoelastic, v_equation, y_equation}); }

SplittingReport verify_splitting(const Grid& grid, const ProblemSpec& spec, const CoupledTrajectory& traj,
                                 const SpaceTimeField& chi, const SpaceTimeField& h) {
  spec.validate(grid);
  check_levels(grid, traj.y, "y");
  check_levels(grid, traj.z, "z");
  const int M = grid.steps();
  const double dt = grid.dt();
  const Field bm1 = spec.b.array() - 1.0;
  SpaceTimeField Y, v;
  for (int n = 0; n <= M; ++n) {
    Y.push_back(traj.z[n] + apply_laplacian(grid, traj.y[n]) - bm1.cwiseProduct(traj.y[n]));
    v.push_back(traj.y[n] + Y.back());
  }
  SplittingReport r;
  for (int n = 1; n < M; ++n) {
    Field force = Field::Zero(grid.size());
    if (!h.empty()) force = chi[n].cwiseProduct(h[n]);
    const Field dY = (Y[n + 1] - Y[n - 1]) / (2.0 * dt);
    const Field dv = (v[n + 1] - v[n - 1]) / (2.0 * dt);
    const Field dy = (traj.y[n + 1] - traj.y[n - 1]) / (2.0 * dt);
    const Field r1 = dY - apply_laplacian(grid, traj.y[n] + Y[n]) + spec.b.cwiseProduct(Y[n]) - force;
    const Field r2 = dv - apply_laplacian(grid, v[n]) - force + bm1.cwiseProduct(v[n] - traj.y[n]);
    const Field r3 = dy + traj.y[n] - v[n];
    r.viscoelastic = std::max(r.viscoelastic, l2_norm(grid, r1));
    r.v_equation = std::max(r.v_equation, l2_norm(grid, r2));
    r.y_equation = std::max(r.y_equation, l2_norm(grid, r3));
  }
  return r;
}

double adjoint_consistency(const Grid& grid, const ProblemSpec& spec, const SpaceTimeField& chi,
                           unsigned long long seed) {
  check_levels(grid, chi, "control mask");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto random_field = [&] {
    Field f(grid.size());
    for (auto& v : f) v = normal(rng);
    return f;
  };
  const Field y0 = random_field(), z0 = random_field(), p0 = random_field(), q0 = random_field();
  SpaceTimeField h;
  for (int n = 0; n <= grid.steps(); ++n) h.push_back(random_field());

  const CoupledTrajectory fwd = solve_coupled_forward(grid, spec, y0, z0, chi, h);
  const AdjointTrajectory adj = solve_adjoint(grid, spec, p0, q0);
  const int M = grid.steps();
  const double end = inner(grid, fwd.y[M], p0) + inner(grid, fwd.z[M], q0);
  const double start = inner(grid, y0, adj.p[0]) + inner(grid, z0, adj.q[0]);
  double obs = 0.0, obs_abs = 0.0;
  for (int k = 0; k <= M; ++k) {
    const double term = inner(grid, chi[k].cwiseProduct(h[k]), adj.pairing_q[k]);
    obs += term;
    obs_abs += std::abs(term);
  }
  const double scale = std::abs(end) + std::abs(start) + obs_abs;
  return scale > 0.0 ? std::abs(end - start - obs) / scale : 0.0;
}

double fitted_order(const std::vector<double>& steps, const std::vector<double>& errors) {
  if (steps.size() != errors.size() || steps.size() < 2)
    throw PreconditionError("order fit needs at least two matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i] > 0.0) || !(errors[i] > 0.0)) throw PreconditionError("order fit needs positive samples");
    const double x = std::log(steps[i]), y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_coupled_norms(std::ostream& out, const Grid& grid, const CoupledTrajectory& traj) {
  out << std::setprecision(12) << "t,norm_y,norm_z\n";
  for (std::size_t n = 0; n < traj.y.size(); ++n)
    out << grid.time(int(n)) << ',' << l2_norm(grid, traj.y[n]) << ',' << l2_norm(grid, traj.z[n]) << '\n';
}

void write_visco_norms(std::ostream& out, const Grid& grid, const ViscoTrajectory& traj) {
  out << std::setprecision(12) << "t,norm_y,norm_yt,energy,balance\n";
  for (std::size_t n = 0; n < traj.y.size(); ++n) {
    out << grid.time(int(n)) << ',' << l2_norm(grid, traj.y[n]) << ',' << l2_norm(grid, traj.yt[n]) << ','
        << traj.energy[n] << ',';
    if (n > 0) out << traj.balance[n - 1];
    out << '\n';
  }
}

}  // namespace viscoctl
