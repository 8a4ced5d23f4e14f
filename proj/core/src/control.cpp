#include "viscoctl/control.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "viscoctl/errors.hpp"

namespace viscoctl {

double ControlSystem::tau(int level) const {
  const double dt = grid.dt();
  return (level == 0 || level == grid.steps()) ? 0.5 * dt : dt;
}

std::vector<Field> ControlSystem::forcing(const SpaceTimeField& h) const {
  check_levels(grid, h, "control");
  std::vector<Field> g;
  g.reserve(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    Field f = Field::Zero(state_size());
    f.segment(offset, grid.size()) = chi[k].cwiseProduct(h[k]);
    g.push_back(std::move(f));
  }
  return g;
}

Field ControlSystem::free_final(const Field& u0) const { return evo->forward_final(u0, grid.steps()); }

Field ControlSystem::apply_L(const SpaceTimeField& h) const {
  return evo->forward_final(Field::Zero(state_size()), grid.steps(), forcing(h));
}

namespace {

SpaceTimeField lstar_from(const ControlSystem& sys, const LinearEvolution::Adjoint& adj) {
  const auto pair = LinearEvolution::pairing(adj, sys.grid.dt());
  SpaceTimeField h;
  h.reserve(pair.size());
  for (int k = 0; k < int(pair.size()); ++k)
    h.push_back(sys.chi[k].cwiseProduct(pair[k].segment(sys.offset, sys.grid.size())) / sys.tau(k));
  return h;
}

}  // namespace

SpaceTimeField ControlSystem::apply_Lstar(const Field& w) const {
  return lstar_from(*this, evo->adjoint(w, grid.steps()));
}

Field ControlSystem::adjoint_initial(const Field& w) const { return evo->adjoint(w, grid.steps()).w.front(); }

Field ControlSystem::gramian(const Field& w) const { return apply_L(apply_Lstar(w)); }

double ControlSystem::control_norm_sq(const SpaceTimeField& h) const {
  double s = 0.0;
  for (int k = 0; k < int(h.size()); ++k) {
    const Field ch = chi[k].cwiseProduct(h[k]);
    s += tau(k) * inner(grid, ch, ch);
  }
  return s;
}

namespace {

ControlSystem make_system(const Grid& grid, const SparseMatrix& A, Eigen::Index offset, SpaceTimeField chi) {
  check_levels(grid, chi, "control mask");
  ControlSystem sys;
  sys.grid = grid;
  sys.evo = std::make_shared<const LinearEvolution>(A, grid.dt());
  sys.offset = offset;
  sys.chi = std::move(chi);
  return sys;
}

}  // namespace

ControlSystem coupled_system(const Grid& grid, const ProblemSpec& spec, SpaceTimeField chi) {
  return make_system(grid, coupled_operator(grid, spec), grid.size(), std::move(chi));
}

ControlSystem heat_system(const Grid& grid, SpaceTimeField chi) {
  return make_system(grid, laplacian_matrix(grid), 0, std::move(chi));
}

ControlSystem transport_system(const Grid& grid, SpaceTimeField chi) {
  SparseMatrix A(grid.size(), grid.size());
  A.setIdentity();
  A *= -1.0;
  return make_system(grid, A, 0, std::move(chi));
}

double gramian_max_eigenvalue(const ControlSystem& sys, int iterations, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Field x(sys.state_size());
  for (auto& v : x) v = normal(rng);
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Field y = sys.gramian(x);
    lambda = x.dot(y);
    const double n = y.norm();
    if (!(n > 0.0)) return 0.0;
    x = y / n;
  }
  return lambda;
}

namespace {

std::vector<double> block_norms(const Grid& grid, const Field& u) {
  std::vector<double> out;
  for (Eigen::Index off = 0; off < u.size(); off += grid.size())
    out.push_back(l2_norm(grid, u.segment(off, grid.size())));
  return out;
}

double state_norm(const Grid& grid, const Field& u) {
  return std::sqrt(grid.cell_measure()) * u.norm();
}

}  // namespace

HUMResult penalized_hum(const ControlSystem& sys, const Field& u0, double beta_rel, const CGOptions& opt) {
  if (!(beta_rel > 0.0)) throw PreconditionError("penalization must be positive");
  if (u0.size() != sys.state_size()) throw PreconditionError("initial state has the wrong size");
  HUMResult res;
  HUMReport& r = res.report;
  r.beta_rel = beta_rel;
  r.initial_norm = state_norm(sys.grid, u0);
  r.gramian_max = gramian_max_eigenvalue(sys);
  r.beta_abs = beta_rel * r.gramian_max;

  const Field u_free = sys.free_final(u0);
  auto apply = [&](const Field& w) -> Field { return sys.gramian(w) + r.beta_abs * w; };
  const CGResult cg = conjugate_residual(apply, -u_free, opt);
  r.iterations = cg.iterations;
  r.converged = cg.converged;
  r.residuals = cg.residuals;
  res.dual = cg.x;
  res.h = sys.apply_Lstar(res.dual);

  const Field uT = sys.evo->forward_final(u0, sys.grid.steps(), sys.forcing(res.h));
  r.terminal_norm = state_norm(sys.grid, uT);
  r.terminal_blocks = block_norms(sys.grid, uT);
  r.cost = sys.control_norm_sq(res.h);
  r.dual_value = 0.5 * sys.grid.cell_measure() * res.dual.dot(apply(res.dual));
  r.bound = std::sqrt(2.0 * r.beta_abs * std::max(0.0, r.dual_value));
  return res;
}

HUMResult heat_hum_control(const Grid& grid, const Field& v0, const NodeMask& region, double beta_rel,
                           const CGOptions& opt) {
  if (count(region) == 0) throw PreconditionError("heat control region is empty");
  check_same_size(grid, v0, "v0");
  return penalized_hum(heat_system(grid, fixed_masks(grid, region)), v0, beta_rel, opt);
}

HUMResult hum_control_coupled(const Grid& grid, const ProblemSpec& spec, const SpaceTimeField& chi,
                              const Field& y0, const Field& z0, double beta_rel, const CGOptions& opt) {
  check_same_size(grid, y0, "y0");
  check_same_size(grid, z0, "z0");
  return penalized_hum(coupled_system(grid, spec, chi), stack(y0, z0), beta_rel, opt);
}

namespace {

// Largest all-ones rectangle of nodes (a run in 1D).
NodeMask largest_box(const Grid& g, const NodeMask& m) {
  const int nx = g.interior(0), ny = g.dimension() == 2 ? g.interior(1) : 1;
  std::vector<int> height(std::size_t(nx), 0);
  int best = 0, bx0 = 0, bx1 = -1, by0 = 0, by1 = -1;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) height[ix] = m[g.index(ix, iy)] ? height[ix] + 1 : 0;
    for (int ix = 0; ix < nx; ++ix) {
      int hmin = height[ix];
      for (int jx = ix; jx < nx && hmin > 0; ++jx) {
        hmin = std::min(hmin, height[jx]);
        const int area = hmin * (jx - ix + 1);
        if (area > best) {
          best = area;
          bx0 = ix;
          bx1 = jx;
          by0 = iy - hmin + 1;
          by1 = iy;
        }
      }
    }
  }
  NodeMask out(m.size(), 0);
  for (int iy = by0; iy <= by1; ++iy)
    for (int ix = bx0; ix <= bx1; ++ix) out[g.index(ix, iy)] = 1;
  return out;
}

}  // namespace

CascadeParameters choose_cascade_parameters(const MovingRegion& region) {
  const Grid& g = region.grid;
  std::vector<int> last(std::size_t(g.size()), -1);
  for (int n = 0; n < region.levels(); ++n)
    for (Eigen::Index i = 0; i < g.size(); ++i)
      if (region.omega0[n][i]) last[i] = n;
  const int m_max = *std::min_element(last.begin(), last.end());
  if (m_max < 2) throw PreconditionError("cascade: no epsilon > 0 leaves full coverage on [epsilon, T]");
  CascadeParameters p;
  p.level = m_max - 1;
  p.epsilon = g.time(p.level);
  NodeMask common(std::size_t(g.size()), 1);
  for (int n = 0; n <= p.level; ++n)
    for (Eigen::Index i = 0; i < g.size(); ++i) common[i] = common[i] && region.omega0[n][i];
  if (count(common) == 0) throw PreconditionError("cascade: omega0 masks on [0, epsilon] have no common node");
  p.omega_m1 = largest_box(g, common);
  return p;
}

CascadeResult cascade_control(const MovingRegion& region, const Field& v0, const Field& y0,
                              const CascadeParameters& params, double beta_rel, const CGOptions& opt) {
  const Grid& g = region.grid;
  check_same_size(g, v0, "v0");
  check_same_size(g, y0, "y0");
  const int M = g.steps();
  const int m = params.level;
  const double dt = g.dt(), T = g.horizon();
  if (m < 1 || m >= M || std::abs(g.time(m) - params.epsilon) > 1e-9 * T)
    throw PreconditionError("cascade: epsilon must be a time level strictly inside (0, T)");
  if (Eigen::Index(params.omega_m1.size()) != g.size() || count(params.omega_m1) == 0)
    throw PreconditionError("cascade: omega_{-1} mask is empty or has the wrong size");
  for (int n = 0; n <= m; ++n)
    for (Eigen::Index i = 0; i < g.size(); ++i)
      if (params.omega_m1[i] && !region.omega0[n][i]) {
        std::ostringstream msg;
        msg << "cascade: omega_{-1} leaves the moving omega0 at level " << n << " (t = " << g.time(n) << ")";
        throw PreconditionError(msg.str());
      }
  const CoveringResult cover = check_covering(region, m);
  if (cover.verdict != Verdict::Pass)
    throw PreconditionError("cascade: omega0 does not cover the domain on [epsilon, T] (" +
                            std::to_string(cover.uncovered_nodes) + " nodes never covered)");

  CascadeResult out;
  out.params = params;
  out.level_eps = m;
  out.delta0 = cover.delta0;
  out.initial_norm = l2_norm(g, v0) + l2_norm(g, y0);

  // Phase 1: heat control on [0, eps] in the fixed omega_{-1}.
  const Grid sub = g.with_horizon(params.epsilon, m);
  const HUMResult heat = heat_hum_control(sub, v0, params.omega_m1, beta_rel, opt);
  out.phase1 = heat.report;

  const Eigen::Index n = g.size();
  const LinearEvolution evo(cascade_operator(g), dt);
  const Field chi_m1 = as_field(params.omega_m1);
  std::vector<Field> f1;
  for (int k = 0; k <= m; ++k) {
    Field f = Field::Zero(2 * n);
    f.head(n) = chi_m1.cwiseProduct(heat.h[k]);
    f1.push_back(std::move(f));
  }
  const Field s_eps = evo.forward_final(stack(v0, y0), m, f1);

  // Phase 2: closed-form ODE control on [eps, T], exact for the scheme.
  const int Mp = M - m;
  const Field y_free = lower(evo.forward_final(s_eps, Mp));
  const double a = (1.0 - 0.5 * dt) / (1.0 + 0.5 * dt);
  const double c = (0.5 * dt) / (1.0 + 0.5 * dt);
  out.w_scheme = Field::Zero(n);
  out.w = Field::Zero(n);
  std::vector<double> decay(std::size_t(Mp) + 1);
  for (int k = 0; k <= Mp; ++k) {
    double beta = 0.0;
    if (k >= 1) beta += std::pow(a, Mp - k);
    if (k <= Mp - 1) beta += std::pow(a, Mp - 1 - k);
    beta *= c;
    decay[k] = std::exp(g.time(m + k) - T);
    const Field chi = as_field(region.omega0[m + k]);
    out.w_scheme += beta * decay[k] * chi;
    out.w += dt * std::exp(2.0 * (g.time(m + k) - T)) * chi;
  }
  out.q0 = Field::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out.w_scheme[i] > 0.0) {
      out.q0[i] = -y_free[i] / out.w_scheme[i];
    } else if (y_free[i] != 0.0) {
      throw NumericalError("cascade: zero observation weight at a node claimed covered");
    }
  }
  out.w_lower = std::exp(2.0 * (params.epsilon - T)) * out.delta0;
  out.w_bound_holds = (out.w.array() >= out.w_lower * (1.0 - 1e-12)).all();

  out.h.assign(std::size_t(M) + 1, Field::Zero(n));
  out.k.assign(std::size_t(M) + 1, Field::Zero(n));
  for (int k = 0; k <= m; ++k) out.h[k] = chi_m1.cwiseProduct(heat.h[k]);
  std::vector<Field> f2;
  for (int k = 0; k <= Mp; ++k) {
    out.k[m + k] = as_field(region.omega0[m + k]).cwiseProduct(decay[k] * out.q0);
    Field f = Field::Zero(2 * n);
    f.tail(n) = out.k[m + k];
    f2.push_back(std::move(f));
  }
  const Field sT = evo.forward_final(s_eps, Mp, f2);
  out.terminal_v = l2_norm(g, upper(sT));
  out.terminal_y = l2_norm(g, lower(sT));
  return out;
}

ObservabilityFactors assemble_observability(const ControlSystem& sys, const ObservabilityOptions& opt) {
  const Grid& g = sys.grid;
  const Eigen::Index n = g.size();
  const Eigen::Index d = opt.q_only ? n : sys.state_size();
  const Eigen::Index off = opt.q_only ? sys.offset : 0;
  const int levels = g.steps() + 1;
  const double cm = g.cell_measure();
  ObservabilityFactors f;
  f.K.resize(Eigen::Index(levels) * n, d);
  f.S.resize(sys.state_size(), d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Field e = Field::Zero(sys.state_size());
    e[off + j] = 1.0;
    const auto adj = sys.evo->adjoint(e, g.steps());
    const auto pair = LinearEvolution::pairing(adj, g.dt());
    for (int k = 0; k < levels; ++k)
      f.K.col(j).segment(Eigen::Index(k) * n, n) =
          std::sqrt(cm / sys.tau(k)) * sys.chi[k].cwiseProduct(pair[k].segment(sys.offset, n));
    f.S.col(j) = std::sqrt(cm) * (opt.terminal_lhs ? e : adj.w.front());
  }
  return f;
}

ObservabilityEstimate estimate_observability_constant(const ControlSystem& sys, const ObservabilityOptions& opt) {
  const ObservabilityFactors f = assemble_observability(sys, opt);
  const Eigen::Index d = f.K.cols();
  ObservabilityEstimate est;
  est.dimension = d;
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(f.K);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  if ((R.diagonal().array() == 0.0).any()) {
    est.c_obs = std::numeric_limits<double>::infinity();
    return est;
  }
  const auto tri = R.triangularView<Eigen::Upper>();

  // Block inverse iteration with a Rayleigh-Ritz step in the Lambda metric.
  const Eigen::Index block = std::min<Eigen::Index>(d, std::max(1, opt.block));
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd Y(d, block);
  for (Eigen::Index j = 0; j < Y.size(); ++j) Y.data()[j] = normal(rng);
  for (int it = 0; it < opt.max_outer; ++it) {
    Eigen::MatrixXd Z = tri.transpose().solve(f.S.transpose() * (f.S * Y));
    Z = tri.solve(Z);
    if (!Z.allFinite()) break;
    // Lambda-orthonormal basis: R Z = Q_w R_w, basis Z R_w^{-1}.
    const Eigen::HouseholderQR<Eigen::MatrixXd> wqr(R * Z);
    const Eigen::MatrixXd Rw = wqr.matrixQR().topRows(block).triangularView<Eigen::Upper>();
    if ((Rw.diagonal().array() == 0.0).any()) break;
    const Eigen::MatrixXd B = Rw.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(Z);
    const Eigen::MatrixXd SB = f.S * B;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(SB.transpose() * SB);
    Y = B * ritz.eigenvectors();
    est.iterations = it + 1;

    const Field x = Y.col(block - 1);
    const Field Sx = f.S * x, Rx = R * x;
    const double mu = Sx.squaredNorm() / Rx.squaredNorm();
    if (!std::isfinite(mu)) break;
    const Field u = tri.transpose().solve(f.S.transpose() * Sx);
    est.residual = (u - mu * Rx).norm() / (mu * Rx.norm());
    est.c_obs = std::max(est.c_obs, mu);
    if (est.residual <= opt.rel_tol) {
      est.c_obs = mu;
      est.status = Verdict::Pass;
      break;
    }
  }
  return est;
}

void write_hum_report(std::ostream& out, const HUMReport& r) {
  out << std::setprecision(10);
  out << "status = " << (r.converged ? "CONVERGED" : "NON_CONVERGED") << "\n";
  out << "beta_rel = " << r.beta_rel << "\nbeta_abs = " << r.beta_abs << "\n";
  out << "gramian_max = " << r.gramian_max << "\n";
  out << "iterations = " << r.iterations << "\n";
  out << "final_residual = " << (r.residuals.empty() ? 0.0 : r.residuals.back()) << "\n";
  out << "initial_norm = " << r.initial_norm << "\nterminal_norm = " << r.terminal_norm << "\n";
  for (std::size_t b = 0; b < r.terminal_blocks.size(); ++b)
    out << "terminal_block_" << b << " = " << r.terminal_blocks[b] << "\n";
  out << "relative_terminal = " << (r.initial_norm > 0 ? r.terminal_norm / r.initial_norm : 0.0) << "\n";
  out << "control_cost = " << r.cost << "\ndual_value = " << r.dual_value << "\n";
  out << "penalization_bound = " << r.bound << "\n";
}

void write_residual_csv(std::ostream& out, const HUMReport& r) {
  out << std::setprecision(12) << "iteration,residual\n";
  for (std::size_t i = 0; i < r.residuals.size(); ++i) out << i << ',' << r.residuals[i] << '\n';
}

void write_cascade_report(std::ostream& out, const CascadeResult& r) {
  out << std::setprecision(10);
  out << "epsilon = " << r.params.epsilon << "\nlevel_eps = " << r.level_eps << "\n";
  out << "omega_m1_nodes = " << count(r.params.omega_m1) << "\n";
  out << "delta0 = " << r.delta0 << "\n";
  out << "w_min = " << r.w.minCoeff() << "\nw_lower_bound = " << r.w_lower << "\n";
  out << "w_bound = " << (r.w_bound_holds ? "PASS" : "FAIL") << "\n";
  out << "initial_norm = " << r.initial_norm << "\n";
  out << "terminal_v = " << r.terminal_v << "\nterminal_y = " << r.terminal_y << "\n";
  out << "relative_terminal = "
      << (r.initial_norm > 0 ? (r.terminal_v + r.terminal_y) / r.initial_norm : 0.0) << "\n";
  out << "[phase1]\n";
  write_hum_report(out, r.phase1);
}

void write_observability_report(std::ostream& out, const ObservabilityEstimate& e) {
  out << std::setprecision(10);
  out << "status = " << to_string(e.status) << "\n";
  out << "c_obs = " << e.c_obs << "\n";
  out << "certificate_residual = " << e.residual << "\n";
  out << "iterations = " << e.iterations << "\ndimension = " << e.dimension << "\n";
}

}  // namespace viscoctl
