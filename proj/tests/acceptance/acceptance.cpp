// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// Every library number that decides a verdict is cross-checked against a
// quantity recomputed here from scratch (dense Crank-Nicolson propagation,
// hand-built Laplacians, brute-force mask membership).

#include <Eigen/Dense>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "viscoctl/carleman.hpp"
#include "viscoctl/control.hpp"

using namespace viscoctl;
using viscoctl::cli::RunConfig;

namespace {

using Dense = Eigen::MatrixXd;
using Clock = std::chrono::steady_clock;

RunConfig fixture(const std::string& name) { return cli::load_config(std::string(VISCOCTL_FIXTURE_DIR) + "/" + name + ".cfg"); }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Five-point (or three-point) Dirichlet Laplacian on the interior nodes.
Dense dense_laplacian(const Grid& g) {
  const int nx = g.nodes(0) - 2;
  const int ny = g.dimension() == 2 ? g.nodes(1) - 2 : 1;
  const double hx = g.extent(0) / (g.nodes(0) - 1);
  const double hy = g.dimension() == 2 ? g.extent(1) / (g.nodes(1) - 1) : 1.0;
  Dense L = Dense::Zero(nx * ny, nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int r = i + j * nx;
      L(r, r) = -2.0 / (hx * hx) - (g.dimension() == 2 ? 2.0 / (hy * hy) : 0.0);
      if (i > 0) L(r, r - 1) = 1.0 / (hx * hx);
      if (i + 1 < nx) L(r, r + 1) = 1.0 / (hx * hx);
      if (g.dimension() == 2) {
        if (j > 0) L(r, r - nx) = 1.0 / (hy * hy);
        if (j + 1 < ny) L(r, r + nx) = 1.0 / (hy * hy);
      }
    }
  return L;
}

// y' = Lap y - (b-1) y + z,  z' = (b-1) y - z + f
Dense coupled_dense(const Grid& g, const Field& b) {
  const Eigen::Index n = g.size();
  Dense A = Dense::Zero(2 * n, 2 * n);
  const Eigen::VectorXd bm1 = b.array() - 1.0;
  A.topLeftCorner(n, n) = dense_laplacian(g);
  A.topLeftCorner(n, n).diagonal() -= bm1;
  A.topRightCorner(n, n).diagonal().setOnes();
  A.bottomLeftCorner(n, n).diagonal() = bm1;
  A.bottomRightCorner(n, n).diagonal().setConstant(-1.0);
  return A;
}

// v' = Lap v + f,  y' = -y + v + k
Dense cascade_dense(const Grid& g) {
  const Eigen::Index n = g.size();
  Dense A = Dense::Zero(2 * n, 2 * n);
  A.topLeftCorner(n, n) = dense_laplacian(g);
  A.bottomLeftCorner(n, n).diagonal().setOnes();
  A.bottomRightCorner(n, n).diagonal().setConstant(-1.0);
  return A;
}

struct DenseCN {
  Dense Q;
  Eigen::PartialPivLU<Dense> P, Pt;
  double dt;

  DenseCN(const Dense& A, double dt_) : dt(dt_) {
    const Dense I = Dense::Identity(A.rows(), A.cols());
    Q = I + 0.5 * dt * A;
    P.compute(I - 0.5 * dt * A);
    Pt.compute((I - 0.5 * dt * A).transpose());
  }

  // forcing[k] for k = 0..steps, applied with the trapezoid rule; empty = none.
  Eigen::VectorXd run(Eigen::VectorXd u, int steps, const std::vector<Eigen::VectorXd>& forcing = {}) const {
    for (int k = 0; k < steps; ++k) {
      Eigen::VectorXd rhs = Q * u;
      if (!forcing.empty()) rhs += 0.5 * dt * (forcing[k] + forcing[k + 1]);
      u = P.solve(rhs);
    }
    return u;
  }

  // Euclidean transpose of the homogeneous propagator over `steps` steps.
  Eigen::VectorXd run_transpose(Eigen::VectorXd w, int steps) const {
    for (int k = 0; k < steps; ++k) w = Q.transpose() * Pt.solve(w);
    return w;
  }
};

double quad_norm(const Grid& g, const Eigen::VectorXd& u) { return std::sqrt(g.cell_measure() * u.squaredNorm()); }

Eigen::VectorXd concat(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd u(a.size() + b.size());
  u << a, b;
  return u;
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <typename F>
void guarded(int id, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

void adjoint_transposition() {
  const auto t0 = Clock::now();
  std::ostringstream msg;
  bool ok = true;
  for (const char* name : {"adjoint_1d", "adjoint_2d"}) {
    const RunConfig c = fixture(name);
    const MovingRegion region = c.region();
    const Grid& g = region.grid;
    const ProblemSpec spec = c.b.build(g);
    const SpaceTimeField chi = control_masks(region);
    const double lib = adjoint_consistency(g, spec, chi, 7);

    // Independent check: dense forward map versus the library adjoint.
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    auto rnd = [&] {
      Field f(g.size());
      for (auto& v : f) v = normal(rng);
      return f;
    };
    const Field y0 = rnd(), z0 = rnd(), p0 = rnd(), q0 = rnd();
    SpaceTimeField h;
    std::vector<Eigen::VectorXd> forcing;
    for (int k = 0; k <= g.steps(); ++k) {
      h.push_back(rnd());
      forcing.push_back(concat(Field::Zero(g.size()), chi[k].cwiseProduct(h[k])));
    }
    const DenseCN cn(coupled_dense(g, spec.b), g.dt());
    const Eigen::VectorXd uT = cn.run(concat(y0, z0), g.steps(), forcing);
    const CoupledTrajectory lib_fwd = solve_coupled_forward(g, spec, y0, z0, chi, h);
    const double fwd_diff =
        (concat(lib_fwd.y.back(), lib_fwd.z.back()) - uT).norm() / uT.norm();

    const AdjointTrajectory adj = solve_adjoint(g, spec, p0, q0);
    const Eigen::VectorXd w0 = cn.run_transpose(concat(p0, q0), g.steps());
    const double adj_diff = (concat(adj.p[0], adj.q[0]) - w0).norm() / w0.norm();

    const double end = uT.dot(concat(p0, q0));
    const double start = concat(y0, z0).dot(w0);
    double obs = 0.0, scale = std::abs(end) + std::abs(start);
    for (int k = 0; k <= g.steps(); ++k) {
      const double term = chi[k].cwiseProduct(h[k]).dot(adj.pairing_q[k]);
      obs += term;
      scale += std::abs(term);
    }
    const double oracle = std::abs(end - start - obs) / scale;
    ok = ok && lib <= 1e-10 && oracle <= 1e-10 && fwd_diff <= 1e-10 && adj_diff <= 1e-10;
    msg << g.dimension() << "D defect " << lib << " (dense oracle " << oracle << ", forward " << fwd_diff
        << ", adjoint " << adj_diff << "); ";
  }
  const double t = seconds_since(t0);
  msg << "time " << t << " s";
  report(1, ok && t < 10.0, "adjoint transposition: " + msg.str());
}

void splitting_order() {
  const auto t0 = Clock::now();
  RunConfig c = fixture("splitting");
  std::vector<double> hs, lib_err, own_err;
  for (int level = 0; level < 3; ++level) {
    if (level > 0) {
      c.nodes[0] = 2 * (c.nodes[0] - 1) + 1;
      c.steps *= 2;
    }
    const Grid g = c.grid();
    const ProblemSpec spec = c.b.build(g);
    const SpaceTimeField chi = fixed_masks(g, NodeMask(std::size_t(g.size()), 0));
    const CoupledTrajectory tr = solve_coupled_forward(g, spec, c.y0.sample(g), c.z0.sample(g), chi);
    lib_err.push_back(verify_splitting(g, spec, tr, chi).viscoelastic);

    // Own residual of Y_t = Lap y + Lap Y - b Y with Y = z + Lap y - (b-1) y,
    // centred in time at interior levels.
    const Dense L = dense_laplacian(g);
    const Eigen::VectorXd bm1 = spec.b.array() - 1.0;
    std::vector<Eigen::VectorXd> Y;
    for (int n = 0; n <= g.steps(); ++n) Y.push_back(tr.z[n] + L * tr.y[n] - bm1.cwiseProduct(tr.y[n]));
    double worst = 0.0;
    for (int n = 1; n < g.steps(); ++n) {
      const Eigen::VectorXd r = (Y[n + 1] - Y[n - 1]) / (2.0 * g.dt()) - L * (tr.y[n] + Y[n]) + spec.b.cwiseProduct(Y[n]);
      worst = std::max(worst, quad_norm(g, r));
    }
    own_err.push_back(worst);
    hs.push_back(g.h(0));
  }
  const double lib_order = fitted_order(hs, lib_err);
  const double own_order = fitted_order(hs, own_err);
  const double t = seconds_since(t0);
  std::ostringstream msg;
  msg << "splitting residual order " << lib_order << " (oracle " << own_order << "), residuals " << lib_err[0] << " -> "
      << lib_err[2] << ", time " << t << " s";
  report(2, lib_order >= 1.8 && own_order >= 1.8 && t < 60.0, msg.str());
}

void cascade() {
  const auto t0 = Clock::now();
  const RunConfig c = fixture("cascade");
  const MovingRegion region = c.region();
  const Grid& g = region.grid;
  CascadeParameters params;
  params.level = int(std::lround(*c.cascade_epsilon / g.dt()));
  params.epsilon = g.time(params.level);
  params.omega_m1.assign(std::size_t(g.size()), 0);
  const Shape m1 = cli::parse_shape(1, c.cascade_omega_m1);
  for (Eigen::Index i = 0; i < g.size(); ++i) params.omega_m1[i] = m1.contains(g.coord(i));
  const Field v0 = c.v0.sample(g), y0 = c.y0.sample(g);
  const CascadeResult res = cascade_control(region, v0, y0, params, c.beta, c.cg);

  // Dense re-simulation of the two phases with the returned controls.
  const int m = params.level, M = g.steps();
  const Eigen::Index n = g.size();
  const DenseCN cn(cascade_dense(g), g.dt());
  std::vector<Eigen::VectorXd> f1, f2;
  for (int k = 0; k <= m; ++k) f1.push_back(concat(res.h[k], Field::Zero(n)));
  for (int k = m; k <= M; ++k) f2.push_back(concat(Field::Zero(n), res.k[k]));
  const Eigen::VectorXd s_eps = cn.run(concat(v0, y0), m, f1);
  const Eigen::VectorXd sT = cn.run(s_eps, M - m, f2);
  const double initial = quad_norm(g, v0) + quad_norm(g, y0);
  const double terminal = quad_norm(g, sT.head(n)) + quad_norm(g, sT.tail(n));

  // Own diagonal Gramian weight and coverage constant.
  Field w = Field::Zero(n);
  double delta0 = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    int covered = 0;
    for (int k = m; k <= M; ++k) {
      if (!region.omega0[k][i]) continue;
      ++covered;
      w[i] += g.dt() * std::exp(2.0 * (g.time(k) - g.horizon()));
    }
    delta0 = std::min(delta0, g.dt() * covered);
  }
  const double lower = std::exp(2.0 * (params.epsilon - g.horizon())) * delta0;
  const bool w_ok = (w.array() >= lower * (1.0 - 1e-12)).all() && res.w_bound_holds &&
                    (w - res.w).cwiseAbs().maxCoeff() <= 1e-12 * w.maxCoeff();
  const double rel = terminal / initial;
  const double t = seconds_since(t0);
  std::ostringstream msg;
  msg << "cascade relative terminal " << rel << " (library " << (res.terminal_v + res.terminal_y) / res.initial_norm
      << "), min w " << w.minCoeff() << " >= " << lower << ", time " << t << " s";
  report(3, rel <= 1e-4 && delta0 > 0.0 && w_ok && t < 30.0, msg.str());
}

void transport_observability() {
  const auto t0 = Clock::now();
  const RunConfig c = fixture("obs_transport");
  const MovingRegion region = c.region();
  const Grid& g = region.grid;
  const int m = int(std::lround(*c.obs_epsilon / g.dt()));
  const Grid sub = g.with_horizon(g.horizon() - g.time(m), g.steps() - m);
  SpaceTimeField chi;
  for (int k = m; k <= g.steps(); ++k) chi.push_back(as_field(region.omega0[k]));
  const ObservabilityEstimate est = estimate_observability_constant(transport_system(sub, chi), c.obs);

  // The observability operator of q' = q is diagonal; its entries follow from
  // the scalar Crank-Nicolson adjoint recursion.
  const int Mp = sub.steps();
  const double dt = g.dt();
  std::vector<double> r(std::size_t(Mp) + 1, 0.0), pair(std::size_t(Mp) + 1, 0.0);
  double wk = 1.0;
  for (int k = Mp; k >= 1; --k) {
    r[k] = wk / (1.0 + 0.5 * dt);
    wk = (1.0 - 0.5 * dt) * r[k];
  }
  for (int k = 0; k <= Mp; ++k) pair[k] = 0.5 * dt * ((k >= 1 ? r[k] : 0.0) + (k < Mp ? r[k + 1] : 0.0));
  double exact = 0.0, diag = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    double lam = 0.0, wx = 0.0;
    for (int k = 0; k <= Mp; ++k) {
      const double tau = (k == 0 || k == Mp) ? 0.5 * dt : dt;
      lam += chi[k][i] * pair[k] * pair[k] / tau;
      wx += dt * chi[k][i] * std::exp(2.0 * (sub.time(k) - sub.horizon()));
    }
    exact = std::max(exact, 1.0 / lam);
    diag = std::max(diag, 1.0 / wx);
  }
  const double ratio = est.c_obs / diag;
  const double t = seconds_since(t0);
  std::ostringstream msg;
  msg << "transport C_obs " << est.c_obs << " vs diagonal " << diag << " (ratio " << ratio << "), exact discrete "
      << exact << ", status " << to_string(est.status) << ", time " << t << " s";
  const bool ok = est.status == Verdict::Pass && ratio >= 0.5 && ratio <= 2.0 &&
                  std::abs(est.c_obs - exact) <= 1e-6 * exact && t < 10.0;
  report(4, ok, msg.str());
}

struct HumOutcome {
  HUMReport report;
  double terminal_rel = 0.0;
  double cost = 0.0;
};

HumOutcome run_hum(const std::string& name) {
  const RunConfig c = fixture(name);
  const MovingRegion region = c.region();
  const Grid& g = region.grid;
  const ProblemSpec spec = c.b.build(g);
  const SpaceTimeField chi = control_masks(region, c.control_set, c.mask_mode);
  const Field y0 = c.y0.sample(g), z0 = c.z0.sample(g);
  const HUMResult res = hum_control_coupled(g, spec, chi, y0, z0, c.beta, c.cg);
  const Eigen::Index n = g.size();
  std::vector<Eigen::VectorXd> forcing;
  HumOutcome out{res.report, 0.0, 0.0};
  for (int k = 0; k <= g.steps(); ++k) {
    const Field ch = chi[k].cwiseProduct(res.h[k]);
    forcing.push_back(concat(Field::Zero(n), ch));
    const double tau = (k == 0 || k == g.steps()) ? 0.5 * g.dt() : g.dt();
    out.cost += tau * g.cell_measure() * ch.squaredNorm();
  }
  const DenseCN cn(coupled_dense(g, spec.b), g.dt());
  const Eigen::VectorXd uT = cn.run(concat(y0, z0), g.steps(), forcing);
  out.terminal_rel = quad_norm(g, uT) / quad_norm(g, concat(y0, z0));
  return out;
}

void hum_contrast() {
  const auto t0 = Clock::now();
  const HumOutcome mv = run_hum("hum_moving");
  const HumOutcome st = run_hum("hum_static");
  const bool moving_ok = mv.report.converged && mv.report.iterations <= 200 && mv.terminal_rel <= 1e-3;
  const bool static_ok = !st.report.converged || st.cost >= 10.0 * mv.cost;
  const double t = seconds_since(t0);
  std::ostringstream msg;
  msg << "moving: " << (mv.report.converged ? "converged" : "not converged") << " in " << mv.report.iterations
      << " iterations, terminal " << mv.terminal_rel << ", cost " << mv.cost << "; static: "
      << (st.report.converged ? "converged" : "not converged") << " in " << st.report.iterations << ", cost " << st.cost
      << " (" << st.cost / mv.cost << "x), time " << t << " s";
  report(5, moving_ok && static_ok && t < 300.0, msg.str());
}

void geometry_fixtures() {
  const auto t0 = Clock::now();
  std::ostringstream msg;
  bool ok = true;
  auto verdicts = [](const GeometryReport& r) {
    return std::array<Verdict, 5>{r.pilot.verdict, r.covering.verdict, r.connectivity.a3c, r.connectivity.a3d,
                                  r.escape.verdict};
  };
  const char* names[] = {"A3a", "A3b", "A3c", "A3d", "A3e"};
  struct Case {
    const char* fixture;
    int must_fail;  // -1: everything passes
  };
  for (const Case& cs : {Case{"fig1", -1}, Case{"fig5", 3}, Case{"fig6", 2}, Case{"fig3", 0}, Case{"fig2", 4}}) {
    const RunConfig c = fixture(cs.fixture);
    const MovingRegion region = c.region();
    const GeometryReport rep = analyze_geometry(region);
    const auto v = verdicts(rep);
    bool case_ok = cs.must_fail < 0 ? rep.admissible() : v[std::size_t(cs.must_fail)] == Verdict::Fail;
    if (std::string(cs.fixture) == "fig2")
      for (int j = 0; j < 4; ++j) case_ok = case_ok && v[std::size_t(j)] == Verdict::Pass;
    if (std::string(cs.fixture) == "fig3") {
      // The transported region meets the domain at every level (rigid translation).
      const Shape w0 = cli::parse_shape(1, c.omega0);
      const Grid& g = region.grid;
      for (int k = 0; k <= g.steps(); ++k) {
        bool hit = false;
        for (Eigen::Index i = 0; i < g.size() && !hit; ++i)
          hit = w0.contains(g.coord(i) - Point(c.flow_params[0] * g.time(k), 0.0));
        case_ok = case_ok && hit;
      }
    }
    ok = ok && case_ok;
    msg << cs.fixture << " ";
    for (int j = 0; j < 5; ++j) msg << names[j] << '=' << to_string(v[std::size_t(j)]) << (j < 4 ? "," : "; ");
  }
  const double t = seconds_since(t0);
  msg << "time " << t << " s";
  report(6, ok && t < 60.0, "geometry fixtures " + msg.str());
}

void weight_properties() {
  const auto t0 = Clock::now();
  const RunConfig c = fixture("fig1");
  const MovingRegion region = c.region();
  const GeometryReport geo = analyze_geometry(region);
  const WeightSet ws = build_psi(region, geo, c.weights);
  const PsiPropertyReport rep = verify_psi_properties(ws, c.weights);
  bool ok = true;
  std::ostringstream msg;
  msg << "fig1 margins";
  for (int j = 0; j < 6; ++j) {
    const auto& p = rep.p[std::size_t(j)];
    ok = ok && p.checked && p.pass && p.margin > 0.0;
    msg << " P" << j + 1 << '=' << p.margin;
  }
  const WeightSet wrap = periodic_candidate(region.grid, 0.1, 1.0, 5.0);
  const PsiPropertyReport wr = verify_psi_properties(wrap, c.weights);
  const bool wrap_fails = wr.p[1].checked && !wr.p[1].pass;
  const double t = seconds_since(t0);
  msg << "; wraparound P2 " << (wr.p[1].pass ? "PASS" : "FAIL") << " (margin " << wr.p[1].margin << "), time " << t
      << " s";
  report(7, ok && wrap_fails && t < 30.0, msg.str());
}

void carleman() {
  const auto t0 = Clock::now();
  const RunConfig c = fixture("fig1");
  const MovingRegion region = c.region();
  const GeometryReport geo = analyze_geometry(region);
  const WeightSet ws = build_psi(region, geo, c.weights);
  const ProblemSpec spec = c.b.build(region.grid);
  CarlemanSweepOptions opt = c.carleman;
  opt.ensemble = 20;
  const CarlemanReport rep = carleman_sweep(region, ws, spec, opt);

  bool ok = rep.errors == 0 && rep.lambda_hat > 0.0;
  for (const auto& f : rep.fits) {
    if (f.lambda < rep.lambda_hat) continue;
    ok = ok && f.finite() && f.s_hat >= 0.0;
    for (std::size_t j = 0; j + 1 < f.s.size(); ++j)
      if (f.s[j] >= f.s_hat) ok = ok && f.c_hat[j + 1] <= f.c_hat[j];
  }

  // Own homogeneity probe: the lemma-3 ratio of 3 * data against data.
  WeightSet probe = ws;
  eval_weights(probe, rep.lambda_hat, opt.s_grid.back());
  const auto ens = carleman_ensemble(region.grid, spec, 1, opt.seed + 101);
  AdjointTrajectory scaled = ens[0];
  for (auto* blk : {&scaled.p, &scaled.q, &scaled.pairing_q})
    for (auto& f : *blk) f *= 3.0;
  const double r1 = evaluate_lemma3(ens[0], probe, region).ratio();
  const double r3 = evaluate_lemma3(scaled, probe, region).ratio();
  const double own_defect = std::abs(r3 - r1) / std::abs(r1);

  // Own edge share: levels 1 and M-1 of the lemma-3 left side.
  const int M = region.grid.steps();
  const double total = lemma_terms(3, ens[0], probe, region, 1, M - 1).lhs;
  const double edge =
      (lemma_terms(3, ens[0], probe, region, 1, 1).lhs + lemma_terms(3, ens[0], probe, region, M - 1, M - 1).lhs) /
      total;

  ok = ok && rep.homogeneity_defect <= 1e-12 && own_defect <= 1e-12 && rep.edge_fraction < 1e-12 && edge < 1e-12;
  const double t = seconds_since(t0);
  std::ostringstream msg;
  msg << "carleman sweep " << rep.rows.size() << " rows, lambda_hat " << rep.lambda_hat << ", homogeneity "
      << rep.homogeneity_defect << " (oracle " << own_defect << "), edge share " << rep.edge_fraction << " (oracle "
      << edge << "), time " << t << " s";
  report(8, ok && t < 300.0, msg.str());
}

double coupled_c_obs(const std::string& name, Verdict& status) {
  const RunConfig c = fixture(name);
  const MovingRegion region = c.region();
  const ControlSystem sys =
      coupled_system(region.grid, c.b.build(region.grid), control_masks(region, c.control_set, c.mask_mode));
  const ObservabilityEstimate est = estimate_observability_constant(sys, c.obs);
  status = est.status;
  return est.c_obs;
}

void observability_refinement() {
  const auto t0 = Clock::now();
  Verdict s_mc, s_mf, s_sc, s_sf;
  const double mc = coupled_c_obs("obs_moving_coarse", s_mc);
  const double mf = coupled_c_obs("obs_moving_fine", s_mf);
  const double sc = coupled_c_obs("obs_static_coarse", s_sc);
  const double sf = coupled_c_obs("obs_static_fine", s_sf);
  const double moving_change = std::abs(mf - mc) / mc;
  // An uncertified estimate is a Rayleigh lower bound, which is enough for growth.
  const bool static_ok = s_sc == Verdict::Pass && s_sf != Verdict::Fail && sf >= 10.0 * sc;
  const bool ok = s_mc == Verdict::Pass && s_mf == Verdict::Pass && moving_change < 0.5 && static_ok;
  const double t = seconds_since(t0);
  std::ostringstream msg;
  msg << "moving C_obs " << mc << " -> " << mf << " (" << 100.0 * moving_change << "%), static " << sc << " -> " << sf
      << " (" << sf / sc << "x, fine " << to_string(s_sf) << "), time " << t << " s";
  report(9, ok && t < 300.0, msg.str());
}

}  // namespace

int main() {
  guarded(1, adjoint_transposition);
  guarded(2, splitting_order);
  guarded(3, cascade);
  guarded(4, transport_observability);
  guarded(5, hum_contrast);
  guarded(6, geometry_fixtures);
  guarded(7, weight_properties);
  guarded(8, carleman);
  guarded(9, observability_refinement);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
