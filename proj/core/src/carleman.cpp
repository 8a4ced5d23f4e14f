#include "viscoctl/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

#include <Eigen/SparseCholesky>

#include "viscoctl/errors.hpp"

namespace viscoctl {

double CarlemanTerms::ratio() const {
  const double r = rhs();
  return r > 0.0 ? lhs / r : std::numeric_limits<double>::quiet_NaN();
}

bool CarlemanFit::finite() const {
  return !c_hat.empty() && std::all_of(c_hat.begin(), c_hat.end(), [](double c) { return std::isfinite(c); });
}

const CarlemanFit* CarlemanReport::fit(int lemma, double lambda) const {
  for (const auto& f : fits)
    if (f.lemma == lemma && f.lambda == lambda) return &f;
  return nullptr;
}

namespace {

Field time_derivative(const SpaceTimeField& u, int n, double dt) { return (u[n + 1] - u[n - 1]) / (2.0 * dt); }

void check_trajectory(const WeightSet& ws, const SpaceTimeField& u, const char* what) {
  check_levels(ws.grid, u, what);
  if (ws.theta.empty() || ws.exp_weight.empty())
    throw PreconditionError("carleman: weights have not been evaluated");
}

void add_lemma1(const SpaceTimeField& p, const WeightSet& ws, const MovingRegion& region, int first, int last,
                CarlemanTerms& t) {
  const Grid& g = ws.grid;
  const double dt = g.dt(), cell = g.cell_measure(), s = ws.s, l = ws.lambda;
  for (int n = first; n <= last; ++n) {
    const Field pt = time_derivative(p, n, dt);
    const Field lap = apply_laplacian(g, p[n]);
    const Field grad2 = gradient_norm_sq(g, p[n]);
    const Field& w = ws.exp_weight[n];
    const Field st = s * ws.theta[n];
    const NodeMask& m1 = region.omega1[n];
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (w[i] == 0.0) continue;
      const double q = dt * cell * w[i];
      const double st3 = st[i] * st[i] * st[i];
      const double zero_order = std::pow(l, 4) * st3 * p[n][i] * p[n][i];
      t.lhs += q * ((lap[i] * lap[i] + pt[i] * pt[i]) / st[i] + l * l * st[i] * grad2[i] + zero_order);
      const double src = pt[i] + lap[i];
      t.source += q * src * src;
      if (m1[i]) t.local += q * zero_order;
    }
  }
}

void add_lemma2_lhs(const SpaceTimeField& q, const WeightSet& ws, int first, int last, CarlemanTerms& t) {
  const Grid& g = ws.grid;
  const double dt = g.dt(), cell = g.cell_measure(), l = ws.lambda;
  for (int n = first; n <= last; ++n)
    for (Eigen::Index i = 0; i < g.size(); ++i)
      t.lhs += dt * cell * ws.exp_weight[n][i] * l * l * ws.s * ws.theta[n][i] * q[n][i] * q[n][i];
}

// Local q-observation lambda^a (s theta)^b |q|^2 over omega.
double local_q(const SpaceTimeField& q, const WeightSet& ws, const MovingRegion& region, int first, int last,
               int a, int b) {
  const Grid& g = ws.grid;
  const double dt = g.dt(), cell = g.cell_measure();
  double sum = 0.0;
  for (int n = first; n <= last; ++n)
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (!region.omega[n][i] || ws.exp_weight[n][i] == 0.0) continue;
      sum += dt * cell * ws.exp_weight[n][i] * std::pow(ws.lambda, a) * std::pow(ws.s * ws.theta[n][i], b) *
             q[n][i] * q[n][i];
    }
  return sum;
}

CarlemanTerms lemma2_terms(const SpaceTimeField& q, const WeightSet& ws, const MovingRegion& region, int first,
                           int last) {
  CarlemanTerms t;
  add_lemma2_lhs(q, ws, first, last, t);
  const Grid& g = ws.grid;
  for (int n = first; n <= last; ++n) {
    const Field qt = time_derivative(q, n, g.dt());
    t.source += g.dt() * g.cell_measure() * ws.exp_weight[n].dot(qt.cwiseAbs2());
  }
  t.local = local_q(q, ws, region, first, last, 2, 2);
  return t;
}

}  // namespace

CarlemanTerms lemma_terms(int lemma, const AdjointTrajectory& adj, const WeightSet& ws, const MovingRegion& region,
                          int first, int last) {
  const int M = ws.grid.steps();
  first = std::max(first, 1);
  last = std::min(last, M - 1);
  if (region.levels() != M + 1) throw PreconditionError("carleman: region and weights have different time grids");
  CarlemanTerms t;
  switch (lemma) {
    case 1:
      check_trajectory(ws, adj.p, "p");
      add_lemma1(adj.p, ws, region, first, last, t);
      break;
    case 2:
      check_trajectory(ws, adj.q, "q");
      t = lemma2_terms(adj.q, ws, region, first, last);
      break;
    case 3:
      check_trajectory(ws, adj.p, "p");
      check_trajectory(ws, adj.q, "q");
      add_lemma1(adj.p, ws, region, first, last, t);
      add_lemma2_lhs(adj.q, ws, first, last, t);
      t.source = 0.0;
      t.local = local_q(adj.q, ws, region, first, last, 8, 7);
      break;
    default:
      throw PreconditionError("carleman: lemma must be 1, 2 or 3");
  }
  return t;
}

CarlemanTerms evaluate_lemma1(const SpaceTimeField& p, const WeightSet& ws, const MovingRegion& region) {
  AdjointTrajectory adj;
  adj.p = p;
  return lemma_terms(1, adj, ws, region, 1, ws.grid.steps() - 1);
}

CarlemanTerms evaluate_lemma2(const SpaceTimeField& q, const WeightSet& ws, const MovingRegion& region) {
  AdjointTrajectory adj;
  adj.q = q;
  return lemma_terms(2, adj, ws, region, 1, ws.grid.steps() - 1);
}

CarlemanTerms evaluate_lemma3(const AdjointTrajectory& adj, const WeightSet& ws, const MovingRegion& region) {
  return lemma_terms(3, adj, ws, region, 1, ws.grid.steps() - 1);
}

std::vector<AdjointTrajectory> carleman_ensemble(const Grid& grid, const ProblemSpec& spec, int size,
                                                 unsigned long long seed) {
  if (size < 0) throw ConfigError("ensemble size must be nonnegative");
  SparseMatrix I(grid.size(), grid.size());
  I.setIdentity();
  const SparseMatrix P = I - grid.dt() * laplacian_matrix(grid);
  const Eigen::SimplicialLDLT<SparseMatrix> heat(P);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto draw = [&] {
    Field u(grid.size());
    for (auto& v : u) v = normal(rng);
    return Field(heat.solve(heat.solve(u)));
  };
  std::vector<AdjointTrajectory> out;
  out.reserve(std::size_t(size));
  for (int k = 0; k < size; ++k) {
    const Field p = draw();
    const Field q = draw();
    out.push_back(solve_adjoint(grid, spec, p, q));
  }
  return out;
}

namespace {

double edge_share(const CarlemanTerms& total, const CarlemanTerms& edge) {
  double worst = 0.0;
  const double tot[3] = {total.lhs, total.source, total.local};
  const double e[3] = {edge.lhs, edge.source, edge.local};
  for (int k = 0; k < 3; ++k)
    if (tot[k] > 0.0) worst = std::max(worst, e[k] / tot[k]);
  return worst;
}

AdjointTrajectory scaled(const AdjointTrajectory& a, double alpha) {
  AdjointTrajectory out = a;
  for (auto& f : out.p) f *= alpha;
  for (auto& f : out.q) f *= alpha;
  return out;
}

}  // namespace

CarlemanReport carleman_sweep(const MovingRegion& region, WeightSet ws, const ProblemSpec& spec,
                              const CarlemanSweepOptions& options) {
  const Grid& g = region.grid;
  if (!g.same_space(ws.grid) || ws.levels() != region.levels())
    throw PreconditionError("carleman: weights were built on a different grid");
  if (options.s_grid.empty() || options.lambda_grid.empty()) throw ConfigError("carleman: empty s or lambda grid");
  const int M = g.steps();
  CarlemanReport rep;
  auto ensemble = carleman_ensemble(g, spec, options.ensemble, options.seed);

  std::vector<bool> zero(ensemble.size(), false);
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    double n = 0.0;
    for (int lvl = 0; lvl <= M; ++lvl) n += ensemble[k].p[lvl].squaredNorm() + ensemble[k].q[lvl].squaredNorm();
    zero[k] = !(n > 0.0);
    if (zero[k]) ++rep.skipped_samples;
  }

  for (double lambda : options.lambda_grid) {
    for (int lemma = 1; lemma <= 3; ++lemma) {
      CarlemanFit fit;
      fit.lemma = lemma;
      fit.lambda = lambda;
      fit.s = options.s_grid;
      rep.fits.push_back(fit);
    }
    for (std::size_t js = 0; js < options.s_grid.size(); ++js) {
      const double s = options.s_grid[js];
      std::string error;
      try {
        eval_weights(ws, lambda, s);
      } catch (const Error& e) {
        error = e.what();
      }
      for (int lemma = 1; lemma <= 3; ++lemma) {
        double c_hat = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t k = 0; k < ensemble.size(); ++k) {
          if (zero[k]) continue;
          CarlemanRow row;
          row.lemma = lemma;
          row.s = s;
          row.lambda = lambda;
          row.sample = int(k);
          row.error = error;
          if (error.empty()) {
            try {
              row.terms = lemma_terms(lemma, ensemble[k], ws, region, 1, M - 1);
              const double r = row.terms.ratio();
              if (std::isfinite(r)) c_hat = std::isfinite(c_hat) ? std::max(c_hat, r) : r;
              if (s >= 1.0) {
                const CarlemanTerms edge1 = lemma_terms(lemma, ensemble[k], ws, region, 1, 1);
                const CarlemanTerms edge2 = lemma_terms(lemma, ensemble[k], ws, region, M - 1, M - 1);
                CarlemanTerms edge;
                edge.lhs = edge1.lhs + edge2.lhs;
                edge.source = edge1.source + edge2.source;
                edge.local = edge1.local + edge2.local;
                rep.edge_fraction = std::max(rep.edge_fraction, edge_share(row.terms, edge));
              }
              if (k == 0 && std::isfinite(r)) {
                const double r2 =
                    lemma_terms(lemma, scaled(ensemble[k], options.homogeneity_factor), ws, region, 1, M - 1).ratio();
                rep.homogeneity_defect = std::max(rep.homogeneity_defect, std::abs(r2 - r) / std::abs(r));
              }
            } catch (const Error& e) {
              row.error = e.what();
            }
          }
          if (!row.error.empty()) ++rep.errors;
          rep.rows.push_back(std::move(row));
        }
        for (auto& f : rep.fits)
          if (f.lemma == lemma && f.lambda == lambda) {
            if (f.c_hat.size() < f.s.size()) f.c_hat.resize(f.s.size(), std::numeric_limits<double>::quiet_NaN());
            f.c_hat[js] = c_hat;
          }
      }
    }
  }

  for (auto& f : rep.fits) {
    if (!f.finite()) continue;
    std::size_t start = f.c_hat.size() - 1;
    while (start > 0 && f.c_hat[start - 1] >= f.c_hat[start]) --start;
    if (start + 1 < f.c_hat.size() || f.c_hat.size() == 1) f.s_hat = f.s[start];
  }
  std::vector<double> lambdas = options.lambda_grid;
  std::sort(lambdas.begin(), lambdas.end());
  for (auto it = lambdas.rbegin(); it != lambdas.rend(); ++it) {
    bool all = true;
    for (int lemma = 1; lemma <= 3; ++lemma) {
      const CarlemanFit* f = rep.fit(lemma, *it);
      all = all && f && f->finite() && f->s_hat >= 0.0;
    }
    if (!all) break;
    rep.lambda_hat = *it;
  }
  return rep;
}

void write_carleman_csv(std::ostream& out, const CarlemanReport& r) {
  out << std::setprecision(12) << "lemma,s,lambda,sample,lhs,rhs_source,rhs_local,ratio\n";
  for (const auto& row : r.rows) {
    out << row.lemma << ',' << row.s << ',' << row.lambda << ',' << row.sample << ',';
    if (row.error.empty()) {
      out << row.terms.lhs << ',' << row.terms.source << ',' << row.terms.local << ',' << row.terms.ratio() << '\n';
    } else {
      out << "nan,nan,nan,nan\n";
    }
  }
}

void write_carleman_summary(std::ostream& out, const CarlemanReport& r) {
  out << std::setprecision(10);
  out << "rows = " << r.rows.size() << "\nerrors = " << r.errors << "\nskipped_samples = " << r.skipped_samples
      << "\n";
  out << "lambda_hat = " << r.lambda_hat << "\n";
  out << "homogeneity_defect = " << r.homogeneity_defect << "\n";
  out << "edge_level_fraction = " << r.edge_fraction << "\n";
  for (const auto& f : r.fits) {
    out << "[lemma" << f.lemma << " lambda=" << f.lambda << "]\n";
    for (std::size_t j = 0; j < f.s.size(); ++j)
      out << "c_hat(s=" << f.s[j] << ") = " << (j < f.c_hat.size() ? f.c_hat[j] : 0.0) << "\n";
    out << "s_hat = " << f.s_hat << "\n";
  }
}

}  // namespace viscoctl
