#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "viscoctl/solvers.hpp"
#include "viscoctl/weights.hpp"

namespace viscoctl {

// Space-time integrals with the weight e^{-2 s phi}, in units of the stored
// shift (ws.log_weight_shift). Levels 0 and M are excluded.
struct CarlemanTerms {
  double lhs = 0.0;
  double source = 0.0;
  double local = 0.0;

  double rhs() const { return source + local; }
  // lhs / rhs; NaN when rhs vanishes.
  double ratio() const;
};

// Lemma 1 for p alone:
//   lhs    = sum (s theta)^{-1} (|Lap p|^2 + |p_t|^2) + lambda^2 s theta |grad p|^2 + lambda^4 (s theta)^3 |p|^2
//   source = sum |p_t + Lap p|^2
//   local  = sum over omega1 of lambda^4 (s theta)^3 |p|^2
CarlemanTerms evaluate_lemma1(const SpaceTimeField& p, const WeightSet& ws, const MovingRegion& region);
// Lemma 2 for q alone:
//   lhs = sum lambda^2 s theta |q|^2, source = sum |q_t|^2,
//   local = sum over omega of lambda^2 (s theta)^2 |q|^2
CarlemanTerms evaluate_lemma2(const SpaceTimeField& q, const WeightSet& ws, const MovingRegion& region);
// Lemma 3: lhs = lemma-1 lhs of p + lemma-2 lhs of q,
// local = sum over omega of lambda^8 (s theta)^7 |q|^2, source = 0.
CarlemanTerms evaluate_lemma3(const AdjointTrajectory& adj, const WeightSet& ws, const MovingRegion& region);

// Same integrals restricted to levels [first, last].
CarlemanTerms lemma_terms(int lemma, const AdjointTrajectory& adj, const WeightSet& ws, const MovingRegion& region,
                          int first, int last);

// Adjoint trajectories from Gaussian terminal data, each block smoothed by
// two implicit heat steps of size dt.
std::vector<AdjointTrajectory> carleman_ensemble(const Grid& grid, const ProblemSpec& spec, int size,
                                                 unsigned long long seed);

struct CarlemanRow {
  int lemma = 0;
  double s = 0.0;
  double lambda = 0.0;
  int sample = 0;
  CarlemanTerms terms;
  std::string error;  // non-empty when the row could not be evaluated
};

struct CarlemanFit {
  int lemma = 0;
  double lambda = 0.0;
  std::vector<double> s;
  std::vector<double> c_hat;  // max over samples of lhs / rhs; NaN if no valid sample
  double s_hat = -1.0;        // first s after which c_hat is nonincreasing; -1 if none
  bool finite() const;
};

struct CarlemanSweepOptions {
  int ensemble = 20;
  std::vector<double> s_grid{2.0, 4.0, 8.0};
  std::vector<double> lambda_grid{1.0, 2.0, 3.0};
  unsigned long long seed = 1;
  double homogeneity_factor = 7.3;
};

struct CarlemanReport {
  std::vector<CarlemanRow> rows;
  std::vector<CarlemanFit> fits;
  double lambda_hat = -1.0;          // smallest lambda from which every fit is finite and settles in s
  double homogeneity_defect = 0.0;   // max relative change of the ratio under data -> alpha data
  double edge_fraction = 0.0;        // max share of levels 1 and M-1 in any nonzero integral
  int skipped_samples = 0;           // zero terminal data
  int errors = 0;

  const CarlemanFit* fit(int lemma, double lambda) const;
};

// ws is re-evaluated at each (lambda, s); region must be the one ws was built on.
CarlemanReport carleman_sweep(const MovingRegion& region, WeightSet ws, const ProblemSpec& spec,
                              const CarlemanSweepOptions& options = {});

// lemma,s,lambda,sample,lhs,rhs_source,rhs_local,ratio
void write_carleman_csv(std::ostream& out, const CarlemanReport& r);
void write_carleman_summary(std::ostream& out, const CarlemanReport& r);

}  // namespace viscoctl
