#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "config.hpp"
#include "viscoctl/carleman.hpp"

using namespace viscoctl;

namespace {

struct Setup {
  cli::RunConfig config = cli::load_config(std::string(VISCOCTL_FIXTURE_DIR) + "/fig1.cfg");
  MovingRegion region = config.region();
  WeightSet ws = build_psi(region, analyze_geometry(region), config.weights);
  ProblemSpec spec = config.b.build(region.grid);
};

const Setup& setup() {
  static const Setup s;
  return s;
}

}  // namespace

TEST(CarlemanTerms, AreNonnegativeAndQuadratic) {
  const auto& s = setup();
  WeightSet ws = s.ws;
  eval_weights(ws, 2.0, 4.0);
  const auto ens = carleman_ensemble(s.region.grid, s.spec, 3, 17);
  ASSERT_EQ(ens.size(), 3u);
  for (const auto& adj : ens) {
    for (int lemma = 1; lemma <= 3; ++lemma) {
      const CarlemanTerms t = lemma_terms(lemma, adj, ws, s.region, 0, s.region.grid.steps());
      EXPECT_GE(t.lhs, 0.0);
      EXPECT_GE(t.source, 0.0);
      EXPECT_GE(t.local, 0.0);
      AdjointTrajectory twice = adj;
      for (auto* blk : {&twice.p, &twice.q, &twice.pairing_q})
        for (auto& f : *blk) f *= 2.0;
      const CarlemanTerms t2 = lemma_terms(lemma, twice, ws, s.region, 0, s.region.grid.steps());
      EXPECT_NEAR(t2.lhs, 4.0 * t.lhs, 1e-12 * t2.lhs);
      EXPECT_NEAR(t2.rhs(), 4.0 * t.rhs(), 1e-12 * t2.rhs());
    }
  }
}

TEST(CarlemanTerms, LemmaThreeHasNoSource) {
  const auto& s = setup();
  WeightSet ws = s.ws;
  eval_weights(ws, 1.0, 2.0);
  const auto ens = carleman_ensemble(s.region.grid, s.spec, 1, 3);
  const CarlemanTerms t = evaluate_lemma3(ens[0], ws, s.region);
  EXPECT_EQ(t.source, 0.0);
  const CarlemanTerms l1 = evaluate_lemma1(ens[0].p, ws, s.region);
  const CarlemanTerms l2 = evaluate_lemma2(ens[0].q, ws, s.region);
  EXPECT_NEAR(t.lhs, l1.lhs + l2.lhs, 1e-12 * t.lhs);
}

TEST(CarlemanTerms, LevelRangesAdd) {
  const auto& s = setup();
  WeightSet ws = s.ws;
  eval_weights(ws, 1.0, 2.0);
  const auto ens = carleman_ensemble(s.region.grid, s.spec, 1, 4);
  const int M = s.region.grid.steps();
  const double all = lemma_terms(2, ens[0], ws, s.region, 1, M - 1).lhs;
  const double a = lemma_terms(2, ens[0], ws, s.region, 1, M / 2).lhs;
  const double b = lemma_terms(2, ens[0], ws, s.region, M / 2 + 1, M - 1).lhs;
  EXPECT_NEAR(all, a + b, 1e-12 * all);
  EXPECT_EQ(lemma_terms(2, ens[0], ws, s.region, 0, M).lhs, all);
}

TEST(CarlemanTerms, RatioIsNanWithoutRightSide) {
  CarlemanTerms t;
  t.lhs = 1.0;
  EXPECT_TRUE(std::isnan(t.ratio()));
  t.local = 2.0;
  EXPECT_DOUBLE_EQ(t.ratio(), 0.5);
}

TEST(CarlemanSweep, FitsSettleAboveThreshold) {
  const auto& s = setup();
  CarlemanSweepOptions opt;
  opt.ensemble = 6;
  const CarlemanReport rep = carleman_sweep(s.region, s.ws, s.spec, opt);
  EXPECT_EQ(rep.errors, 0);
  EXPECT_EQ(int(rep.rows.size()), 3 * 3 * 3 * 6);
  ASSERT_GT(rep.lambda_hat, 0.0);
  for (const auto& f : rep.fits) {
    EXPECT_TRUE(f.finite());
    if (f.lambda >= rep.lambda_hat) EXPECT_GE(f.s_hat, 0.0);
  }
  EXPECT_LT(rep.homogeneity_defect, 1e-12);
  EXPECT_LT(rep.edge_fraction, 1e-12);
  // c_hat is the maximum of the per-sample ratios.
  const CarlemanFit* f = rep.fit(2, rep.lambda_hat);
  ASSERT_NE(f, nullptr);
  double top = 0.0;
  for (const auto& row : rep.rows)
    if (row.lemma == 2 && row.lambda == rep.lambda_hat && row.s == f->s.front())
      top = std::max(top, row.terms.ratio());
  EXPECT_DOUBLE_EQ(f->c_hat.front(), top);
}

TEST(CarlemanSweep, EnsembleIsReproducible) {
  const auto& s = setup();
  const auto a = carleman_ensemble(s.region.grid, s.spec, 2, 99);
  const auto b = carleman_ensemble(s.region.grid, s.spec, 2, 99);
  const auto c = carleman_ensemble(s.region.grid, s.spec, 2, 100);
  EXPECT_EQ((a[1].q.back() - b[1].q.back()).norm(), 0.0);
  EXPECT_GT((a[1].q.back() - c[1].q.back()).norm(), 0.0);
}
