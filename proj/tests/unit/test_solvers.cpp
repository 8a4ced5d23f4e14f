#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "viscoctl/errors.hpp"
#include "viscoctl/region.hpp"
#include "viscoctl/solvers.hpp"

using namespace viscoctl;

namespace {

Grid line(int nodes, double T, int steps) { return Grid::build(1, {1.0}, {nodes}, T, steps); }

Field sine(const Grid& g, int k) {
  return g.sample([k](const Point& x) { return std::sin(k * std::numbers::pi * x.x()); });
}

}  // namespace

TEST(LinearEvolution, HeatModeDecaysWithCrankNicolsonFactor) {
  const Grid g = line(33, 0.3, 30);
  const LinearEvolution evo(laplacian_matrix(g), g.dt());
  const double mu = discrete_dirichlet_eigenvalue(g, 2);
  const double amp = (1.0 - 0.5 * g.dt() * mu) / (1.0 + 0.5 * g.dt() * mu);
  const Field u0 = sine(g, 2);
  const Field uT = evo.forward_final(u0, g.steps());
  EXPECT_LT((uT - std::pow(amp, g.steps()) * u0).norm(), 1e-12);
  EXPECT_NEAR(l2_norm(g, uT) / l2_norm(g, u0), std::exp(-4.0 * std::numbers::pi * std::numbers::pi * 0.3), 2e-3);
}

TEST(LinearEvolution, ConstantForcingReachesSteadyState) {
  // u' = -u + 1 with the trapezoid rule is exact for the fixed point u = 1.
  const Grid g = line(7, 1.0, 10);
  SparseMatrix A(g.size(), g.size());
  A.setIdentity();
  A *= -1.0;
  const LinearEvolution evo(A, g.dt());
  std::vector<Field> f(std::size_t(g.steps()) + 1, Field::Ones(g.size()));
  const Field u = evo.forward_final(Field::Ones(g.size()), g.steps(), f);
  EXPECT_LT((u - Field::Ones(g.size())).norm(), 1e-14);
}

TEST(LinearEvolution, RejectsBadInput) {
  const Grid g = line(7, 1.0, 10);
  EXPECT_THROW(LinearEvolution(laplacian_matrix(g), 0.0), PreconditionError);
  const LinearEvolution evo(laplacian_matrix(g), 0.1);
  EXPECT_THROW(evo.forward(Field::Zero(g.size()), 10, std::vector<Field>(3, Field::Zero(g.size()))),
               PreconditionError);
  EXPECT_THROW(evo.adjoint(Field::Zero(2), 10), PreconditionError);
}

TEST(Coupled, AdjointConsistencyWithMovingMask) {
  const Grid g = line(41, 1.0, 80);
  const ProblemSpec spec = ProblemSpec::from_function(g, [](const Point& x) { return 2.0 + std::sin(2 * std::numbers::pi * x.x()); });
  const RegionSpec rs = RegionSpec::nested(Shape::interval(-0.3, 0.3), 0.05, 0.1);
  const MovingRegion r = build_moving_region(FlowField::translation(Point(0.9, 0.0)), rs, g);
  for (MaskMode mode : {MaskMode::Sharp, MaskMode::Smoothed})
    EXPECT_LT(adjoint_consistency(g, spec, control_masks(r, RegionSet::Omega, mode), 3), 1e-12);
}

TEST(Coupled, UnitDampingDecouplesY) {
  // With b = 1: y' = Lap y + z and z' = -z, so z(t) = e^{-t} z0 up to the CN factor.
  const Grid g = line(21, 0.5, 50);
  const ProblemSpec spec = ProblemSpec::constant(g, 1.0);
  const Field z0 = sine(g, 3);
  const auto tr = solve_coupled_forward(g, spec, Field::Zero(g.size()), z0, fixed_masks(g, NodeMask(std::size_t(g.size()), 0)));
  const double amp = std::pow((1.0 - 0.5 * g.dt()) / (1.0 + 0.5 * g.dt()), g.steps());
  EXPECT_LT((tr.z.back() - amp * z0).norm(), 1e-13);
}

TEST(Coupled, SplittingResidualConvergesAtSecondOrder) {
  std::vector<double> hs, errs;
  for (int N : {40, 80, 160}) {
    const Grid g = line(N + 1, 0.2, 2 * N);
    const ProblemSpec spec = ProblemSpec::from_function(g, [](const Point& x) { return 2.0 + 0.5 * std::cos(2 * std::numbers::pi * x.x()); });
    const auto chi = fixed_masks(g, NodeMask(std::size_t(g.size()), 0));
    const auto tr = solve_coupled_forward(g, spec, sine(g, 1), sine(g, 2), chi);
    const SplittingReport rep = verify_splitting(g, spec, tr, chi);
    hs.push_back(g.h(0));
    errs.push_back(rep.max());
  }
  EXPECT_GT(fitted_order(hs, errs), 1.8);
}

TEST(Viscoelastic, EnergyBalanceHoldsWithControl) {
  const Grid g = line(41, 1.0, 200);
  const ProblemSpec spec = ProblemSpec::constant(g, 1.5);
  NodeMask m(std::size_t(g.size()), 0);
  for (Eigen::Index i = 5; i < 15; ++i) m[std::size_t(i)] = 1;
  SpaceTimeField h;
  for (int n = 0; n <= g.steps(); ++n) h.push_back(Field::Constant(g.size(), std::cos(3.0 * g.time(n))));
  const ViscoTrajectory tr = solve_viscoelastic(g, spec, sine(g, 1), sine(g, 2), fixed_masks(g, m), h);
  ASSERT_EQ(tr.balance.size(), std::size_t(g.steps()));
  double worst = 0.0;
  for (double b : tr.balance) worst = std::max(worst, std::abs(b));
  EXPECT_LT(worst, 1e-10 * tr.energy.front());
}

TEST(Viscoelastic, UncontrolledEnergyIsNonincreasing) {
  const Grid g = line(41, 1.0, 100);
  const ProblemSpec spec = ProblemSpec::constant(g, 0.5);
  const auto tr = solve_viscoelastic(g, spec, sine(g, 1), sine(g, 3), fixed_masks(g, NodeMask(std::size_t(g.size()), 0)));
  for (std::size_t n = 1; n < tr.energy.size(); ++n) EXPECT_LE(tr.energy[n], tr.energy[n - 1] * (1.0 + 1e-12));
  const double E0 = 0.5 * (l2_norm(g, sine(g, 3)) * l2_norm(g, sine(g, 3)) +
                           discrete_dirichlet_eigenvalue(g, 1) * l2_norm(g, sine(g, 1)) * l2_norm(g, sine(g, 1)));
  EXPECT_NEAR(tr.energy.front(), E0, 1e-10 * E0);
}

TEST(Operators, BlockStructure) {
  const Grid g = line(9, 1.0, 4);
  const ProblemSpec spec = ProblemSpec::constant(g, 3.0);
  const SparseMatrix A = coupled_operator(g, spec);
  const Eigen::Index n = g.size();
  const Eigen::MatrixXd D(A);
  EXPECT_DOUBLE_EQ(D(0, n), 1.0);
  EXPECT_DOUBLE_EQ(D(n, 0), 2.0);
  EXPECT_DOUBLE_EQ(D(n, n), -1.0);
  EXPECT_NEAR(D(0, 0), -2.0 / (g.h(0) * g.h(0)) - 2.0, 1e-9);
  ProblemSpec bad = spec;
  bad.b[0] = std::nan("");
  EXPECT_THROW(coupled_operator(g, bad), PreconditionError);
}

TEST(FittedOrder, RecoversPowerLaw) {
  EXPECT_NEAR(fitted_order({0.1, 0.05, 0.025}, {3e-2, 7.5e-3, 1.875e-3}), 2.0, 1e-12);
  EXPECT_THROW(fitted_order({0.1}, {1.0}), PreconditionError);
  EXPECT_THROW(fitted_order({0.1, 0.05}, {1.0, 0.0}), PreconditionError);
}
