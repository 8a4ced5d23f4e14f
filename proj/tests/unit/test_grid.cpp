#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "viscoctl/errors.hpp"
#include "viscoctl/grid.hpp"

using namespace viscoctl;

TEST(Grid, CountsIncludeBoundaryNodes) {
  const Grid g = Grid::build(2, {1.0, 2.0}, {11, 21}, 1.0, 10);
  EXPECT_EQ(g.size(), 9 * 19);
  EXPECT_DOUBLE_EQ(g.h(0), 0.1);
  EXPECT_DOUBLE_EQ(g.h(1), 0.1);
  EXPECT_DOUBLE_EQ(g.dt(), 0.1);
  const Point p = g.coord(g.index(2, 3));
  EXPECT_NEAR(p.x(), 0.3, 1e-15);
  EXPECT_NEAR(p.y(), 0.4, 1e-15);
}

TEST(Grid, RejectsDegenerateInput) {
  EXPECT_THROW(Grid::build(3, {1, 1, 1}, {5, 5, 5}, 1.0, 10), PreconditionError);
  EXPECT_THROW(Grid::build(1, {1.0}, {4}, 1.0, 10), PreconditionError);
  EXPECT_THROW(Grid::build(1, {-1.0}, {11}, 1.0, 10), PreconditionError);
  EXPECT_THROW(Grid::build(1, {1.0}, {11}, 0.0, 10), PreconditionError);
  EXPECT_THROW(Grid::build(1, {1.0}, {11}, 1.0, 1), PreconditionError);
}

TEST(Grid, SparseAndMatrixFreeLaplaciansAgree) {
  const Grid g = Grid::build(2, {1.0, 1.5}, {9, 12}, 1.0, 4);
  Field u = g.sample([](const Point& x) { return std::exp(x.x()) * std::cos(3.0 * x.y()); });
  EXPECT_LT((laplacian_matrix(g) * u - apply_laplacian(g, u)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Grid, DirichletEigenvalueMatchesClosedForm) {
  const Grid g = Grid::build(1, {1.0}, {41}, 1.0, 4);
  const double h = g.h(0);
  for (int k : {1, 2, 5}) {
    const double expected = 4.0 / (h * h) * std::pow(std::sin(k * std::numbers::pi * h / 2.0), 2);
    EXPECT_NEAR(discrete_dirichlet_eigenvalue(g, k), expected, 1e-9 * expected);
    const Field phi = g.sample([&](const Point& x) { return std::sin(k * std::numbers::pi * x.x()); });
    EXPECT_LT((apply_laplacian(g, phi) + expected * phi).norm(), 1e-8 * expected);
  }
}

TEST(Grid, QuadratureNorms) {
  const Grid g = Grid::build(1, {1.0}, {101}, 1.0, 4);
  const Field one = Field::Ones(g.size());
  EXPECT_NEAR(inner(g, one, one), 0.99, 1e-12);
  const Field s = g.sample([](const Point& x) { return std::sin(std::numbers::pi * x.x()); });
  EXPECT_NEAR(l2_norm(g, s), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Grid, SerializeRoundTrip) {
  const Grid g = Grid::build(2, {1.0, 0.5}, {7, 9}, 2.5, 40);
  const Grid back = Grid::parse(g.serialize());
  EXPECT_TRUE(back.same_space(g));
  EXPECT_EQ(back.steps(), 40);
  EXPECT_DOUBLE_EQ(back.horizon(), 2.5);
}

TEST(Grid, WithHorizonKeepsSpace) {
  const Grid g = Grid::build(1, {1.0}, {21}, 1.5, 150);
  const Grid sub = g.with_horizon(1.25, 125);
  EXPECT_TRUE(sub.same_space(g));
  EXPECT_DOUBLE_EQ(sub.dt(), g.dt());
}

TEST(Grid, SizeChecksThrow) {
  const Grid g = Grid::build(1, {1.0}, {11}, 1.0, 10);
  EXPECT_THROW(check_same_size(g, Field::Zero(3), "u"), PreconditionError);
  EXPECT_THROW(check_levels(g, SpaceTimeField(3, Field::Zero(g.size())), "f"), PreconditionError);
  EXPECT_NO_THROW(check_levels(g, zero_spacetime(g), "f"));
}
