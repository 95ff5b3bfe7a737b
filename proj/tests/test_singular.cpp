#include <doctest.h>

#include <cmath>
#include <random>

#include "hambvp/singular.hpp"

using namespace hambvp;

TEST_CASE("corank counts relative singular values") {
  CHECK(corank(Eigen::MatrixXd::Zero(2, 2)) == 2);
  Eigen::Matrix2d d = Eigen::Vector2d(1.0, 0.0).asDiagonal();
  CHECK(corank(d) == 1);
  CHECK(corank(Eigen::MatrixXd::Identity(3, 3)) == 0);
  CHECK_THROWS_AS(corank(d, 2.0), std::invalid_argument);

  // invariance under well-conditioned multipliers
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  M(0, 0) = 1.0;
  M(1, 1) = 0.5;  // corank 1
  for (int t = 0; t < 20; ++t) {
    Eigen::Matrix3d A, B;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        A(i, j) = unif(rng);
        B(i, j) = unif(rng);
      }
    A += 3.0 * Eigen::Matrix3d::Identity();  // condition <= ~1e3
    B += 3.0 * Eigen::Matrix3d::Identity();
    CHECK(corank(A * M * B) == 1);
  }
}

TEST_CASE("locate_umbilic rejects problems away from the corank-2 regime") {
  auto bvp = catalog_bvp("example5_fold");
  FlowSpec spec{Method::sv, 1, 1.0, false, false};
  CHECK_THROWS_AS(locate_umbilic(bvp, spec, Eigen::Vector3d::Zero()), std::invalid_argument);
}

TEST_CASE("level set of the example5 problem is the line y = 0 mapped to (mu, mu)") {
  auto bvp = catalog_bvp("example5_fold");
  FlowSpec spec{Method::sv, 1, 1.0, false, false};
  LevelSetSpec ls;
  ls.free_vars = {{FreeVar::MuComponent, 0}, {FreeVar::YComponent, 0}};
  ls.lo = Eigen::Vector2d(-0.5, -0.4);
  ls.hi = Eigen::Vector2d(0.5, 0.4);
  ls.resolution = {41, 41};
  const LevelSetResult res = level_bifurcation_set(bvp, spec, ls);
  REQUIRE(res.seg.vertices.size() > 10);
  for (size_t i = 0; i < res.seg.vertices.size(); ++i) {
    CHECK(std::abs(res.seg.vertices[i][1]) < 1e-9);          // zero set of 6y
    CHECK(res.mapped[i].size() == 2);
    CHECK(std::abs(res.mapped[i][0] - res.mapped[i][1]) < 1e-9);  // X = mu on the set
  }
}

TEST_CASE("level set validates its box") {
  auto bvp = catalog_bvp("example5_fold");
  FlowSpec spec{Method::sv, 1, 1.0, false, false};
  LevelSetSpec ls;
  ls.free_vars = {{FreeVar::MuComponent, 0}};
  ls.lo = Eigen::VectorXd::Constant(1, 0.0);
  ls.hi = Eigen::VectorXd::Constant(1, 1.0);
  ls.resolution = {8};
  CHECK_THROWS_AS(level_bifurcation_set(bvp, spec, ls), std::invalid_argument);
}

TEST_CASE("all-same-sign grids produce an empty level set") {
  auto bvp = catalog_bvp("example5_fold");
  FlowSpec spec{Method::sv, 1, 1.0, false, false};
  LevelSetSpec ls;
  ls.free_vars = {{FreeVar::MuComponent, 0}, {FreeVar::YComponent, 0}};
  ls.lo = Eigen::Vector2d(-0.5, 0.2);  // y > 0 everywhere: det = 6y > 0
  ls.hi = Eigen::Vector2d(0.5, 0.4);
  ls.resolution = {33, 33};
  const LevelSetResult res = level_bifurcation_set(bvp, spec, ls);
  CHECK(res.empty());
}

TEST_CASE("level sets converge under grid refinement") {
  auto bvp = catalog_bvp("henon_heiles");
  FlowSpec spec{Method::sv, 10, 1.0, false, false};
  LevelSetSpec ls;
  ls.free_vars = {{FreeVar::XStarComponent, 1}, {FreeVar::YComponent, 0}, {FreeVar::YComponent, 1}};
  const Eigen::Vector3d center(1.38279698, 0.0, 1.93642364);
  ls.lo = center - Eigen::Vector3d::Constant(0.35);
  ls.hi = center + Eigen::Vector3d::Constant(0.35);
  ls.resolution = {17, 17, 17};
  const LevelSetResult coarse = level_bifurcation_set(bvp, spec, ls);
  ls.resolution = {33, 33, 33};
  const LevelSetResult fine = level_bifurcation_set(bvp, spec, ls);
  REQUIRE(coarse.tri.vertices.size() > 0);
  REQUIRE(fine.tri.vertices.size() > 0);

  GridSpec3 coarse_grid{ls.lo, ls.hi, 17, 17, 17};
  const double cell = coarse_grid.cell_diameter();
  // every coarse vertex has a fine vertex within the coarse cell diameter
  double worst = 0.0;
  for (const auto& v : coarse.tri.vertices) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : fine.tri.vertices) best = std::min(best, (v - w).norm());
    worst = std::max(worst, best);
  }
  CHECK(worst < cell);
}

TEST_CASE("classify_A on analytic models") {
  // fold germ: residual 3y^2 + mu (example5), c2 = 6
  {
    auto bvp = catalog_bvp("example5_fold");
    FlowSpec spec{Method::sv, 1, 1.0, false, false};
    CHECK(classify_A(bvp, spec, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)) == "A2");
  }
  // cusp model x^4 + mu2 x^2 + mu1 x at its cusp point: gradient 4x^3 + ...
  {
    ResidualFn cusp = [](const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
      Eigen::VectorXd r(1);
      r[0] = 4.0 * std::pow(y[0], 3) + 2.0 * mu[1] * y[0] + mu[0];
      return r;
    };
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(1, 1);
    CHECK(classify_A(cusp, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(2), J) == "A3");
  }
  // quartic root: higher than A3
  {
    ResidualFn quart = [](const Eigen::VectorXd& y, const Eigen::VectorXd&) {
      Eigen::VectorXd r(1);
      r[0] = std::pow(y[0], 4);
      return r;
    };
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(1, 1);
    CHECK(classify_A(quart, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), J) == "higher");
  }
  // corank must be 1
  {
    ResidualFn lin = [](const Eigen::VectorXd& y, const Eigen::VectorXd&) { return y; };
    CHECK_THROWS_AS(classify_A(lin, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(2, 2)),
                    std::invalid_argument);
  }
}

TEST_CASE("Bratu fold classifies as A2") {
  auto bvp = catalog_bvp("bratu", {{"C", 1.0}});
  FlowSpec spec{Method::sv, 20, 1.0, false, false};
  auto seed = shoot(bvp, spec, Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 0.5));
  REQUIRE(seed.converged);
  auto fold = fold_polish(bvp, spec, seed.point, 0);
  REQUIRE(fold.has_value());
  CHECK(classify_A(bvp, spec, fold->y, fold->mu) == "A2");
}

TEST_CASE("sphere conjugate problem recast on a 2d box collapses toward the antipode") {
  // For geodesics the degeneracy structure is exercised in the georattle
  // suite; here we check the 2d marching-squares path on a synthetic field
  // with the same collapsing-ring geometry: det(u) = |u|^2 - r(mu)^2 with
  // r -> 0, extracted rings shrink to a point.
  for (double r : {0.3, 0.05}) {
    GridSpec2 grid{Eigen::Vector2d(-0.5, -0.5), Eigen::Vector2d(0.5, 0.5), 101, 101};
    Eigen::MatrixXd field(101, 101);
    for (int i = 0; i < 101; ++i)
      for (int j = 0; j < 101; ++j) field(i, j) = grid.node(i, j).squaredNorm() - r * r;
    const Segments2 seg = marching_squares(field, grid, nullptr);
    REQUIRE(seg.vertices.size() > 8);
    double max_radius = 0.0;
    for (const auto& v : seg.vertices) max_radius = std::max(max_radius, v.norm());
    CHECK(max_radius < r * 1.05);
    CHECK(max_radius > r * 0.95);
  }
}
