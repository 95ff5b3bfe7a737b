#include <doctest.h>

#include <cmath>

#include "hambvp/bvp.hpp"
#include "hambvp/export.hpp"
#include "hambvp/systems.hpp"

using namespace hambvp;

namespace {

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }

/// Generating-function style test map with X-component f(y) - x; symplectic
/// for any f (same completion as the example5 construction). The Dirichlet
/// problem x = 0, X = 0 then has residual exactly f(y).
class CubicModelMap final : public ExplicitSymplecticMap {
 public:
  CubicModelMap() : ExplicitSymplecticMap(1, "cubic_model", 2, Eigen::VectorXd::Zero(2)) {}
  JetVec apply(const JetVec& z, const JetVec& mu) const override {
    const Jet& x = z[0];
    const Jet& y = z[1];
    const Jet f = y * y * y + mu[1] * y + mu[0];
    return {f - x, (x - f) / 2.0 - y};
  }
};

/// Brute-force oracle for the cubic model: root gap at the fold located by
/// bisection on the root count of y^3 + mu2 y + mu1 (companion-matrix roots).
double cubic_break_oracle(double mu1) {
  auto real_roots = [&](double mu2) {
    Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    companion(0, 2) = -mu1;
    companion(1, 2) = -mu2;
    Eigen::EigenSolver<Eigen::Matrix3d> es(companion);
    std::vector<double> out;
    for (int i = 0; i < 3; ++i)
      if (std::abs(es.eigenvalues()[i].imag()) < 1e-9) out.push_back(es.eigenvalues()[i].real());
    std::sort(out.begin(), out.end());
    return out;
  };
  double lo = -3.0, hi = 0.0;  // 3 roots at lo, 1 at hi
  REQUIRE(real_roots(lo).size() == 3);
  REQUIRE(real_roots(hi).size() == 1);
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (real_roots(mid).size() == 3 ? lo : hi) = mid;
  }
  const auto roots = real_roots(lo);
  // pair = the two closest roots; continuing = the remaining one
  double d01 = roots[1] - roots[0], d12 = roots[2] - roots[1];
  const double pair_mid = d01 < d12 ? 0.5 * (roots[0] + roots[1]) : 0.5 * (roots[1] + roots[2]);
  const double survivor = d01 < d12 ? roots[2] : roots[0];
  return std::abs(survivor - pair_mid);
}

BifurcationDiagram cubic_sweep(const std::shared_ptr<CubicModelMap>& map, double mu1) {
  SeparatedBVP bvp = SeparatedBVP::dirichlet(MapPtr(map), vec1(0.0), vec1(0.0), 1.0);
  FlowSpec spec{Method::sv, 1, 1.0, false, false};
  SweepConfig cfg;
  for (int i = 0; i <= 120; ++i) {
    Eigen::VectorXd mu(2);
    mu << mu1, -2.0 + 2.2 * i / 120.0;
    cfg.mu_grid.push_back(mu);
  }
  for (int i = 0; i <= 24; ++i) cfg.y_starts.push_back(vec1(-2.0 + 4.0 * i / 24));
  cfg.scenario = "cubic_model";
  return sweep(bvp, spec, cfg);
}

}  // namespace

TEST_CASE("residual definitions") {
  // Bratu with C = 0 is the free particle: residual(p0) = p0
  auto bvp0 = catalog_bvp("bratu", {{"C", 0.0}});
  FlowSpec spec{Method::sv, 20, 1.0, false, false};
  CHECK(residual(bvp0, spec, vec1(0.37), vec1(0.0))[0] == doctest::Approx(0.37).epsilon(1e-14));

  // example5 at mu = -3, y = 1: critical point of y^3 - 3y
  auto bvp5 = catalog_bvp("example5_fold");
  CHECK(residual(bvp5, spec, vec1(1.0), vec1(-3.0))[0] == doctest::Approx(0.0));

  // Henon-Heiles: residual equals the flow X-block minus X*
  auto bvphh = catalog_bvp("henon_heiles", {{"x2", 0.4}, {"X1", 0.05}, {"X2", -0.1}});
  Eigen::VectorXd y(2);
  y << 0.3, -0.2;
  const Eigen::VectorXd r = residual(bvphh, spec, y, Eigen::VectorXd(0));
  const Eigen::VectorXd z0 = bvp_start_state(bvphh, y);
  auto sys = *bvphh.system();
  const Eigen::VectorXd zt = flow(*sys, z0, Eigen::VectorXd(0), spec).z_final;
  CHECK(std::abs(r[0] - (zt[0] - 0.05)) < 1e-15);
  CHECK(std::abs(r[1] - (zt[1] + 0.1)) < 1e-15);
}

TEST_CASE("Bratu shooting finds both solutions; dense-scan oracle agrees") {
  auto bvp = catalog_bvp("bratu", {{"C", 1.0}});
  FlowSpec spec{Method::sv, 20, 1.0, false, false};
  const Eigen::VectorXd mu = vec1(1.0);

  // oracle: sign changes of the residual on a dense p0 grid
  std::vector<std::pair<double, double>> brackets;
  double prev = residual(bvp, spec, vec1(0.0), mu)[0];
  for (int i = 1; i <= 600; ++i) {
    const double p0 = 12.0 * i / 600;
    const double r = residual(bvp, spec, vec1(p0), mu)[0];
    if (prev * r < 0) brackets.push_back({p0 - 12.0 / 600, p0});
    prev = r;
  }
  REQUIRE(brackets.size() == 2);

  auto s1 = shoot(bvp, spec, mu, vec1(0.5));
  auto s2 = shoot(bvp, spec, mu, vec1(8.0));
  CHECK(s1.converged);
  CHECK(s2.converged);
  CHECK(std::abs(s1.point.y[0] - s2.point.y[0]) > 1e-2);
  CHECK(s1.point.y[0] > brackets[0].first);
  CHECK(s1.point.y[0] < brackets[0].second);
  CHECK(s2.point.y[0] > brackets[1].first);
  CHECK(s2.point.y[0] < brackets[1].second);

  // C = 3.6 is past the fold: the oracle finds no sign change, and no start
  // converges
  const Eigen::VectorXd mu_big = vec1(3.6);
  prev = residual(bvp, spec, vec1(0.0), mu_big)[0];
  bool any_sign_change = false;
  for (int i = 1; i <= 600; ++i) {
    const double r = residual(bvp, spec, vec1(12.0 * i / 600), mu_big)[0];
    if (prev * r < 0) any_sign_change = true;
    prev = r;
  }
  CHECK(!any_sign_change);
  for (double y0 : {0.5, 2.0, 5.0, 8.0, 11.0}) CHECK(!shoot(bvp, spec, mu_big, vec1(y0)).converged);
}

TEST_CASE("example5 shooting and analytic diagram") {
  auto bvp = catalog_bvp("example5_fold");
  FlowSpec spec{Method::sv, 1, 1.0, false, false};
  auto sr = shoot(bvp, spec, vec1(-0.03), vec1(0.09));
  CHECK(sr.converged);
  CHECK(sr.point.y[0] == doctest::Approx(0.1).epsilon(1e-9));

  SweepConfig cfg;
  for (int i = 0; i <= 100; ++i) cfg.mu_grid.push_back(vec1(-0.1 + 0.2 * i / 100));
  for (int i = 0; i <= 16; ++i) cfg.y_starts.push_back(vec1(-0.4 + 0.8 * i / 16));
  cfg.scenario = "example5_fold";
  const BifurcationDiagram diag = sweep(bvp, spec, cfg);

  size_t n_points = 0;
  for (const Branch& b : diag.branches)
    for (const BranchPoint& p : b.points) {
      ++n_points;
      // every stored point on the analytic set 3y^2 + mu = 0
      CHECK(std::abs(3.0 * p.y[0] * p.y[0] + p.mu[0]) < 1e-8);
      CHECK(p.mu[0] < 1e-12);  // empty diagram for mu > 0
    }
  CHECK(n_points > 50);

  // fold at mu = 0 within 1e-8
  auto seed = shoot(bvp, spec, vec1(-0.05), vec1(0.12));
  REQUIRE(seed.converged);
  auto fold = fold_polish(bvp, spec, seed.point, 0);
  REQUIRE(fold.has_value());
  CHECK(std::abs(fold->mu[0]) < 1e-8);
  CHECK(std::abs(fold->y[0]) < 1e-8);
}

TEST_CASE("continuation rounds the Bratu fold") {
  auto bvp = catalog_bvp("bratu", {{"C", 1.0}});
  FlowSpec spec{Method::sv, 20, 1.0, false, false};
  auto seed = shoot(bvp, spec, vec1(1.0), vec1(0.5));
  REQUIRE(seed.converged);
  ContinuationConfig cc;
  cc.ds = 2e-2;
  cc.ds_max = 0.1;
  cc.max_points = 800;
  cc.mu_min = 0.2;
  cc.mu_max = 4.0;
  std::string reason;
  const Branch branch = continue_branch(bvp, spec, seed.point, cc, &reason);

  double c_star = 0.0;
  int fold_count = 0;
  bool det_sign_change = false;
  double prev_det = branch.points.front().det_Dy;
  size_t fold_index = 0, det_index = 0;
  for (size_t i = 0; i < branch.points.size(); ++i) {
    const BranchPoint& p = branch.points[i];
    c_star = std::max(c_star, p.mu[0]);
    if (p.tag == PointTag::fold && fold_count == 0) fold_index = i;
    if (p.tag == PointTag::fold) ++fold_count;
    if (prev_det * p.det_Dy < 0 && !det_sign_change) {
      det_sign_change = true;
      det_index = i;
    }
    prev_det = p.det_Dy;
  }
  CHECK(c_star > 3.50);
  CHECK(c_star < 3.52);
  CHECK(fold_count >= 1);
  // fold flags coincide with the det sign change along the branch
  CHECK(det_sign_change);
  CHECK(std::abs(static_cast<long>(fold_index) - static_cast<long>(det_index)) <= 2);
  // the polished fold point is a genuinely singular solution, which plain
  // Newton shooting cannot meaningfully refine past
  const BranchPoint& fold = branch.points[fold_index];
  CHECK(std::abs(fold.det_Dy) < 1e-8);
  CHECK(fold.residual_norm < 1e-10);
  // continuation proceeded beyond the fold: both arms present
  CHECK(branch.points.back().mu[0] < c_star - 0.2);
}

TEST_CASE("pitchfork break on the analytic cubic model") {
  auto map = std::make_shared<CubicModelMap>();

  // mu1 = 0: perfect pitchfork, break 0
  {
    const BifurcationDiagram diag = cubic_sweep(map, 0.0);
    BreakWindow win{-2.0, 0.2, 1, 3.0};
    const BreakResult br = pitchfork_break(diag, win);
    CHECK(br.ok);
    CHECK(br.value <= br.noise_floor);
    CHECK(br.noise_floor < 1e-3);
  }

  // mu1 = 0.1: break equals the polynomial-root oracle
  {
    const BifurcationDiagram diag = cubic_sweep(map, 0.1);
    BreakWindow win{-2.0, 0.2, 1, 3.0};
    const BreakResult br = pitchfork_break(diag, win);
    const double oracle = cubic_break_oracle(0.1);
    CHECK(br.ok);
    CHECK(br.value == doctest::Approx(oracle).epsilon(1e-6));
  }

  // window without a fold is reported, not fabricated
  {
    const BifurcationDiagram diag = cubic_sweep(map, 0.1);
    BreakWindow win{0.05, 0.2, 1, 3.0};
    const BreakResult br = pitchfork_break(diag, win);
    CHECK(!br.ok);
    CHECK(br.message.find("no fold") != std::string::npos);
  }
}

TEST_CASE("stored diagrams re-verify their residuals on reload") {
  auto bvp = catalog_bvp("example5_fold");
  FlowSpec spec{Method::sv, 1, 1.0, false, false};
  SweepConfig cfg;
  for (int i = 0; i <= 30; ++i) cfg.mu_grid.push_back(vec1(-0.1 + 0.1 * i / 30));
  for (int i = 0; i <= 10; ++i) cfg.y_starts.push_back(vec1(-0.3 + 0.6 * i / 10));
  cfg.scenario = "example5_fold";
  const BifurcationDiagram diag = sweep(bvp, spec, cfg);
  REQUIRE(diag.total_points() > 0);

  const Json j = diagram_to_json(diag);
  const BifurcationDiagram loaded = diagram_from_json(j);
  CHECK(loaded.total_points() == diag.total_points());
  CHECK(verify_diagram(bvp, spec, loaded) < 1e-10);
}

TEST_CASE("sweep rejects empty grids") {
  auto bvp = catalog_bvp("example5_fold");
  FlowSpec spec{Method::sv, 1, 1.0, false, false};
  SweepConfig cfg;
  CHECK_THROWS_AS(sweep(bvp, spec, cfg), std::invalid_argument);
}
