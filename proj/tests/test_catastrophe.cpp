#include <doctest.h>

#include <cmath>
#include <random>

#include "hambvp/catastrophe.hpp"

using namespace hambvp;

namespace {
std::mt19937 rng(61);
std::uniform_real_distribution<double> unif(-1.0, 1.0);

Eigen::VectorXd random_mu(int m) {
  Eigen::VectorXd mu(m);
  for (int i = 0; i < m; ++i) mu[i] = unif(rng);
  return mu;
}
}  // namespace

TEST_CASE("unfolding closed forms match jet differentiation") {
  for (CatClass c : {CatClass::A2, CatClass::A3, CatClass::A4, CatClass::A5, CatClass::D4plus, CatClass::D4minus,
                     CatClass::D5}) {
    const int arity = unfolding_arity(c);
    for (int t = 0; t < 30; ++t) {
      const Eigen::VectorXd mu = random_mu(unfolding_codim(c));
      Eigen::VectorXd x(arity);
      for (int i = 0; i < arity; ++i) x[i] = unif(rng);
      const UnfoldingEval ev = unfolding_eval(c, mu, x);

      JetVec xj;
      for (int i = 0; i < arity; ++i) xj.push_back(Jet::seeded(x[i], arity, i));
      const Jet vj = unfolding_value_jet(c, mu, xj);
      INFO(cat_class_name(c));
      CHECK(std::abs(vj.value() - ev.value) < 1e-12 * (1.0 + std::abs(ev.value)));
      for (int i = 0; i < arity; ++i) CHECK(std::abs(vj.partial(i) - ev.grad[i]) < 1e-12 * (1.0 + std::abs(ev.grad[i])));

      // Hessian against jets-over-values of the gradient: finite differences
      // of the jet gradient at step 1e-6
      for (int i = 0; i < arity; ++i)
        for (int j = 0; j < arity; ++j) {
          Eigen::VectorXd xp = x, xm = x;
          xp[j] += 1e-6;
          xm[j] -= 1e-6;
          const double fd = (unfolding_eval(c, mu, xp).grad[i] - unfolding_eval(c, mu, xm).grad[i]) / 2e-6;
          CHECK(std::abs(ev.hess(i, j) - fd) < 1e-6 * (1.0 + std::abs(fd)));
        }
    }
  }
  // arity errors
  CHECK_THROWS_AS(unfolding_eval(CatClass::A2, random_mu(1), Eigen::VectorXd::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(unfolding_eval(CatClass::D4plus, random_mu(3), Eigen::VectorXd::Zero(1)), std::invalid_argument);
}

TEST_CASE("table values at hand-checked points") {
  // A2 at mu1 = 0, x = 1: grad = 3
  CHECK(unfolding_eval(CatClass::A2, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)).grad[0] ==
        doctest::Approx(3.0));
  // D4minus germ degeneracy at the origin
  const UnfoldingEval ev = unfolding_eval(CatClass::D4minus, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2));
  CHECK(ev.grad.norm() == 0.0);
  CHECK(ev.hess.norm() == 0.0);
  // D4plus Hessian determinant vs finite differences at random points
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd mu = random_mu(3);
    Eigen::VectorXd x(2);
    x << unif(rng), unif(rng);
    const UnfoldingEval e = unfolding_eval(CatClass::D4plus, mu, x);
    Eigen::Matrix2d h_fd;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += 1e-6;
        xm[j] -= 1e-6;
        h_fd(i, j) = (unfolding_eval(CatClass::D4plus, mu, xp).grad[i] -
                      unfolding_eval(CatClass::D4plus, mu, xm).grad[i]) /
                     2e-6;
      }
    CHECK(std::abs(e.hess.determinant() - h_fd.determinant()) < 1e-8 * (1.0 + std::abs(h_fd.determinant())));
  }
}

TEST_CASE("vector unfolding recovers the gradient at mu4 = 0") {
  for (bool plus : {true, false}) {
    VectorUnfolding vu(plus, 2);
    for (int t = 0; t < 40; ++t) {
      Eigen::VectorXd mu = random_mu(4);
      mu[3] = 0.0;
      const Eigen::Vector2d xy(unif(rng), unif(rng));
      const Eigen::Vector2d f = vu.eval(xy, mu);
      const Eigen::Vector2d g = vu.grad_potential(xy, mu);
      CHECK((f - g).lpNorm<Eigen::Infinity>() < 1e-14 * (1.0 + g.norm()));
    }
  }
}

TEST_CASE("printed determinant formulas match direct differentiation") {
  for (bool plus : {true, false}) {
    VectorUnfolding vu(plus, 2);
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXd mu = random_mu(4);
      const Eigen::Vector2d xy(unif(rng), unif(rng));
      const double det = vu.det_jac(xy, mu);
      const double closed = vu.det_jac_closed_form(xy, mu[2], mu[3]);
      CHECK(std::abs(det - closed) < 1e-12 * (1.0 + std::abs(det)));
    }
  }
}

TEST_CASE("elliptic umbilic cannot merge under the non-gradient perturbation") {
  // exactly zero at the origin when mu4 = 0 (and mu3 = 0)
  VectorUnfolding vu(false, 2);
  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(4);
  CHECK(vu.frobenius_jac({0.0, 0.0}, mu0) == 0.0);
  CHECK(vu.det_jac_closed_form({0.1, 0.2}, 0.0, 0.0) == doctest::Approx(-4.0 * 0.01 - 12.0 * 0.04));

  // min over a [-2,2]^2 grid of ||Df||_F stays positive for mu4 != 0
  std::mt19937 local(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const double mu3 = u(local);
    double mu4 = u(local);
    if (std::abs(mu4) < 0.05) mu4 = 0.05;
    CHECK(d4_min_frobenius(false, mu3, mu4, 101) > 0.0);
  }
  CHECK(d4_min_frobenius(false, 0.0, 0.0, 101) == 0.0);
}

TEST_CASE("d4 level set slices") {
  // elliptic umbilic at mu3 = mu4 = 0: single singular point
  const D4LevelSet degenerate = d4_level_set(false, {0.0}, 0.0, 64);
  REQUIRE(degenerate.slices.size() == 1);
  CHECK(degenerate.slices[0].degenerate_point);
  CHECK(degenerate.slices[0].xy.size() == 1);
  CHECK(degenerate.slices[0].xy[0].norm() == 0.0);
  CHECK(degenerate.slices[0].mu12[0].norm() == 0.0);

  // hyperbolic umbilic vertex at mu4 = 0: Df vanishes at the origin slice
  CHECK(d4_min_frobenius(true, 0.0, 0.0, 101) == 0.0);
  // and cannot vanish anywhere once mu4 != 0
  CHECK(d4_min_frobenius(true, 0.0, 0.1, 101) > 0.0);
  CHECK(d4_min_frobenius(true, 0.05, 0.1, 101) > 0.0);

  // elliptic slices carry three cusps (the deltoid), all on the level curve
  const D4LevelSet minus = d4_level_set(false, {0.12}, 0.0, 512);
  CHECK(minus.slices[0].cusps.size() == 3);
  VectorUnfolding vu(false, 2);
  for (const D4CuspPoint& c : minus.slices[0].cusps) {
    CHECK(std::abs(vu.det_jac_closed_form(c.xy, 0.12, 0.0)) < 1e-8);
    // analytic cusp points of the unperturbed deltoid: (+-mu3, 0), (0, mu3)
    const bool matches = (std::abs(c.xy[0] - 0.12) < 1e-6 && std::abs(c.xy[1]) < 1e-6) ||
                         (std::abs(c.xy[0] + 0.12) < 1e-6 && std::abs(c.xy[1]) < 1e-6) ||
                         (std::abs(c.xy[0]) < 1e-6 && std::abs(c.xy[1] - 0.12) < 1e-6);
    CHECK(matches);
  }

  CHECK_THROWS_AS(d4_level_set(true, {0.1}, 0.1, 16), std::invalid_argument);
}

TEST_CASE("swallowtail points: printed formula arithmetic") {
  const auto pts = swallowtail_points(0.24);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].xy[0] == doctest::Approx(-0.06).epsilon(1e-12));
  CHECK(std::abs(pts[0].xy[1]) == doctest::Approx(0.0173205080756888).epsilon(1e-10));
  CHECK(std::abs(pts[0].mu3) == doctest::Approx(0.0519615242270663).epsilon(1e-10));
  const auto degenerate = swallowtail_points(0.0);
  REQUIRE(degenerate.size() == 1);
  CHECK(degenerate[0].xy.norm() == 0.0);
}

TEST_CASE("traced cusp-line merges agree with the closed-form swallowtails") {
  for (double mu4 : {0.1, 0.24}) {
    const auto traced = traced_swallowtail_points(mu4, 0.2, 2048);
    const auto closed = swallowtail_points(mu4);
    REQUIRE(traced.size() == 2);
    for (const SwallowtailPoint& t : traced) {
      double best = std::numeric_limits<double>::infinity();
      for (const SwallowtailPoint& c : closed)
        best = std::min(best, (t.xy - c.xy).norm() + std::abs(t.mu3 - c.mu3));
      INFO("mu4 = " << mu4);
      CHECK(best < 1e-4);
    }
  }
}

TEST_CASE("lemma-form vector unfolding evaluates for general k") {
  VectorUnfolding vu(true, 3);  // D5-type germ x^2 y + y^4 in the roots module
  CHECK(vu.mu_dim() == 5);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(5);
  const Eigen::Vector2d base = vu.eval({0.5, -0.3}, mu);
  CHECK(base[0] == doctest::Approx(2.0 * 0.5 * -0.3));
  CHECK(base[1] == doctest::Approx(0.25 + 4.0 * std::pow(-0.3, 3)));
  // FD check of the Jacobian
  for (int t = 0; t < 10; ++t) {
    mu = random_mu(5);
    const Eigen::Vector2d xy(unif(rng), unif(rng));
    const Eigen::Matrix2d J = vu.jac(xy, mu);
    for (int j = 0; j < 2; ++j) {
      Eigen::Vector2d xp = xy, xm = xy;
      xp[j] += 1e-7;
      xm[j] -= 1e-7;
      const Eigen::Vector2d col = (vu.eval(xp, mu) - vu.eval(xm, mu)) / 2e-7;
      CHECK((J.col(j) - col).lpNorm<Eigen::Infinity>() < 1e-6 * (1.0 + col.norm()));
    }
  }
  CHECK_THROWS_AS(VectorUnfolding(true, 1), std::invalid_argument);
}
