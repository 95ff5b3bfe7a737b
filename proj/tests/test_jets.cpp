#include <doctest.h>

#include <cmath>
#include <random>

#include "hambvp/jet.hpp"
#include "hambvp/systems.hpp"

using namespace hambvp;

namespace {

// central finite-difference oracle for directional derivatives
template <typename F>
double fd_partial(F&& f, Eigen::VectorXd x, int k, double h = 1e-6) {
  Eigen::VectorXd xp = x, xm = x;
  xp[k] += h;
  xm[k] -= h;
  return (f(xp) - f(xm)) / (2.0 * h);
}

}  // namespace

TEST_CASE("lift seeds the requested directions") {
  Eigen::VectorXd x(1);
  x << 2.0;
  JetVec v = lift(x, {0});
  CHECK(v[0].value() == 2.0);
  CHECK(v[0].partial(0) == 1.0);

  Eigen::VectorXd x2(2);
  x2 << 1.0, 2.0;
  JetVec v2 = lift(x2, {1});
  CHECK(v2[0].partial(0) == 0.0);
  CHECK(v2[1].partial(0) == 1.0);

  CHECK_THROWS(lift(Eigen::VectorXd(0), {}));
}

TEST_CASE("jet algebra identities") {
  const Jet x = Jet::seeded(0.0, 1, 0);
  CHECK(exp(x).value() == doctest::Approx(1.0));
  CHECK(exp(x).partial(0) == doctest::Approx(1.0));
  CHECK(sin(x).value() == doctest::Approx(0.0));
  CHECK(sin(x).partial(0) == doctest::Approx(1.0));

  // d/dy of 3y^2 + mu - x at y = 1 is 6
  const Jet y = Jet::seeded(1.0, 1, 0);
  const Jet g = 3.0 * y * y + 0.25 - 7.0;
  CHECK(g.partial(0) == doctest::Approx(6.0));
}

TEST_CASE("division and sqrt guard singular values") {
  const Jet zero(0.0);
  const Jet one = Jet::seeded(1.0, 1, 0);
  CHECK_THROWS_AS(one / zero, std::domain_error);
  CHECK_THROWS_AS(sqrt(Jet(-1.0)), std::domain_error);
  CHECK_THROWS_AS(log(Jet(0.0)), std::domain_error);
}

TEST_CASE("seed dimension mismatches are hard errors") {
  const Jet a = Jet::seeded(1.0, 2, 0);
  const Jet b = Jet::seeded(1.0, 3, 1);
  CHECK_THROWS_AS(a + b, std::invalid_argument);
  CHECK_THROWS_AS(a * b, std::invalid_argument);
  // constants broadcast without error
  CHECK_NOTHROW(a + Jet(2.0));
  CHECK((a + 2.0).partial(0) == 1.0);
}

TEST_CASE("jacobian of identity and linear maps") {
  Eigen::VectorXd x(3);
  x << 0.3, -0.7, 2.0;
  auto identity = [](const JetVec& v) { return v; };
  CHECK((jacobian(identity, x) - Eigen::MatrixXd::Identity(3, 3)).norm() == doctest::Approx(0.0));

  Eigen::MatrixXd A(2, 3);
  A << 1, 2, 3, -4, 0.5, 6;
  auto lin = [&](const JetVec& v) {
    JetVec out;
    for (int i = 0; i < 2; ++i) {
      Jet acc(0.0);
      for (int j = 0; j < 3; ++j) acc += A(i, j) * v[j];
      out.push_back(acc);
    }
    return out;
  };
  CHECK((jacobian(lin, x) - A).norm() == doctest::Approx(0.0));
}

TEST_CASE("Henon-Heiles gradient matches central finite differences") {
  auto sys = std::get<SystemPtr>(catalog_build("henon_heiles"));
  Eigen::VectorXd z(4);
  z << 0.1, 0.2, 0.3, 0.4;
  auto energy_at = [&](const Eigen::VectorXd& w) {
    return sys->energy_value(w, Eigen::VectorXd(0));
  };
  auto map = [&](const JetVec& v) {
    JetVec q(v.begin(), v.begin() + 2), p(v.begin() + 2, v.end());
    return JetVec{sys->energy(q, p, {})};
  };
  const Eigen::MatrixXd J = jacobian(map, z);
  for (int k = 0; k < 4; ++k) {
    const double fd = fd_partial(energy_at, z, k);
    CHECK(std::abs(J(0, k) - fd) / (1.0 + std::abs(fd)) < 1e-6);
  }
}

TEST_CASE("catalog functions vs finite differences at random points") {
  std::mt19937 rng(2026);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  for (const std::string& name : catalog_system_names()) {
    CatalogEntry entry = catalog_build(name, {{"C", 1.0}});
    if (const auto* sysp = std::get_if<SystemPtr>(&entry)) {
      const auto& sys = **sysp;
      const int n = sys.dim_n();
      const Eigen::VectorXd mu = sys.default_mu();
      auto value_at = [&](const Eigen::VectorXd& z) { return sys.energy_value(z, mu); };
      double worst = 0.0;
      for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd z(2 * n);
        for (int i = 0; i < 2 * n; ++i) z[i] = unif(rng);
        auto map = [&](const JetVec& v) {
          JetVec q(v.begin(), v.begin() + n), p(v.begin() + n, v.end());
          return JetVec{sys.energy(q, p, lift_const(mu))};
        };
        const Eigen::MatrixXd J = jacobian(map, z);
        for (int k = 0; k < 2 * n; ++k) {
          const double fd = fd_partial(value_at, z, k);
          worst = std::max(worst, std::abs(J(0, k) - fd) / (1.0 + std::abs(J(0, k))));
        }
      }
      INFO(name);
      CHECK(worst < 1e-5);
    }
  }
  for (const std::string& name : catalog_surface_names()) {
    auto surf = hypersurface_catalog(name);
    const int n = surf->dim_ambient();
    auto value_at = [&](const Eigen::VectorXd& q) { return surf->f_value(q); };
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd q(n);
      for (int i = 0; i < n; ++i) q[i] = unif(rng) + 0.6;
      auto map = [&](const JetVec& v) { return JetVec{surf->f(v)}; };
      const Eigen::MatrixXd J = jacobian(map, q);
      for (int k = 0; k < n; ++k) {
        const double fd = fd_partial(value_at, q, k);
        worst = std::max(worst, std::abs(J(0, k) - fd) / (1.0 + std::abs(J(0, k))));
      }
    }
    INFO(name);
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("seed linearity: partials transform by the seed basis") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd B(2, 2);
  B << 0.3, -1.2, 0.8, 0.4;
  for (int trial = 0; trial < 25; ++trial) {
    const double x = unif(rng), y = unif(rng);
    auto eval = [&](const Jet& jx, const Jet& jy) { return exp(jx * jy) + sin(jx - 2.0 * jy); };
    // identity seeds
    const Jet g_id = eval(Jet::seeded(x, 2, 0), Jet::seeded(y, 2, 1));
    // seeds carrying the columns of B
    Jet jx(x, 2), jy(y, 2);
    for (int k = 0; k < 2; ++k) {
      jx.partial_ref(k) = B(0, k);
      jy.partial_ref(k) = B(1, k);
    }
    const Jet g_b = eval(jx, jy);
    for (int k = 0; k < 2; ++k) {
      const double expected = g_id.partial(0) * B(0, k) + g_id.partial(1) * B(1, k);
      CHECK(std::abs(g_b.partial(k) - expected) < 1e-12 * (1.0 + std::abs(expected)));
    }
  }
}

TEST_CASE("nested jets produce second derivatives") {
  // d^2/dx^2 exp(2x) = 4 exp(2x)
  const double x0 = 0.3;
  Jet2 x = Jet2::seeded(Jet::seeded(x0, 1, 0), 1, 0);
  const Jet2 f = exp(2.0 * x);
  CHECK(f.value().value() == doctest::Approx(std::exp(2 * x0)));
  CHECK(f.value().partial(0) == doctest::Approx(2 * std::exp(2 * x0)));
  CHECK(f.partial(0).partial(0) == doctest::Approx(4 * std::exp(2 * x0)));
}
