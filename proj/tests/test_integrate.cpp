#include <doctest.h>

#include <cmath>
#include <random>

#include "hambvp/integrate.hpp"
#include "hambvp/systems.hpp"

using namespace hambvp;

namespace {

/// Harmonic oscillator H = (p^2 + q^2)/2 for hand-checkable updates.
class HarmonicSystem final : public SystemCRTP<HarmonicSystem> {
 public:
  HarmonicSystem() : SystemCRTP(1, "harmonic", 0, Eigen::VectorXd(0), true) {}
  template <class S>
  S ham(const std::vector<S>& q, const std::vector<S>& p, const std::vector<S>&) const {
    return 0.5 * (p[0] * p[0] + q[0] * q[0]);
  }
  Jet kinetic(const JetVec& p, const JetVec&) const override { return 0.5 * p[0] * p[0]; }
  Jet potential(const JetVec& q, const JetVec&) const override { return 0.5 * q[0] * q[0]; }
  JetVec grad_T(const JetVec& p, const JetVec&) const override { return {p[0]}; }
  JetVec grad_V(const JetVec& q, const JetVec&) const override { return {q[0]}; }
};

Eigen::VectorXd state2(double q, double p) {
  Eigen::VectorXd z(2);
  z << q, p;
  return z;
}

}  // namespace

TEST_CASE("free particle: sv and rk2 are exact") {
  auto sys = std::get<SystemPtr>(catalog_build("bratu", {{"C", 0.0}}));
  const Eigen::VectorXd mu = sys->default_mu();
  for (Method m : {Method::sv, Method::sv_implicit, Method::rk2, Method::ref_rk4}) {
    FlowSpec spec{m, 7, 1.3, false, false};
    const FlowResult res = flow(*sys, state2(0.4, -0.8), mu, spec);
    CHECK(res.z_final[0] == doctest::Approx(0.4 - 0.8 * 1.3).epsilon(1e-14));
    CHECK(res.z_final[1] == doctest::Approx(-0.8).epsilon(1e-14));
  }
}

TEST_CASE("Stoermer-Verlet hand-checked step on the harmonic oscillator") {
  HarmonicSystem sys;
  JetVec q = {Jet(1.0)}, p = {Jet(0.0)};
  step_sv_separable(sys, q, p, {}, 0.1);
  CHECK(q[0].value() == doctest::Approx(0.995).epsilon(1e-15));
  CHECK(p[0].value() == doctest::Approx(-0.09975).epsilon(1e-15));
}

TEST_CASE("sv requires a separable Hamiltonian") {
  auto torus = build_torus_system(0.1, 0.1, 0.0);
  JetVec q = {Jet(0.1), Jet(0.2)}, p = {Jet(0.3), Jet(0.4)};
  JetVec mu = {Jet(0.0)};
  CHECK_THROWS_AS(step_sv_separable(*torus, q, p, mu, 0.1), std::invalid_argument);
}

TEST_CASE("long-run energy error of sv is bounded without drift") {
  HarmonicSystem sys;
  const double h = 0.01;
  JetVec q = {Jet(1.0)}, p = {Jet(0.0)};
  double max_err = 0.0;
  for (int k = 0; k < 10000; ++k) {
    step_sv_separable(sys, q, p, {}, h);
    const double e = 0.5 * (q[0].value() * q[0].value() + p[0].value() * p[0].value());
    max_err = std::max(max_err, std::abs(e - 0.5));
  }
  CHECK(max_err < 1e-3);
}

TEST_CASE("rk2 energy error grows with the step count (non-symplectic drift)") {
  HarmonicSystem sys;
  const double h = 0.05;
  JetVec q = {Jet(1.0)}, p = {Jet(0.0)};
  double prev_err = 0.0;
  bool monotone = true;
  for (int k = 1; k <= 1000; ++k) {
    step_rk2(sys, q, p, {}, h);
    const double e = 0.5 * (q[0].value() * q[0].value() + p[0].value() * p[0].value());
    const double err = std::abs(e - 0.5);
    if (k % 100 == 0) {
      if (err <= prev_err) monotone = false;
      prev_err = err;
    }
  }
  CHECK(prev_err > 1e-6);
  CHECK(monotone);
}

TEST_CASE("implicit sv agrees with the explicit scheme on separable systems") {
  auto sys = std::get<SystemPtr>(catalog_build("henon_heiles"));
  const Eigen::VectorXd z0 = [] {
    Eigen::VectorXd z(4);
    z << 0.1, -0.2, 0.3, 0.15;
    return z;
  }();
  FlowSpec a{Method::sv, 20, 1.0, false, false};
  FlowSpec b{Method::sv_implicit, 20, 1.0, false, false};
  const Eigen::VectorXd za = flow(*sys, z0, {}, a).z_final;
  const Eigen::VectorXd zb = flow(*sys, z0, {}, b).z_final;
  CHECK((za - zb).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("torus step is symplectic and second order") {
  auto sys = build_torus_system(0.1, 0.1, 0.0);
  Eigen::VectorXd z0(4);
  z0 << M_PI / 2, 0.2, 0.85, 1.5;
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(1);

  // one-step symplecticity via the jet Jacobian
  FlowSpec one{Method::sv_implicit, 1, 0.01, true, false};
  const FlowResult step = flow(*sys, z0, mu, one);
  CHECK(symplecticity_residual(*step.jac) < 1e-10);

  // global order 2: error vs ref_rk4 shrinks ~4x when N doubles
  const double tau = 0.8;
  FlowSpec ref{Method::ref_rk4, 4000, tau, false, false};
  const Eigen::VectorXd z_ref = flow(*sys, z0, mu, ref).z_final;
  double err[2];
  int idx = 0;
  for (int N : {40, 80}) {
    FlowSpec spec{Method::sv_implicit, N, tau, false, false};
    err[idx++] = (flow(*sys, z0, mu, spec).z_final - z_ref).norm();
  }
  const double ratio = err[0] / err[1];
  CHECK(ratio > 4.0 / 1.5);
  CHECK(ratio < 4.0 * 1.5);
}

TEST_CASE("flow composes steps and propagates jets") {
  auto sys = std::get<SystemPtr>(catalog_build("bratu", {{"C", 1.0}}));
  const Eigen::VectorXd mu = sys->default_mu();
  // N = 1 equals the single step
  FlowSpec spec1{Method::sv, 1, 0.3, false, false};
  JetVec q = {Jet(0.0)}, p = {Jet(1.0)};
  step_sv_separable(*sys, q, p, lift_const(mu), 0.3);
  const FlowResult res1 = flow(*sys, state2(0.0, 1.0), mu, spec1);
  CHECK(res1.z_final[0] == q[0].value());
  CHECK(res1.z_final[1] == p[0].value());

  // sv N=20 lands within O(h^2) of the rk4 reference
  FlowSpec sv20{Method::sv, 20, 1.0, false, false};
  FlowSpec ref{Method::ref_rk4, 2000, 1.0, false, false};
  const double err = (flow(*sys, state2(0.0, 1.0), mu, sv20).z_final - flow(*sys, state2(0.0, 1.0), mu, ref).z_final)
                         .norm();
  CHECK(err < 10.0 * (1.0 / 20.0) * (1.0 / 20.0));
  CHECK(err > 0.0);

  // flow Jacobian vs finite differences
  FlowSpec svj{Method::sv, 20, 1.0, true, false};
  const FlowResult res = flow(*sys, state2(0.0, 1.0), mu, svj);
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd zp = state2(0.0, 1.0), zm = zp;
    zp[k] += 1e-6;
    zm[k] -= 1e-6;
    const Eigen::VectorXd col =
        (flow(*sys, zp, mu, sv20).z_final - flow(*sys, zm, mu, sv20).z_final) / 2e-6;
    CHECK(((*res.jac).col(k) - col).lpNorm<Eigen::Infinity>() < 1e-5 * (1.0 + col.norm()));
  }
}

TEST_CASE("symplecticity across the catalog; rk2 residual is detectable") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> unif(-0.4, 0.4);
  for (const std::string& name : catalog_system_names()) {
    CatalogEntry entry = catalog_build(name, {{"C", 1.0}});
    const auto* sysp = std::get_if<SystemPtr>(&entry);
    if (!sysp) continue;
    const auto& sys = **sysp;
    const int N = 10;
    FlowSpec spec{sys.separable() ? Method::sv : Method::sv_implicit, N, 1.0, true, false};
    if (name == "torus_integrable") spec.tau = 2.0 * M_PI / 3.0;
    for (int t = 0; t < 10; ++t) {
      Eigen::VectorXd z(2 * sys.dim_n());
      for (int i = 0; i < z.size(); ++i) z[i] = unif(rng);
      if (name == "torus_integrable") z[0] += M_PI / 2;
      const FlowResult res = flow(sys, z, sys.default_mu(), spec);
      INFO(name);
      CHECK(symplecticity_residual(*res.jac) <= N * 1e-9);
    }
  }

  // rk2 on the planar pitchfork problem: non-symplecticity is detectable
  auto pf = std::get<SystemPtr>(catalog_build("planar_pitchfork"));
  FlowSpec rk{Method::rk2, 14, 1.7, true, false};
  const FlowResult res = flow(*pf, state2(0.2, 0.5), pf->default_mu(), rk);
  CHECK(symplecticity_residual(*res.jac) > 1e-6);
}

TEST_CASE("rk2 one-step symplecticity defect scales like h^3") {
  auto pf = std::get<SystemPtr>(catalog_build("planar_pitchfork"));
  const Eigen::VectorXd mu = pf->default_mu();
  double defect[2];
  int idx = 0;
  for (double h : {0.1, 0.05}) {
    FlowSpec spec{Method::rk2, 1, h, true, false};
    defect[idx++] = symplecticity_residual(*flow(*pf, state2(0.2, 0.5), mu, spec).jac);
  }
  CHECK(defect[0] > 0.0);
  const double ratio = defect[0] / defect[1];
  CHECK(ratio > 8.0 / 2.0);
  CHECK(ratio < 8.0 * 2.0);
}

TEST_CASE("sv preserves the linear invariant p2 of the cyclic system") {
  auto sys = std::get<SystemPtr>(catalog_build("cyclic_4d"));
  Eigen::VectorXd z0(4);
  z0 << 0.2, 0.1, 0.3, -0.45;
  FlowSpec spec{Method::sv, 50, 5.0, false, false};
  const FlowResult res = flow(*sys, z0, sys->default_mu(), spec);
  CHECK(std::abs(res.z_final[3] - z0[3]) < 1e-12);
}

TEST_CASE("sv is time reversible: stepping h then -h returns the state") {
  auto sys = std::get<SystemPtr>(catalog_build("henon_heiles"));
  Eigen::VectorXd z0(4);
  z0 << 0.12, -0.08, 0.2, 0.31;
  JetVec q = lift_const(z0.head(2)), p = lift_const(z0.tail(2));
  step_sv_separable(*sys, q, p, {}, 0.05);
  step_sv_separable(*sys, q, p, {}, -0.05);
  CHECK((values_of(q) - z0.head(2)).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((values_of(p) - z0.tail(2)).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("flow validates its specification") {
  auto sys = std::get<SystemPtr>(catalog_build("bratu", {{"C", 1.0}}));
  FlowSpec bad{Method::sv, 0, 1.0, false, false};
  CHECK_THROWS_AS(flow(*sys, state2(0, 1), sys->default_mu(), bad), std::invalid_argument);
  FlowSpec bad2{Method::sv, 5, -1.0, false, false};
  CHECK_THROWS_AS(flow(*sys, state2(0, 1), sys->default_mu(), bad2), std::invalid_argument);
}
