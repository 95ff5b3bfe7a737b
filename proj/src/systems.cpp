#include "hambvp/systems.hpp"

#include <cmath>

namespace hambvp {

// ---------------------------------------------------------------------------
// HamiltonianSystem defaults
// ---------------------------------------------------------------------------

Jet HamiltonianSystem::kinetic(const JetVec&, const JetVec&) const {
  throw std::logic_error(label_ + ": no separable split");
}
Jet HamiltonianSystem::potential(const JetVec&, const JetVec&) const {
  throw std::logic_error(label_ + ": no separable split");
}
JetVec HamiltonianSystem::grad_T(const JetVec&, const JetVec&) const {
  throw std::logic_error(label_ + ": no separable split");
}
JetVec HamiltonianSystem::grad_V(const JetVec&, const JetVec&) const {
  throw std::logic_error(label_ + ": no separable split");
}

JetVec HamiltonianSystem::nested_grad(const JetVec& q, const JetVec& p, const JetVec& mu, bool wrt_q) const {
  const int n = n_;
  Jet2Vec q2, p2, mu2;
  q2.reserve(n);
  p2.reserve(n);
  mu2.reserve(mu.size());
  for (int i = 0; i < n; ++i) {
    if (wrt_q)
      q2.push_back(Jet2::seeded(q[i], n, i));
    else
      q2.emplace_back(q[i]);
  }
  for (int i = 0; i < n; ++i) {
    if (wrt_q)
      p2.emplace_back(p[i]);
    else
      p2.push_back(Jet2::seeded(p[i], n, i));
  }
  for (const Jet& m : mu) mu2.emplace_back(m);
  const Jet2 e = energy_nested(q2, p2, mu2);
  JetVec g;
  g.reserve(n);
  for (int i = 0; i < n; ++i) g.push_back(e.seed_dim() == 0 ? Jet(0.0) : e.partial(i));
  return g;
}

JetVec HamiltonianSystem::grad_q(const JetVec& q, const JetVec& p, const JetVec& mu) const {
  if (separable_) return grad_V(q, mu);
  return nested_grad(q, p, mu, true);
}

JetVec HamiltonianSystem::grad_p(const JetVec& q, const JetVec& p, const JetVec& mu) const {
  if (separable_) return grad_T(p, mu);
  return nested_grad(q, p, mu, false);
}

double HamiltonianSystem::energy_value(const Eigen::VectorXd& z, const Eigen::VectorXd& mu) const {
  JetVec q, p;
  for (int i = 0; i < n_; ++i) q.emplace_back(z[i]);
  for (int i = 0; i < n_; ++i) p.emplace_back(z[n_ + i]);
  return energy(q, p, lift_const(mu)).value();
}

// ---------------------------------------------------------------------------
// SeparatedBVP
// ---------------------------------------------------------------------------

namespace {

int entry_n(const CatalogEntry& src) {
  if (const auto* sys = std::get_if<SystemPtr>(&src)) return (*sys)->dim_n();
  return std::get<MapPtr>(src)->dim_n();
}

/// Assemble chart and selector from per-coordinate section coefficients
/// (a0, b0, c0) at the start and (a1, b1, c1) at the end.
SeparatedBVP sectioned(CatalogEntry src, const Eigen::MatrixXd& start_coeffs, const Eigen::MatrixXd& end_coeffs,
                       double tau, std::string kind) {
  SeparatedBVP bvp;
  bvp.n = entry_n(src);
  bvp.flow_source = std::move(src);
  bvp.tau = tau;
  bvp.boundary_kind = std::move(kind);
  const int n = bvp.n;
  bvp.start_base = Eigen::VectorXd::Zero(2 * n);
  bvp.start_chart = Eigen::MatrixXd::Zero(2 * n, n);
  bvp.end_selector = Eigen::MatrixXd::Zero(n, 2 * n);
  bvp.end_target = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const double a0 = start_coeffs(j, 0), b0 = start_coeffs(j, 1), c0 = start_coeffs(j, 2);
    const double nrm2 = a0 * a0 + b0 * b0;
    if (nrm2 == 0.0) throw std::invalid_argument("degenerate start section");
    const double nrm = std::sqrt(nrm2);
    bvp.start_base[j] = c0 * a0 / nrm2;
    bvp.start_base[n + j] = c0 * b0 / nrm2;
    // Chart direction along the section; oriented so that pure Dirichlet has
    // y = initial momentum and pure Neumann has y = initial position.
    if (std::abs(a0) >= std::abs(b0)) {
      bvp.start_chart(j, j) = -b0 / nrm;
      bvp.start_chart(n + j, j) = a0 / nrm;
    } else {
      bvp.start_chart(j, j) = b0 / nrm;
      bvp.start_chart(n + j, j) = -a0 / nrm;
    }
    bvp.end_selector(j, j) = end_coeffs(j, 0);
    bvp.end_selector(j, n + j) = end_coeffs(j, 1);
    bvp.end_target[j] = end_coeffs(j, 2);
  }
  return bvp;
}

}  // namespace

int SeparatedBVP::mu_dim() const {
  if (const auto* sys = system()) return (*sys)->mu_dim();
  return (*map())->mu_dim();
}

Eigen::VectorXd SeparatedBVP::default_mu() const {
  if (const auto* sys = system()) return (*sys)->default_mu();
  return (*map())->default_mu();
}

SeparatedBVP SeparatedBVP::dirichlet(CatalogEntry src, const Eigen::VectorXd& x_star, const Eigen::VectorXd& X_star,
                                     double tau) {
  const int n = entry_n(src);
  Eigen::MatrixXd s(n, 3), e(n, 3);
  for (int j = 0; j < n; ++j) {
    s.row(j) << 1.0, 0.0, x_star[j];
    e.row(j) << 1.0, 0.0, X_star[j];
  }
  return sectioned(std::move(src), s, e, tau, "dirichlet");
}

SeparatedBVP SeparatedBVP::neumann(CatalogEntry src, const Eigen::VectorXd& y_star, const Eigen::VectorXd& Y_star,
                                   double tau) {
  const int n = entry_n(src);
  Eigen::MatrixXd s(n, 3), e(n, 3);
  for (int j = 0; j < n; ++j) {
    s.row(j) << 0.0, 1.0, y_star[j];
    e.row(j) << 0.0, 1.0, Y_star[j];
  }
  return sectioned(std::move(src), s, e, tau, "neumann");
}

SeparatedBVP SeparatedBVP::robin(CatalogEntry src, const Eigen::VectorXd& alpha0, const Eigen::VectorXd& beta0,
                                 const Eigen::VectorXd& alpha1, const Eigen::VectorXd& beta1, double tau) {
  const int n = entry_n(src);
  Eigen::MatrixXd s(n, 3), e(n, 3);
  for (int j = 0; j < n; ++j) {
    s.row(j) << 1.0, alpha0[j], beta0[j];
    e.row(j) << 1.0, alpha1[j], beta1[j];
  }
  return sectioned(std::move(src), s, e, tau, "robin");
}

// ---------------------------------------------------------------------------
// TorusIntegrableSystem
// ---------------------------------------------------------------------------

Eigen::VectorXd TorusIntegrableSystem::lift_to_bar(const Eigen::VectorXd& z) const {
  Eigen::VectorXd out(4);
  out[0] = z[0] + eps_ * std::cos(z[1]);
  out[1] = z[1] + kappa_ * std::cos(z[0]);
  Eigen::Matrix2d dh_t;
  dh_t << 1.0, -kappa_ * std::sin(z[0]), -eps_ * std::sin(z[1]), 1.0;
  out.tail(2) = dh_t.partialPivLu().solve(z.tail(2).eval());
  return out;
}

// ---------------------------------------------------------------------------
// LinearTransformedSystem
// ---------------------------------------------------------------------------

LinearTransformedSystem::LinearTransformedSystem(SystemPtr inner, const Eigen::MatrixXd& A)
    : HamiltonianSystem(inner->dim_n(), inner->label() + "_lin", inner->mu_dim(), inner->default_mu(),
                        inner->separable()),
      inner_(std::move(inner)),
      A_(A) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw std::invalid_argument("apply_linear_transform: singular matrix");
  A_inv_ = lu.inverse();
  A_T_ = A.transpose();
}

template <class S>
std::vector<S> LinearTransformedSystem::mat_apply(const Eigen::MatrixXd& M, const std::vector<S>& v) const {
  std::vector<S> out(M.rows(), S(0.0));
  for (int i = 0; i < M.rows(); ++i) {
    S acc(0.0);
    for (int j = 0; j < M.cols(); ++j) acc += M(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

Jet LinearTransformedSystem::energy(const JetVec& q, const JetVec& p, const JetVec& mu) const {
  return inner_->energy(mat_apply(A_inv_, q), mat_apply(A_T_, p), mu);
}
Jet2 LinearTransformedSystem::energy_nested(const Jet2Vec& q, const Jet2Vec& p, const Jet2Vec& mu) const {
  return inner_->energy_nested(mat_apply(A_inv_, q), mat_apply(A_T_, p), mu);
}
Jet LinearTransformedSystem::kinetic(const JetVec& p, const JetVec& mu) const {
  return inner_->kinetic(mat_apply(A_T_, p), mu);
}
Jet LinearTransformedSystem::potential(const JetVec& q, const JetVec& mu) const {
  return inner_->potential(mat_apply(A_inv_, q), mu);
}
JetVec LinearTransformedSystem::grad_T(const JetVec& p, const JetVec& mu) const {
  return mat_apply(A_, inner_->grad_T(mat_apply(A_T_, p), mu));
}
JetVec LinearTransformedSystem::grad_V(const JetVec& q, const JetVec& mu) const {
  return mat_apply(A_inv_.transpose(), inner_->grad_V(mat_apply(A_inv_, q), mu));
}
JetVec LinearTransformedSystem::grad_q(const JetVec& q, const JetVec& p, const JetVec& mu) const {
  return mat_apply(A_inv_.transpose(), inner_->grad_q(mat_apply(A_inv_, q), mat_apply(A_T_, p), mu));
}
JetVec LinearTransformedSystem::grad_p(const JetVec& q, const JetVec& p, const JetVec& mu) const {
  return mat_apply(A_, inner_->grad_p(mat_apply(A_inv_, q), mat_apply(A_T_, p), mu));
}

std::pair<SystemPtr, SeparatedBVP> apply_linear_transform(const SystemPtr& system, const SeparatedBVP& bvp,
                                                          const Eigen::MatrixXd& A) {
  if (bvp.boundary_kind != "dirichlet")
    throw std::invalid_argument("apply_linear_transform: only Dirichlet boundary data supported");
  auto transformed = std::make_shared<LinearTransformedSystem>(system, A);
  const int n = bvp.n;
  const Eigen::VectorXd x_star = A * bvp.start_base.head(n);
  Eigen::VectorXd X_star(n);
  // Dirichlet end sections store X* on the diagonal scale 1.
  for (int j = 0; j < n; ++j) X_star[j] = bvp.end_target[j];
  X_star = A * X_star;
  SeparatedBVP out = SeparatedBVP::dirichlet(SystemPtr(transformed), x_star, X_star, bvp.tau);
  return {transformed, out};
}

// ---------------------------------------------------------------------------
// Hypersurfaces
// ---------------------------------------------------------------------------

Eigen::VectorXd Hypersurface::project(const Eigen::VectorXd& q, double tol, int max_iter) const {
  Eigen::VectorXd x = q;
  for (int it = 0; it < max_iter; ++it) {
    const double fx = f_value(x);
    if (std::abs(fx) <= tol) return x;
    const Eigen::VectorXd g = grad_value(x);
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) throw std::runtime_error(label() + ": zero gradient during projection");
    x -= (fx / g2) * g;
  }
  throw std::runtime_error(label() + ": projection onto surface did not converge");
}

namespace {

class PlaneSurface final : public Hypersurface {
 public:
  explicit PlaneSurface(double c) : Hypersurface(3, "plane", false), c_(c) {}
  Jet f(const JetVec& q) const override { return q[2] - c_; }
  JetVec grad(const JetVec&) const override { return {Jet(0.0), Jet(0.0), Jet(1.0)}; }
  Eigen::MatrixXd hess(const Eigen::VectorXd&) const override { return Eigen::MatrixXd::Zero(3, 3); }
  Eigen::VectorXd reference_point() const override {
    Eigen::VectorXd q(3);
    q << 0.0, 0.0, c_;
    return q;
  }

 private:
  double c_;
};

class SphereSurface final : public Hypersurface {
 public:
  SphereSurface() : Hypersurface(3, "sphere", false) {}
  Jet f(const JetVec& q) const override { return q[0] * q[0] + q[1] * q[1] + q[2] * q[2] - 1.0; }
  JetVec grad(const JetVec& q) const override { return {2.0 * q[0], 2.0 * q[1], 2.0 * q[2]}; }
  Eigen::MatrixXd hess(const Eigen::VectorXd&) const override { return 2.0 * Eigen::MatrixXd::Identity(3, 3); }
  Eigen::VectorXd reference_point() const override {
    Eigen::VectorXd q(3);
    q << 1.0, 0.0, 0.0;
    return q;
  }
};

/// 0.98 q1^2 + 0.97 q2^2 + 1.02 q3^2 - 1/pi^2 (+ cubic perturbation).
class EllipsoidSurface final : public Hypersurface {
 public:
  explicit EllipsoidSurface(bool perturbed)
      : Hypersurface(3, perturbed ? "ellipsoid_perturbed" : "ellipsoid", false), perturbed_(perturbed) {}

  Jet f(const JetVec& q) const override {
    Jet v = 0.98 * q[0] * q[0] + 0.97 * q[1] * q[1] + 1.02 * q[2] * q[2] - 1.0 / (M_PI * M_PI);
    if (perturbed_) v += 0.1 * (-q[0] * q[0] * q[0] - 1.2 * q[1] * q[1] * q[1] + 0.7 * q[2] * q[2] * q[2]);
    return v;
  }
  JetVec grad(const JetVec& q) const override {
    JetVec g = {1.96 * q[0], 1.94 * q[1], 2.04 * q[2]};
    if (perturbed_) {
      g[0] -= 0.3 * q[0] * q[0];
      g[1] -= 0.36 * q[1] * q[1];
      g[2] += 0.21 * q[2] * q[2];
    }
    return g;
  }
  Eigen::MatrixXd hess(const Eigen::VectorXd& q) const override {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
    h(0, 0) = 1.96;
    h(1, 1) = 1.94;
    h(2, 2) = 2.04;
    if (perturbed_) {
      h(0, 0) -= 0.6 * q[0];
      h(1, 1) -= 0.72 * q[1];
      h(2, 2) += 0.42 * q[2];
    }
    return h;
  }
  Eigen::VectorXd reference_point() const override {
    Eigen::VectorXd q(3);
    if (perturbed_)
      q << -0.316472, 0.0, 0.0;
    else
      q << -1.0 / (M_PI * std::sqrt(0.98)), 0.0, 0.0;
    return q;
  }

 private:
  bool perturbed_;
};

/// Graph of h(q1,q2) = exp(-q1^2 - 0.9 q2^2) + 0.01 q1^3 + 0.011 q2^3.
class GaussianGraphSurface final : public Hypersurface {
 public:
  GaussianGraphSurface() : Hypersurface(3, "gaussian_graph_perturbed", true) {}

  Jet f(const JetVec& q) const override {
    return exp(-(q[0] * q[0]) - 0.9 * q[1] * q[1]) + 0.01 * q[0] * q[0] * q[0] + 0.011 * q[1] * q[1] * q[1] - q[2];
  }
  JetVec grad(const JetVec& q) const override {
    const Jet e = exp(-(q[0] * q[0]) - 0.9 * q[1] * q[1]);
    return {-2.0 * q[0] * e + 0.03 * q[0] * q[0], -1.8 * q[1] * e + 0.033 * q[1] * q[1], Jet(-1.0)};
  }
  Eigen::MatrixXd hess(const Eigen::VectorXd& q) const override {
    const double e = std::exp(-q[0] * q[0] - 0.9 * q[1] * q[1]);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
    h(0, 0) = (4.0 * q[0] * q[0] - 2.0) * e + 0.06 * q[0];
    h(0, 1) = h(1, 0) = 3.6 * q[0] * q[1] * e;
    h(1, 1) = (3.24 * q[1] * q[1] - 1.8) * e + 0.066 * q[1];
    return h;
  }
  Eigen::VectorXd reference_point() const override {
    Eigen::VectorXd q(3);
    q << -1.0, 0.0, std::exp(-1.0) - 0.01;
    return q;
  }
};

/// 0.98 q1^2 + 0.95 q2^2 + 1.05 q3^2 + 1.03 q4^2 - 1/pi^2
/// + 0.5 (q1^3 + 1.1 q2^3 + 0.9 q3^3 + 1.05 q4^3).
class Ellipsoid3Surface final : public Hypersurface {
 public:
  Ellipsoid3Surface() : Hypersurface(4, "ellipsoid3_perturbed", false) {}

  Jet f(const JetVec& q) const override {
    Jet v = 0.98 * q[0] * q[0] + 0.95 * q[1] * q[1] + 1.05 * q[2] * q[2] + 1.03 * q[3] * q[3] - 1.0 / (M_PI * M_PI);
    v += 0.5 * (q[0] * q[0] * q[0] + 1.1 * q[1] * q[1] * q[1] + 0.9 * q[2] * q[2] * q[2] +
                1.05 * q[3] * q[3] * q[3]);
    return v;
  }
  JetVec grad(const JetVec& q) const override {
    return {1.96 * q[0] + 1.5 * q[0] * q[0], 1.90 * q[1] + 1.65 * q[1] * q[1], 2.10 * q[2] + 1.35 * q[2] * q[2],
            2.06 * q[3] + 1.575 * q[3] * q[3]};
  }
  Eigen::MatrixXd hess(const Eigen::VectorXd& q) const override {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(4, 4);
    h(0, 0) = 1.96 + 3.0 * q[0];
    h(1, 1) = 1.90 + 3.3 * q[1];
    h(2, 2) = 2.10 + 2.7 * q[2];
    h(3, 3) = 2.06 + 3.15 * q[3];
    return h;
  }
  Eigen::VectorXd reference_point() const override {
    Eigen::VectorXd q(4);
    q << -0.355367, 0.0, 0.0, 0.0;
    return q;
  }
};

double get_param(const Params& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

double require_param(const Params& params, const std::string& key, const std::string& who) {
  auto it = params.find(key);
  if (it == params.end()) throw std::invalid_argument(who + ": missing required parameter '" + key + "'");
  return it->second;
}

Eigen::Matrix2d section44_matrix() {
  Eigen::Matrix2d a;
  a << -1.0, 2.0, 3.0, 1.0;
  return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

CatalogEntry catalog_build(const std::string& name, const Params& params) {
  if (name == "bratu") return SystemPtr(std::make_shared<BratuSystem>(require_param(params, "C", "bratu")));
  if (name == "planar_pitchfork")
    return SystemPtr(std::make_shared<PlanarPitchforkSystem>(get_param(params, "mu", 0.0)));
  if (name == "henon_heiles") return SystemPtr(std::make_shared<HenonHeilesSystem>(false));
  if (name == "henon_heiles_perturbed") return SystemPtr(std::make_shared<HenonHeilesSystem>(true));
  if (name == "cyclic_4d") return SystemPtr(std::make_shared<Cyclic4dSystem>(get_param(params, "mu", 0.0), false));
  if (name == "cyclic_4d_symbroken")
    return SystemPtr(std::make_shared<Cyclic4dSystem>(get_param(params, "mu", 0.0), true));
  if (name == "example5_fold") return MapPtr(std::make_shared<Example5FoldMap>(get_param(params, "mu", 0.0)));
  if (name == "torus_integrable")
    return SystemPtr(build_torus_system(get_param(params, "eps", 0.1), get_param(params, "kappa", 0.1),
                                        get_param(params, "mu", 0.0)));
  if (name == "linear_transformed") {
    auto base = std::get<SystemPtr>(catalog_build("cyclic_4d", params));
    auto bvp = catalog_bvp("cyclic_4d", params);
    return SystemPtr(apply_linear_transform(base, bvp, section44_matrix()).first);
  }
  throw std::invalid_argument("catalog_build: unknown system '" + name + "'");
}

SystemPtr build_torus_system(double eps, double kappa, double mu) {
  return std::make_shared<TorusIntegrableSystem>(eps, kappa, mu);
}

SeparatedBVP catalog_bvp(const std::string& name, const Params& params) {
  auto vec1 = [](double a) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(1, a); };
  auto vec2 = [](double a, double b) -> Eigen::VectorXd {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
  };
  CatalogEntry entry = catalog_build(name, params);
  if (name == "bratu") return SeparatedBVP::dirichlet(entry, vec1(0.0), vec1(0.0), 1.0);
  if (name == "planar_pitchfork") return SeparatedBVP::dirichlet(entry, vec1(0.2), vec1(0.2), 1.7);
  if (name == "henon_heiles" || name == "henon_heiles_perturbed") {
    const double x2 = get_param(params, "x2", 0.0);
    return SeparatedBVP::dirichlet(entry, vec2(0.0, x2), vec2(get_param(params, "X1", 0.0), get_param(params, "X2", 0.0)),
                                   1.0);
  }
  if (name == "cyclic_4d" || name == "cyclic_4d_symbroken")
    return SeparatedBVP::dirichlet(entry, vec2(0.2, 0.1), vec2(0.2, 0.1), 5.0);
  if (name == "example5_fold") return SeparatedBVP::dirichlet(entry, vec1(0.0), vec1(0.0), 1.0);
  if (name == "torus_integrable") {
    const double kappa = get_param(params, "kappa", 0.1);
    const Eigen::VectorXd p_star = vec2(1.0 - 1.5 * kappa, 1.5);
    return SeparatedBVP::neumann(entry, p_star, p_star, 2.0 * M_PI / 3.0);
  }
  if (name == "linear_transformed") {
    auto base = std::get<SystemPtr>(catalog_build("cyclic_4d", params));
    auto bvp = catalog_bvp("cyclic_4d", params);
    return apply_linear_transform(base, bvp, section44_matrix()).second;
  }
  throw std::invalid_argument("catalog_bvp: unknown system '" + name + "'");
}

SurfacePtr hypersurface_catalog(const std::string& name, const Params& params) {
  if (name == "plane") return std::make_shared<PlaneSurface>(get_param(params, "c", 0.0));
  if (name == "sphere") return std::make_shared<SphereSurface>();
  if (name == "ellipsoid") return std::make_shared<EllipsoidSurface>(false);
  if (name == "ellipsoid_perturbed") return std::make_shared<EllipsoidSurface>(true);
  if (name == "gaussian_graph_perturbed") return std::make_shared<GaussianGraphSurface>();
  if (name == "ellipsoid3_perturbed") return std::make_shared<Ellipsoid3Surface>();
  throw std::invalid_argument("hypersurface_catalog: unknown surface '" + name + "'");
}

std::vector<std::string> catalog_system_names() {
  return {"bratu",      "planar_pitchfork",    "henon_heiles", "henon_heiles_perturbed",
          "cyclic_4d",  "cyclic_4d_symbroken", "example5_fold", "torus_integrable",
          "linear_transformed"};
}

std::vector<std::string> catalog_surface_names() {
  return {"plane", "sphere", "ellipsoid", "ellipsoid_perturbed", "gaussian_graph_perturbed", "ellipsoid3_perturbed"};
}

}  // namespace hambvp
