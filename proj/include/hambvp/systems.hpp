#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hambvp/jet.hpp"

namespace hambvp {

/// Hamiltonian system on R^{2n} with jet-evaluable energy H(q, p; mu).
/// Gradients are jet-evaluable as well so that derivative information
/// carried by the arguments propagates through the vector field.
class HamiltonianSystem {
 public:
  HamiltonianSystem(int n, std::string label, int mu_dim, Eigen::VectorXd default_mu, bool separable)
      : n_(n), label_(std::move(label)), mu_dim_(mu_dim), default_mu_(std::move(default_mu)), separable_(separable) {}
  virtual ~HamiltonianSystem() = default;

  int dim_n() const { return n_; }
  const std::string& label() const { return label_; }
  int mu_dim() const { return mu_dim_; }
  const Eigen::VectorXd& default_mu() const { return default_mu_; }
  bool separable() const { return separable_; }

  virtual Jet energy(const JetVec& q, const JetVec& p, const JetVec& mu) const = 0;
  virtual Jet2 energy_nested(const Jet2Vec& q, const Jet2Vec& p, const Jet2Vec& mu) const = 0;

  /// Separable split H = T(p; mu) + V(q; mu); throws for non-separable systems.
  virtual Jet kinetic(const JetVec& p, const JetVec& mu) const;
  virtual Jet potential(const JetVec& q, const JetVec& mu) const;
  virtual JetVec grad_T(const JetVec& p, const JetVec& mu) const;
  virtual JetVec grad_V(const JetVec& q, const JetVec& mu) const;

  /// dH/dq and dH/dp. Defaults: separable split when available, otherwise
  /// nested-jet differentiation of the energy.
  virtual JetVec grad_q(const JetVec& q, const JetVec& p, const JetVec& mu) const;
  virtual JetVec grad_p(const JetVec& q, const JetVec& p, const JetVec& mu) const;

  double energy_value(const Eigen::VectorXd& z, const Eigen::VectorXd& mu) const;

 protected:
  JetVec nested_grad(const JetVec& q, const JetVec& p, const JetVec& mu, bool wrt_q) const;

 private:
  int n_;
  std::string label_;
  int mu_dim_;
  Eigen::VectorXd default_mu_;
  bool separable_;
};

template <class Derived>
class SystemCRTP : public HamiltonianSystem {
 public:
  using HamiltonianSystem::HamiltonianSystem;
  Jet energy(const JetVec& q, const JetVec& p, const JetVec& mu) const final {
    return static_cast<const Derived*>(this)->template ham<Jet>(q, p, mu);
  }
  Jet2 energy_nested(const Jet2Vec& q, const Jet2Vec& p, const Jet2Vec& mu) const final {
    return static_cast<const Derived*>(this)->template ham<Jet2>(q, p, mu);
  }
};

/// Symplectic map given in closed form (no integration involved).
class ExplicitSymplecticMap {
 public:
  ExplicitSymplecticMap(int n, std::string label, int mu_dim, Eigen::VectorXd default_mu)
      : n_(n), label_(std::move(label)), mu_dim_(mu_dim), default_mu_(std::move(default_mu)) {}
  virtual ~ExplicitSymplecticMap() = default;

  int dim_n() const { return n_; }
  const std::string& label() const { return label_; }
  int mu_dim() const { return mu_dim_; }
  const Eigen::VectorXd& default_mu() const { return default_mu_; }

  /// z = (x, y) -> (X, Y), jet-evaluable.
  virtual JetVec apply(const JetVec& z, const JetVec& mu) const = 0;

 private:
  int n_;
  std::string label_;
  int mu_dim_;
  Eigen::VectorXd default_mu_;
};

using SystemPtr = std::shared_ptr<const HamiltonianSystem>;
using MapPtr = std::shared_ptr<const ExplicitSymplecticMap>;
using CatalogEntry = std::variant<SystemPtr, MapPtr>;

// ---------------------------------------------------------------------------
// Separated Lagrangian boundary value problems
// ---------------------------------------------------------------------------

/// Boundary sections in the affine per-coordinate form
///   a0_j x^j(0) + b0_j y_j(0) = c0_j,   a1_j X^j(tau) + b1_j Y_j(tau) = c1_j.
/// Dirichlet is (1,0,x*), Neumann (0,1,y*), Robin (1,alpha,beta).
/// The free shooting variable y in R^n parameterizes the start section; the
/// residual is the end-section defect of the flow image.
struct SeparatedBVP {
  CatalogEntry flow_source;
  int n = 0;
  double tau = 1.0;

  Eigen::VectorXd start_base;   // 2n
  Eigen::MatrixXd start_chart;  // 2n x n, z0(y) = start_base + start_chart * y
  Eigen::MatrixXd end_selector; // n x 2n
  Eigen::VectorXd end_target;   // n, residual = end_selector * z_tau - end_target

  std::string boundary_kind;    // "dirichlet" | "neumann" | "robin"

  const SystemPtr* system() const { return std::get_if<SystemPtr>(&flow_source); }
  const MapPtr* map() const { return std::get_if<MapPtr>(&flow_source); }
  int mu_dim() const;
  Eigen::VectorXd default_mu() const;

  static SeparatedBVP dirichlet(CatalogEntry src, const Eigen::VectorXd& x_star, const Eigen::VectorXd& X_star,
                                double tau);
  static SeparatedBVP neumann(CatalogEntry src, const Eigen::VectorXd& y_star, const Eigen::VectorXd& Y_star,
                              double tau);
  static SeparatedBVP robin(CatalogEntry src, const Eigen::VectorXd& alpha0, const Eigen::VectorXd& beta0,
                            const Eigen::VectorXd& alpha1, const Eigen::VectorXd& beta1, double tau);
};

// ---------------------------------------------------------------------------
// Catalog systems
// ---------------------------------------------------------------------------

/// H(q,p) = p^2/2 + C e^q; mu = (C). Steady states of the combustion model.
class BratuSystem final : public SystemCRTP<BratuSystem> {
 public:
  explicit BratuSystem(double c_default)
      : SystemCRTP(1, "bratu", 1, Eigen::VectorXd::Constant(1, c_default), true) {}

  template <class S>
  S ham(const std::vector<S>& q, const std::vector<S>& p, const std::vector<S>& mu) const {
    return 0.5 * p[0] * p[0] + mu[0] * exp(q[0]);
  }
  Jet kinetic(const JetVec& p, const JetVec&) const override { return 0.5 * p[0] * p[0]; }
  Jet potential(const JetVec& q, const JetVec& mu) const override { return mu[0] * exp(q[0]); }
  JetVec grad_T(const JetVec& p, const JetVec&) const override { return {p[0]}; }
  JetVec grad_V(const JetVec& q, const JetVec& mu) const override { return {mu[0] * exp(q[0])}; }
};

/// Planar system with a periodic pitchfork:
/// H = p^2 + 0.1 p^3 - 0.01 cos p + q^3 - 0.01 q^2 + mu q.
class PlanarPitchforkSystem final : public SystemCRTP<PlanarPitchforkSystem> {
 public:
  explicit PlanarPitchforkSystem(double mu_default)
      : SystemCRTP(1, "planar_pitchfork", 1, Eigen::VectorXd::Constant(1, mu_default), true) {}

  template <class S>
  S ham(const std::vector<S>& q, const std::vector<S>& p, const std::vector<S>& mu) const {
    return kin_impl(p) + pot_impl(q, mu);
  }
  Jet kinetic(const JetVec& p, const JetVec&) const override { return kin_impl(p); }
  Jet potential(const JetVec& q, const JetVec& mu) const override { return pot_impl(q, mu); }
  JetVec grad_T(const JetVec& p, const JetVec&) const override {
    return {2.0 * p[0] + 0.3 * p[0] * p[0] + 0.01 * sin(p[0])};
  }
  JetVec grad_V(const JetVec& q, const JetVec& mu) const override {
    return {3.0 * q[0] * q[0] - 0.02 * q[0] + mu[0]};
  }

 private:
  template <class S>
  static S kin_impl(const std::vector<S>& p) {
    return p[0] * p[0] + 0.1 * p[0] * p[0] * p[0] - 0.01 * cos(p[0]);
  }
  template <class S>
  static S pot_impl(const std::vector<S>& q, const std::vector<S>& mu) {
    return q[0] * q[0] * q[0] - 0.01 * q[0] * q[0] + mu[0] * q[0];
  }
};

/// Henon-Heiles type system, optionally with the momentum perturbation
/// 0.01 p2 sin(p1) that keeps the system Hamiltonian (and separable) but
/// moves it off the unperturbed reference.
class HenonHeilesSystem final : public SystemCRTP<HenonHeilesSystem> {
 public:
  explicit HenonHeilesSystem(bool perturbed)
      : SystemCRTP(2, perturbed ? "henon_heiles_perturbed" : "henon_heiles", 0, Eigen::VectorXd(0), true),
        perturbed_(perturbed) {}

  template <class S>
  S ham(const std::vector<S>& q, const std::vector<S>& p, const std::vector<S>& mu) const {
    return kin_impl(p) + pot_impl(q, mu);
  }
  Jet kinetic(const JetVec& p, const JetVec&) const override { return kin_impl(p); }
  Jet potential(const JetVec& q, const JetVec& mu) const override { return pot_impl(q, mu); }
  JetVec grad_T(const JetVec& p, const JetVec&) const override {
    if (!perturbed_) return {p[0], p[1]};
    return {p[0] + 0.01 * p[1] * cos(p[0]), p[1] + 0.01 * sin(p[0])};
  }
  JetVec grad_V(const JetVec& q, const JetVec&) const override {
    return {q[0] - 20.0 * q[0] * q[1], q[1] - 10.0 * q[0] * q[0] + 10.0 * q[1] * q[1]};
  }

 private:
  template <class S>
  S kin_impl(const std::vector<S>& p) const {
    S t = 0.5 * (p[0] * p[0] + p[1] * p[1]);
    if (perturbed_) t += 0.01 * p[1] * sin(p[0]);
    return t;
  }
  template <class S>
  static S pot_impl(const std::vector<S>& q, const std::vector<S>&) {
    return 0.5 * (q[0] * q[0] + q[1] * q[1]) - 10.0 * (q[0] * q[0] * q[1] - q[1] * q[1] * q[1] / 3.0);
  }

  bool perturbed_;
};

/// Completely integrable 4d system with a cyclic variable q2:
/// H = q1^3 + mu q1 + p1 p2 + p1^2 + (p1^3 + p2^3)/10, optionally with the
/// symmetry-breaking term 0.01 q2.
class Cyclic4dSystem final : public SystemCRTP<Cyclic4dSystem> {
 public:
  Cyclic4dSystem(double mu_default, bool symmetry_broken)
      : SystemCRTP(2, symmetry_broken ? "cyclic_4d_symbroken" : "cyclic_4d", 1,
                   Eigen::VectorXd::Constant(1, mu_default), true),
        broken_(symmetry_broken) {}

  template <class S>
  S ham(const std::vector<S>& q, const std::vector<S>& p, const std::vector<S>& mu) const {
    return kin_impl(p) + pot_impl(q, mu);
  }
  Jet kinetic(const JetVec& p, const JetVec&) const override { return kin_impl(p); }
  Jet potential(const JetVec& q, const JetVec& mu) const override { return pot_impl(q, mu); }
  JetVec grad_T(const JetVec& p, const JetVec&) const override {
    return {p[1] + 2.0 * p[0] + 0.3 * p[0] * p[0], p[0] + 0.3 * p[1] * p[1]};
  }
  JetVec grad_V(const JetVec& q, const JetVec& mu) const override {
    JetVec g = {3.0 * q[0] * q[0] + mu[0], Jet(0.0)};
    if (broken_) g[1] = Jet(0.01);
    return g;
  }

 private:
  template <class S>
  static S kin_impl(const std::vector<S>& p) {
    return p[0] * p[1] + p[0] * p[0] + 0.1 * (p[0] * p[0] * p[0] + p[1] * p[1] * p[1]);
  }
  template <class S>
  S pot_impl(const std::vector<S>& q, const std::vector<S>& mu) const {
    S v = q[0] * q[0] * q[0] + mu[0] * q[0];
    if (broken_) v += 0.01 * q[1];
    return v;
  }

  bool broken_;
};

/// Integrable torus system: Hbar(pbar) = pbar1^3 + mu pbar1 + pbar2^2 pulled
/// back through the cotangent lift of h(q) = (q1 + eps cos q2, q2 + kappa cos q1).
/// Angles live on the R^2 universal cover; wrap only when reporting.
class TorusIntegrableSystem final : public SystemCRTP<TorusIntegrableSystem> {
 public:
  TorusIntegrableSystem(double eps, double kappa, double mu_default)
      : SystemCRTP(2, "torus_integrable", 1, Eigen::VectorXd::Constant(1, mu_default), false),
        eps_(eps), kappa_(kappa) {
    if (eps <= -1.0 || eps >= 1.0 || eps == 0.0 || kappa <= -1.0 || kappa >= 1.0 || kappa == 0.0)
      throw std::invalid_argument("torus_integrable: eps, kappa must lie in (-1,1) \\ {0}");
  }

  double eps() const { return eps_; }
  double kappa() const { return kappa_; }

  template <class S>
  S ham(const std::vector<S>& q, const std::vector<S>& p, const std::vector<S>& mu) const {
    // Solve Dh(q)^T pbar = p by Cramer's rule (no explicit inverse).
    // Dh(q) = [[1, -eps sin q2], [-kappa sin q1, 1]].
    const S b12 = -kappa_ * sin(q[0]);
    const S b21 = -eps_ * sin(q[1]);
    const S det = S(1.0) - b12 * b21;
    // det = 1 - eps*kappa sin(q1) sin(q2) >= 1 - |eps kappa| > 0 for admissible
    // parameters; guard anyway.
    if (std::abs(det.primal()) < 1e-12) throw std::logic_error("torus_integrable: singular Dh(q)");
    const S pbar1 = (p[0] - b12 * p[1]) / det;
    const S pbar2 = (p[1] - b21 * p[0]) / det;
    return pbar1 * pbar1 * pbar1 + mu[0] * pbar1 + pbar2 * pbar2;
  }

  /// Cotangent-lifted change of coordinates Psi(q, p) = (h(q), Dh(q)^{-T} p).
  Eigen::VectorXd lift_to_bar(const Eigen::VectorXd& z) const;

 private:
  double eps_, kappa_;
};

/// Generating-function fold example reduced to n = 1 in closed form:
/// (X, Y) = (3y^2 + mu - x, (x - 3y^2 - mu)/2 - y), exactly symplectic.
class Example5FoldMap final : public ExplicitSymplecticMap {
 public:
  explicit Example5FoldMap(double mu_default)
      : ExplicitSymplecticMap(1, "example5_fold", 1, Eigen::VectorXd::Constant(1, mu_default)) {}

  JetVec apply(const JetVec& z, const JetVec& mu) const override {
    const Jet& x = z[0];
    const Jet& y = z[1];
    Jet X = 3.0 * y * y + mu[0] - x;
    Jet Y = (x - 3.0 * y * y - mu[0]) / 2.0 - y;
    return {X, Y};
  }
};

/// H~ = H o Psi^{-1} for the symplectic point transformation
/// Psi(q, p) = (A q, A^{-T} p); boundary data transforms as x* -> A x*.
class LinearTransformedSystem final : public HamiltonianSystem {
 public:
  LinearTransformedSystem(SystemPtr inner, const Eigen::MatrixXd& A);

  Jet energy(const JetVec& q, const JetVec& p, const JetVec& mu) const override;
  Jet2 energy_nested(const Jet2Vec& q, const Jet2Vec& p, const Jet2Vec& mu) const override;
  Jet kinetic(const JetVec& p, const JetVec& mu) const override;
  Jet potential(const JetVec& q, const JetVec& mu) const override;
  JetVec grad_T(const JetVec& p, const JetVec& mu) const override;
  JetVec grad_V(const JetVec& q, const JetVec& mu) const override;
  JetVec grad_q(const JetVec& q, const JetVec& p, const JetVec& mu) const override;
  JetVec grad_p(const JetVec& q, const JetVec& p, const JetVec& mu) const override;

  const Eigen::MatrixXd& A() const { return A_; }

 private:
  template <class S>
  std::vector<S> mat_apply(const Eigen::MatrixXd& M, const std::vector<S>& v) const;

  SystemPtr inner_;
  Eigen::MatrixXd A_, A_inv_, A_T_;
};

/// Transform a system together with its Dirichlet boundary data.
std::pair<SystemPtr, SeparatedBVP> apply_linear_transform(const SystemPtr& system, const SeparatedBVP& bvp,
                                                          const Eigen::MatrixXd& A);

// ---------------------------------------------------------------------------
// Hypersurfaces f(q) = 0
// ---------------------------------------------------------------------------

class Hypersurface {
 public:
  Hypersurface(int n, std::string label, bool graph) : n_(n), label_(std::move(label)), graph_(graph) {}
  virtual ~Hypersurface() = default;

  int dim_ambient() const { return n_; }
  const std::string& label() const { return label_; }
  bool is_graph() const { return graph_; }

  virtual Jet f(const JetVec& q) const = 0;
  virtual JetVec grad(const JetVec& q) const = 0;
  virtual Eigen::MatrixXd hess(const Eigen::VectorXd& q) const = 0;

  /// Paper reference start point, where applicable; empty otherwise.
  virtual Eigen::VectorXd reference_point() const { return Eigen::VectorXd(); }

  double f_value(const Eigen::VectorXd& q) const { return f(lift_const(q)).value(); }
  Eigen::VectorXd grad_value(const Eigen::VectorXd& q) const { return values_of(grad(lift_const(q))); }

  /// Newton projection onto the surface along grad f; used to put printed
  /// (rounded) reference points exactly on the constraint.
  Eigen::VectorXd project(const Eigen::VectorXd& q, double tol = 1e-13, int max_iter = 50) const;

 private:
  int n_;
  std::string label_;
  bool graph_;
};

using SurfacePtr = std::shared_ptr<const Hypersurface>;

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

using Params = std::map<std::string, double>;

/// Builds a catalog entry by name. Known names: bratu, henon_heiles,
/// henon_heiles_perturbed, planar_pitchfork, cyclic_4d, cyclic_4d_symbroken,
/// example5_fold, torus_integrable, linear_transformed.
CatalogEntry catalog_build(const std::string& name, const Params& params = {});

SystemPtr build_torus_system(double eps, double kappa, double mu);

/// Paper boundary value problem that goes with a catalog entry.
SeparatedBVP catalog_bvp(const std::string& name, const Params& params = {});

/// Known names: plane, sphere, ellipsoid, ellipsoid_perturbed,
/// gaussian_graph_perturbed, ellipsoid3_perturbed.
SurfacePtr hypersurface_catalog(const std::string& name, const Params& params = {});

std::vector<std::string> catalog_system_names();
std::vector<std::string> catalog_surface_names();

}  // namespace hambvp
