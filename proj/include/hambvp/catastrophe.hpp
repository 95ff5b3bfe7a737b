#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hambvp/jet.hpp"

namespace hambvp {

/// Thom's elementary catastrophes (miniversal unfoldings as tabulated).
enum class CatClass { A2, A3, A4, A5, D4plus, D4minus, D5 };

CatClass cat_class_from_string(const std::string& s);
std::string cat_class_name(CatClass c);
int unfolding_arity(CatClass c);   // 1 or 2 state variables
int unfolding_codim(CatClass c);   // number of unfolding parameters

struct UnfoldingEval {
  double value;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

/// Closed-form value/gradient/Hessian of the miniversal unfolding.
UnfoldingEval unfolding_eval(CatClass c, const Eigen::VectorXd& mu, const Eigen::VectorXd& point);

/// Jet-evaluable route for cross-checking the closed forms.
Jet unfolding_value_jet(CatClass c, const Eigen::VectorXd& mu, const JetVec& point);

/// Universal unfolding of the roots-type D-series singularity
/// grad(x^2 y +/- y^{k+1}) in the rank-2 free module; the mu4 (y, 0) term is
/// the non-gradient direction. For k = 2 this is the basis used for the
/// hyperbolic/elliptic umbilic break analysis, whose det formula is closed
/// form. Higher k adds gradient directions (0, y^j), j = 1..k-2.
class VectorUnfolding {
 public:
  VectorUnfolding(bool plus, int k = 2);

  bool plus() const { return plus_; }
  int k() const { return k_; }
  int mu_dim() const { return 2 + k_; }

  Eigen::Vector2d eval(const Eigen::Vector2d& xy, const Eigen::VectorXd& mu) const;
  Eigen::Matrix2d jac(const Eigen::Vector2d& xy, const Eigen::VectorXd& mu) const;
  double frobenius_jac(const Eigen::Vector2d& xy, const Eigen::VectorXd& mu) const;

  /// det of the Jacobian; for k = 2 this matches the printed quadratic form.
  double det_jac(const Eigen::Vector2d& xy, const Eigen::VectorXd& mu) const;
  double det_jac_closed_form(const Eigen::Vector2d& xy, double mu3, double mu4) const;  // k = 2

  /// Scalar potential whose gradient the unfolding reduces to at mu4 = 0.
  double potential(const Eigen::Vector2d& xy, const Eigen::VectorXd& mu) const;
  Eigen::Vector2d grad_potential(const Eigen::Vector2d& xy, const Eigen::VectorXd& mu) const;

 private:
  bool plus_;
  int k_;
};

struct D4CuspPoint {
  Eigen::Vector2d xy;
  Eigen::Vector2d mu12;
  double mu3;
};

struct D4Slice {
  double mu3;
  // sampled fold curve(s): state-space points and their (mu1, mu2) images
  std::vector<Eigen::Vector2d> xy;
  std::vector<Eigen::Vector2d> mu12;
  std::vector<int> curve_id;
  std::vector<D4CuspPoint> cusps;
  bool degenerate_point = false;  // curve collapsed to a single point
};

struct D4LevelSet {
  bool plus;
  double mu4;
  std::vector<D4Slice> slices;
};

/// Level bifurcation set of the (possibly non-gradient-perturbed) D4
/// unfolding, swept over mu3 slices. The zero curve of det Df is recovered in
/// closed form per slice (ellipse for the elliptic, hyperbola for the
/// hyperbolic umbilic); (mu1, mu2) follow affinely from f = 0. Cusp points
/// are the zeros of the derivative of det along the kernel of Df.
/// samples_per_curve must be at least 32.
D4LevelSet d4_level_set(bool plus, const std::vector<double>& mu3_values, double mu4, int samples_per_curve,
                        double clip_box = 2.0);

struct SwallowtailPoint {
  Eigen::Vector2d xy;
  double mu3;
};

/// Closed-form swallowtail points (-mu4/4, +/- sqrt(3) mu4 / 24) at
/// mu3 = +/- sqrt(3) mu4 / 8; mu4 = 0 degenerates to the single D4 point.
std::vector<SwallowtailPoint> swallowtail_points(double mu4);

/// Numerical tracing oracle: bisection over mu3 on the cusp count of the
/// perturbed hyperbolic level set locates where two cusp branches merge.
std::vector<SwallowtailPoint> traced_swallowtail_points(double mu4, double mu3_max, int samples_per_curve = 4096);

/// min over an nxn grid on [-box, box]^2 of ||Df_mu||_F (corank-2 witness).
double d4_min_frobenius(bool plus, double mu3, double mu4, int grid_n = 201, double box = 2.0);

}  // namespace hambvp
