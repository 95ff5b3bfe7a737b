#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hambvp/systems.hpp"

namespace hambvp {

struct ConstrainedState {
  Eigen::VectorXd q, p;
};

class RattleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scalar Newton (warm-started, bisection fallback) for the RATTLE multiplier:
/// 0 = f(q + h (p - (h/2) grad f(q) lambda)).
double solve_lambda(const Hypersurface& surface, const Eigen::VectorXd& q, const Eigen::VectorXd& p, double h,
                    double lambda0 = 0.0);

/// One RATTLE step (lambda solve, half kick, drift, normal, tangent
/// projection). lambda_io warm-starts the multiplier solve and returns the
/// accepted value.
ConstrainedState rattle_step(const Hypersurface& surface, const ConstrainedState& s, double h,
                             double* lambda_io = nullptr);

/// Same update without the final tangent projection (the projection is wiped
/// out by the next step's constraint solve; used to verify exactly that).
ConstrainedState rattle_step_no_projection(const Hypersurface& surface, const ConstrainedState& s, double h,
                                           double* lambda_io = nullptr);

struct JetRattleState {
  ConstrainedState state;
  Eigen::MatrixXd V;  // derivative of the composed step map w.r.t. (q0, p0)

  static JetRattleState initial(ConstrainedState s) {
    const int n = static_cast<int>(s.q.size());
    return {std::move(s), Eigen::MatrixXd::Identity(2 * n, 2 * n)};
  }
};

/// RATTLE step together with the exact step-map derivative D Psi_h
/// (including the projection step); V' = D Psi_h V.
JetRattleState jet_rattle_step(const Hypersurface& surface, const JetRattleState& js, double h,
                               double* lambda_io = nullptr);

/// Derivative of one step as a standalone matrix (top half d(q'), bottom
/// d(p'), columns ordered (q, p)).
Eigen::MatrixXd rattle_step_derivative(const Hypersurface& surface, const ConstrainedState& s, double h,
                                       double lambda, const ConstrainedState& next);

/// Tangent basis at q*: graph surfaces use the explicit column form
/// [I; (df/dq1, df/dq2)] with normalized columns; other surfaces an
/// orthonormal kernel basis of <grad f, .> aligned with the trailing
/// coordinate directions.
Eigen::MatrixXd tangent_basis(const Hypersurface& surface, const Eigen::VectorXd& q_star);

struct RayGrid {
  std::vector<Eigen::VectorXd> rho;            // ray chart points in R^{n-1}
  std::vector<std::array<int, 2>> grid_index;  // (i, j); j = 0 for circle grids
  int n_theta = 0, n_phi = 0;                  // n_phi == 0 means a 1d circle grid
};

/// Uniform angles on the unit circle (for 2d surfaces in R^3).
RayGrid circle_ray_grid(int count);

/// Spherical-coordinate grid (r is the arc parameter; theta in [theta_lo,
/// theta_hi], phi in [phi_lo, phi_hi)) for 3d surfaces in R^4.
RayGrid sphere_ray_grid(int n_theta, int n_phi, double theta_lo, double theta_hi, double phi_lo, double phi_hi);

struct RayResult {
  Eigen::VectorXd rho;
  bool degenerate = false;
  double arc = 0.0;           // arc parameter of first degeneracy
  Eigen::VectorXd endpoint;   // Phi^Q there
  int corank = 0;
  double sigma_ratio = 1.0;   // 2nd-smallest/largest singular value of the reduced matrix
  double det_residual = 0.0;
};

struct ConjugateLocus {
  Eigen::VectorXd q_star;
  Eigen::MatrixXd A;
  RayGrid grid;
  std::vector<RayResult> rays;
  std::vector<int> cusp_rays;  // indices into rays
  double h = 0.0, max_arc = 0.0;
  int drop_coordinate = -1;    // output chart: ambient coordinate dropped
};

/// Conjugate locus by jet-RATTLE: each ray integrates until the reduced
/// determinant det(P D_p Phi^Q A) changes sign, refined by secant in the arc
/// parameter; cusp candidates are extrema of the degeneracy arc along the
/// grid confirmed at corank 1.
ConjugateLocus conjugate_locus(const Hypersurface& surface, const Eigen::VectorXd& q_star, const RayGrid& grid,
                               double h, double max_arc);

/// Default arc cap: 1.2 pi / sqrt(curvature proxy) from the sphere bound.
double default_max_arc(const Hypersurface& surface, const Eigen::VectorXd& q_star);

}  // namespace hambvp
