#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hambvp/bvp.hpp"
#include "hambvp/marching.hpp"

namespace hambvp {

/// Number of singular values at or below tol * sigma_max (sigma_max falls
/// back to 1 for the zero matrix, making its corank the full dimension).
/// reference_scale, when positive, floors sigma_max so that a matrix that
/// converged to zero from O(reference_scale) surroundings reads as corank n.
int corank(const Eigen::MatrixXd& M, double tol = 1e-6, double reference_scale = 0.0);

struct SingularPoint {
  Eigen::VectorXd location;  // (x2*, y1, y2)
  Eigen::MatrixXd jac;       // D_y phi^X at the point
  int corank = 0;
  std::string class_hint = "unknown";
  double residual_frobenius = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// D_y phi^X for the n = 2 Dirichlet family with x1* pinned and x2* free.
Eigen::MatrixXd dirichlet_jac(const SeparatedBVP& bvp, const FlowSpec& spec, double x2, const Eigen::Vector2d& y,
                              Eigen::VectorXd* phiX = nullptr);

/// Gauss-Newton on the 4-entry residual vec(D_y phi^X) over (x2*, y1, y2);
/// requires n = 2. Success means Frobenius norm < 1e-8; stagnation returns
/// the best point with its residual floor.
SingularPoint locate_umbilic(const SeparatedBVP& bvp, const FlowSpec& spec, const Eigen::Vector3d& seed);

/// Seeding rule for locate_umbilic: grid scan for the (x2, y1, y2) whose
/// Jacobian is closest to the zero matrix (smallest spectral norm).
Eigen::Vector3d umbilic_seed_scan(const SeparatedBVP& bvp, const FlowSpec& spec, const Eigen::Vector3d& lo,
                                  const Eigen::Vector3d& hi, int per_axis);

/// Binding of a level-set box dimension to a problem quantity.
struct FreeVar {
  enum Kind { MuComponent, XStarComponent, YComponent } kind;
  int index;
};

struct LevelSetSpec {
  std::vector<FreeVar> free_vars;  // 2 or 3 of them
  Eigen::VectorXd lo, hi;
  std::vector<int> resolution;     // grid nodes per axis (>= 32)
};

struct LevelSetResult {
  int dim = 0;
  // geometry in the free-variable domain
  Segments2 seg;
  Triangles3 tri;
  // vertices mapped to parameter space: (non-y free vars..., phi^X...)
  std::vector<Eigen::VectorXd> mapped;
  // corank indicator at each vertex: sigma_min / sigma_max of D_y phi^X
  std::vector<double> vertex_sigma_ratio;
  std::vector<int> vertex_corank;
  // sampled det field (x-fastest) for downstream analysis
  std::vector<double> field;
  LevelSetSpec spec;
  bool empty() const { return seg.vertices.empty() && tri.vertices.empty(); }
};

/// Zero set of det D_y phi^X over a box of free variables; marching squares
/// in 2d, marching cubes in 3d, one secant refinement per vertex, vertices
/// mapped through (free vars, phi^X) into parameter space.
LevelSetResult level_bifurcation_set(const SeparatedBVP& bvp, const FlowSpec& spec, const LevelSetSpec& ls);

/// Cusp points of the level set: per x2-slice, points on the fold curve where
/// the kernel of D_y phi^X turns tangent to the curve (directional derivative
/// of det along the kernel vanishes).
struct CuspRidgePoint {
  Eigen::Vector3d location;  // (x2, y1, y2)
  int slice = 0;
};
std::vector<CuspRidgePoint> extract_cusp_ridges(const SeparatedBVP& bvp, const FlowSpec& spec,
                                                const LevelSetResult& level_set);

/// Number of distinct cusp ridges entering an annulus around a point;
/// a degree->=3 meeting vertex certifies the three-ridge structure.
int count_ridges_meeting(const std::vector<CuspRidgePoint>& cusps, const Eigen::Vector3d& center, double r_inner,
                         double r_outer, double link_distance);

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& y, const Eigen::VectorXd& mu)>;

/// Numerical determinacy test at a corank-1 singular point: A2 when the
/// second directional derivative of <w, r> along the kernel is nonzero, A3
/// when the third is, otherwise "higher".
std::string classify_A(const ResidualFn& r, const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                       const Eigen::MatrixXd& J_y);

std::string classify_A(const SeparatedBVP& bvp, const FlowSpec& spec, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& mu);

}  // namespace hambvp
