#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hambvp/integrate.hpp"
#include "hambvp/systems.hpp"

namespace hambvp {

enum class PointTag { regular, fold, cusp_candidate, umbilic_candidate };

std::string tag_name(PointTag t);

struct BranchPoint {
  Eigen::VectorXd mu;
  Eigen::VectorXd y;       // free shooting variables
  Eigen::VectorXd z_full;  // start state z0(y)
  PointTag tag = PointTag::regular;
  double residual_norm = 0.0;
  double det_Dy = 0.0;     // det of the residual Jacobian, fold cross-check
};

struct Branch {
  std::vector<BranchPoint> points;
};

struct BifurcationDiagram {
  std::vector<Branch> branches;
  std::string scenario;
  std::string method;
  int steps = 0;
  double tau = 0.0;
  std::vector<std::string> notes;

  // In-memory handles for refinement passes; not serialized.
  std::shared_ptr<const SeparatedBVP> source_bvp;
  FlowSpec source_spec;

  size_t total_points() const;
};

struct ResidualEval {
  Eigen::VectorXd r;       // n
  Eigen::MatrixXd J_y;     // n x n, present when requested
  Eigen::MatrixXd J_mu;    // n x mu_dim, present when requested
};

/// Shooting residual r(y; mu) = end-section defect of the flow image of the
/// start-section point z0(y). Map-backed problems apply the map directly and
/// ignore the flow spec.
Eigen::VectorXd residual(const SeparatedBVP& bvp, const FlowSpec& spec, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& mu);

ResidualEval residual_eval(const SeparatedBVP& bvp, const FlowSpec& spec, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& mu, bool with_jac, bool with_mu_jac = false);

/// Start state z0(y) on the start section.
Eigen::VectorXd bvp_start_state(const SeparatedBVP& bvp, const Eigen::VectorXd& y);

struct ShootResult {
  bool converged = false;
  BranchPoint point;
  int iterations = 0;
  double final_norm = 0.0;
  double condition = 0.0;
  std::string message;
};

/// Damped Newton on the shooting residual with jet Jacobians.
ShootResult shoot(const SeparatedBVP& bvp, const FlowSpec& spec, const Eigen::VectorXd& mu,
                  const Eigen::VectorXd& y0);

struct SweepConfig {
  std::vector<Eigen::VectorXd> mu_grid;
  std::vector<Eigen::VectorXd> y_starts;
  double dedupe_tol = 1e-6;
  double jump_factor = 10.0;  // times median inter-mu displacement
  // accept region: converged roots farther than y_accept_radius from
  // y_accept_center are discarded (Newton wanderers outside the study window)
  Eigen::VectorXd y_accept_center;
  double y_accept_radius = 1e308;
  std::string scenario;
};

/// Multistart sweep over a parameter grid; converged roots deduplicated and
/// linked into branches by nearest neighbour across adjacent grid values.
BifurcationDiagram sweep(const SeparatedBVP& bvp, const FlowSpec& spec, const SweepConfig& config);

struct ContinuationConfig {
  double ds = 1e-2;
  double ds_min = 1e-6;
  double ds_max = 5e-2;
  int max_points = 2000;
  int mu_index = 0;
  double mu_min = -1e308;
  double mu_max = 1e308;
  bool polish_folds = true;
};

/// Pseudo-arclength predictor-corrector from a converged seed. Folds are
/// flagged where the mu-component of the tangent changes sign and polished
/// with the extended system [r; det J_y] = 0.
Branch continue_branch(const SeparatedBVP& bvp, const FlowSpec& spec, const BranchPoint& seed,
                       const ContinuationConfig& config, std::string* stop_reason = nullptr);

/// Newton polish of a fold location; returns the fold point or nullopt.
std::optional<BranchPoint> fold_polish(const SeparatedBVP& bvp, const FlowSpec& spec, const BranchPoint& near,
                                       int mu_index = 0);

struct BreakResult {
  bool ok = false;
  double value = 0.0;
  double noise_floor = 0.0;  // double-root resolution limit of the measurement
  Eigen::VectorXd fold_mu, fold_y, continuing_y;
  std::string message;
};

struct BreakWindow {
  double mu_min = -1e308;
  double mu_max = 1e308;
  int mu_index = 0;
  double y_radius = 1e308;  // locality of the pitchfork structure in y-space
};

/// Minimal gap in y-space between the continuing branch and the fold pair of
/// a (possibly broken) pitchfork, evaluated at the fold's mu. Returns 0 for a
/// perfect pitchfork (no solution distinct from the fold pair above the
/// double-root noise radius). Re-shoots the continuing branch at the fold
/// parameter through the diagram's in-memory source. y_metric, when given,
/// measures gaps as ||y_metric (y1 - y2)|| (e.g. to undo a linear coordinate
/// change before comparing runs).
BreakResult pitchfork_break(const BifurcationDiagram& diagram, const BreakWindow& window,
                            const Eigen::MatrixXd* y_metric = nullptr);

/// Re-verify every stored point; returns the maximum residual norm.
double verify_diagram(const SeparatedBVP& bvp, const FlowSpec& spec, const BifurcationDiagram& diagram);

}  // namespace hambvp
