#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hambvp/jet.hpp"
#include "hambvp/systems.hpp"

namespace hambvp {

enum class Method { sv, sv_implicit, rk2, ref_rk4 };

Method method_from_string(const std::string& name);
std::string method_name(Method m);

struct FlowSpec {
  Method method = Method::sv;
  int steps = 10;
  double tau = 1.0;
  bool with_jets = false;
  bool store_trajectory = false;

  double step_size() const { return tau / steps; }
};

struct FlowResult {
  Eigen::VectorXd z_final;
  std::optional<Eigen::MatrixXd> jac;          // 2n x 2n derivative w.r.t. z0
  std::vector<Eigen::VectorXd> trajectory;     // states including z0, if requested
};

class FlowError : public std::runtime_error {
 public:
  FlowError(int step, const std::string& what) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// One Stoermer-Verlet step for a separable Hamiltonian (momentum-first kick).
void step_sv_separable(const HamiltonianSystem& sys, JetVec& q, JetVec& p, const JetVec& mu, double h);

/// Implicit partitioned Stoermer-Verlet step for general Hamiltonians. Inner
/// Newton solves run on values; derivative seeds carried by the arguments are
/// propagated through the implicit stages exactly (implicit function theorem).
void step_sv_general(const HamiltonianSystem& sys, JetVec& q, JetVec& p, const JetVec& mu, double h);

/// Explicit midpoint rule (non-symplectic RK2).
void step_rk2(const HamiltonianSystem& sys, JetVec& q, JetVec& p, const JetVec& mu, double h);

/// Classical RK4; reference oracle for derived flow values.
void step_rk4(const HamiltonianSystem& sys, JetVec& q, JetVec& p, const JetVec& mu, double h);

/// N-step composition on a jet state. Seeds carried by z0/mu propagate
/// through every step.
JetVec flow_jets(const HamiltonianSystem& sys, const JetVec& z0, const JetVec& mu, const FlowSpec& spec,
                 std::vector<Eigen::VectorXd>* trajectory = nullptr);

/// Value-level flow; with_jets seeds z0 with the identity and reports the
/// 2n x 2n flow Jacobian.
FlowResult flow(const HamiltonianSystem& sys, const Eigen::VectorXd& z0, const Eigen::VectorXd& mu,
                const FlowSpec& spec);

/// Standard symplectic matrix J = [[0, I], [-I, 0]] of size 2n.
Eigen::MatrixXd symplectic_J(int n);

/// || M^T J M - J ||_inf, the symplecticity defect of a Jacobian.
double symplecticity_residual(const Eigen::MatrixXd& M);

}  // namespace hambvp
