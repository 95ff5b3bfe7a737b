#include "hambvp/integrate.hpp"

#include <cmath>

namespace hambvp {

Method method_from_string(const std::string& name) {
  if (name == "sv") return Method::sv;
  if (name == "sv_implicit") return Method::sv_implicit;
  if (name == "rk2") return Method::rk2;
  if (name == "ref_rk4") return Method::ref_rk4;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::sv: return "sv";
    case Method::sv_implicit: return "sv_implicit";
    case Method::rk2: return "rk2";
    case Method::ref_rk4: return "ref_rk4";
  }
  return "?";
}

namespace {

constexpr double kNewtonTol = 1e-12;
constexpr int kNewtonMaxIter = 50;

int seed_dim_of(const JetVec& v) {
  int m = 0;
  for (const Jet& j : v) m = std::max(m, j.seed_dim());
  return m;
}

int seed_dim_of(const JetVec& a, const JetVec& b, const JetVec& c) {
  return std::max(seed_dim_of(a), std::max(seed_dim_of(b), seed_dim_of(c)));
}

/// Copy a jet, re-embedding its partials into m_total seeds (trailing slots
/// zero). Constants stay constants until broadcast.
Jet extend_seeds(const Jet& j, int m_total) {
  if (j.seed_dim() == 0) return Jet(j.value(), m_total);
  Jet out(j.value(), m_total);
  for (int i = 0; i < j.seed_dim(); ++i) out.partial_ref(i) = j.partial(i);
  return out;
}

JetVec extend_seeds(const JetVec& v, int m_total) {
  JetVec out;
  out.reserve(v.size());
  for (const Jet& j : v) out.push_back(extend_seeds(j, m_total));
  return out;
}

/// Solve the implicit stage G(u) = 0 where
///   G(u) = u - rhs_const + scale * g(u)
/// and g is a jet-evaluable n-vector field of u (inputs baked into evalG).
/// Values by damped-free Newton from the predictor u0; seeds carried by the
/// inputs are propagated via the implicit function theorem.
///
/// evalG(u_jets) must evaluate G in jet arithmetic with whatever seeds u
/// carries (inputs must be pre-extended to match).
struct ImplicitStage {
  int n;
  int m_in;                                       // incoming seed dimension
  std::function<JetVec(const JetVec&)> eval_g;    // value/Newton evaluation: G at u with u-seeds only
  std::function<JetVec(const JetVec&)> eval_ext;  // extended evaluation: G with (m_in + n) seeds
};

JetVec solve_implicit(const ImplicitStage& st, const Eigen::VectorXd& u0, double unit_scale) {
  const int n = st.n;
  Eigen::VectorXd u = u0;
  bool converged = false;
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    const JetVec gj = st.eval_g(lift_all(u));
    const Eigen::VectorXd gv = values_of(gj);
    if (gv.lpNorm<Eigen::Infinity>() <= kNewtonTol * unit_scale) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd J = partials_of(gj, n);
    u += J.partialPivLu().solve(-gv);
  }
  if (!converged) {
    // one more residual check after the last update
    const JetVec gj = st.eval_g(lift_all(u));
    if (values_of(gj).lpNorm<Eigen::Infinity>() > kNewtonTol * unit_scale)
      throw std::runtime_error("implicit Stoermer-Verlet stage: Newton did not converge");
  }

  if (st.m_in == 0) return lift_const(u);

  // Implicit function theorem: seeds of u solve  (dG/du) du = -(dG/dseeds).
  const int m_tot = st.m_in + n;
  JetVec u_ext;
  u_ext.reserve(n);
  for (int i = 0; i < n; ++i) u_ext.push_back(Jet::seeded(u[i], m_tot, st.m_in + i));
  const JetVec gj = st.eval_ext(u_ext);
  Eigen::MatrixXd all = partials_of(gj, m_tot);
  const Eigen::MatrixXd A = all.rightCols(n);
  const Eigen::MatrixXd B = all.leftCols(st.m_in);
  const Eigen::MatrixXd du = A.partialPivLu().solve(-B);  // n x m_in
  JetVec out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Jet j(u[i], st.m_in);
    for (int k = 0; k < st.m_in; ++k) j.partial_ref(k) = du(i, k);
    out.push_back(j);
  }
  return out;
}

JetVec axpy(const JetVec& x, double a, const JetVec& y) {
  JetVec out;
  out.reserve(x.size());
  for (size_t i = 0; i < x.size(); ++i) out.push_back(x[i] + a * y[i]);
  return out;
}

}  // namespace

void step_sv_separable(const HamiltonianSystem& sys, JetVec& q, JetVec& p, const JetVec& mu, double h) {
  if (!sys.separable()) throw std::invalid_argument(sys.label() + ": sv requires a separable Hamiltonian");
  const JetVec p_half = axpy(p, -0.5 * h, sys.grad_V(q, mu));
  q = axpy(q, h, sys.grad_T(p_half, mu));
  p = axpy(p_half, -0.5 * h, sys.grad_V(q, mu));
}

void step_sv_general(const HamiltonianSystem& sys, JetVec& q, JetVec& p, const JetVec& mu, double h) {
  const int n = sys.dim_n();
  const int m_in = seed_dim_of(q, p, mu);
  const Eigen::VectorXd qv = values_of(q);
  const Eigen::VectorXd pv = values_of(p);
  const double scale = 1.0 + pv.lpNorm<Eigen::Infinity>();

  const JetVec q_ext = extend_seeds(q, m_in + n);
  const JetVec p_ext = extend_seeds(p, m_in + n);
  const JetVec mu_ext = extend_seeds(mu, m_in + n);
  const JetVec q_const = lift_const(qv);
  const JetVec mu_const = lift_const(values_of(mu));

  // Stage 1: p_half = p - (h/2) grad_q H(q, p_half).
  ImplicitStage st1{
      n, m_in,
      [&](const JetVec& u) {
        JetVec g = sys.grad_q(q_const, u, mu_const);
        JetVec out;
        for (int i = 0; i < n; ++i) out.push_back(u[i] - pv[i] + 0.5 * h * g[i]);
        return out;
      },
      [&](const JetVec& u) {
        JetVec g = sys.grad_q(q_ext, u, mu_ext);
        JetVec out;
        for (int i = 0; i < n; ++i) out.push_back(u[i] - p_ext[i] + 0.5 * h * g[i]);
        return out;
      }};
  const Eigen::VectorXd predictor1 = pv - 0.5 * h * values_of(sys.grad_q(q_const, lift_const(pv), mu_const));
  const JetVec p_half = solve_implicit(st1, predictor1, scale);
  const JetVec p_half_ext = extend_seeds(p_half, m_in + n);
  const JetVec p_half_const = lift_const(values_of(p_half));

  // Stage 2: q' = q + (h/2)(grad_p H(q, p_half) + grad_p H(q', p_half)).
  const JetVec g_first = sys.grad_p(q, p_half, mu);  // carries m_in seeds
  const JetVec g_first_ext = extend_seeds(g_first, m_in + n);
  const Eigen::VectorXd g_first_v = values_of(g_first);
  ImplicitStage st2{
      n, m_in,
      [&](const JetVec& w) {
        JetVec g = sys.grad_p(w, p_half_const, mu_const);
        JetVec out;
        for (int i = 0; i < n; ++i) out.push_back(w[i] - qv[i] - 0.5 * h * (g_first_v[i] + g[i]));
        return out;
      },
      [&](const JetVec& w) {
        JetVec g = sys.grad_p(w, p_half_ext, mu_ext);
        JetVec out;
        for (int i = 0; i < n; ++i) out.push_back(w[i] - q_ext[i] - 0.5 * h * (g_first_ext[i] + g[i]));
        return out;
      }};
  const Eigen::VectorXd predictor2 = qv + h * g_first_v;
  const JetVec q_next = solve_implicit(st2, predictor2, 1.0 + qv.lpNorm<Eigen::Infinity>());

  // Final explicit kick.
  p = axpy(p_half, -0.5 * h, sys.grad_q(q_next, p_half, mu));
  q = q_next;
}

namespace {

void hamiltonian_field(const HamiltonianSystem& sys, const JetVec& q, const JetVec& p, const JetVec& mu,
                       JetVec& dq, JetVec& dp) {
  dq = sys.grad_p(q, p, mu);
  JetVec gq = sys.grad_q(q, p, mu);
  dp.clear();
  for (const Jet& g : gq) dp.push_back(-g);
}

}  // namespace

void step_rk2(const HamiltonianSystem& sys, JetVec& q, JetVec& p, const JetVec& mu, double h) {
  JetVec k1q, k1p, k2q, k2p;
  hamiltonian_field(sys, q, p, mu, k1q, k1p);
  const JetVec qm = axpy(q, 0.5 * h, k1q);
  const JetVec pm = axpy(p, 0.5 * h, k1p);
  hamiltonian_field(sys, qm, pm, mu, k2q, k2p);
  q = axpy(q, h, k2q);
  p = axpy(p, h, k2p);
}

void step_rk4(const HamiltonianSystem& sys, JetVec& q, JetVec& p, const JetVec& mu, double h) {
  JetVec k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
  hamiltonian_field(sys, q, p, mu, k1q, k1p);
  hamiltonian_field(sys, axpy(q, 0.5 * h, k1q), axpy(p, 0.5 * h, k1p), mu, k2q, k2p);
  hamiltonian_field(sys, axpy(q, 0.5 * h, k2q), axpy(p, 0.5 * h, k2p), mu, k3q, k3p);
  hamiltonian_field(sys, axpy(q, h, k3q), axpy(p, h, k3p), mu, k4q, k4p);
  for (size_t i = 0; i < q.size(); ++i) {
    q[i] += (h / 6.0) * (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i]);
    p[i] += (h / 6.0) * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
  }
}

JetVec flow_jets(const HamiltonianSystem& sys, const JetVec& z0, const JetVec& mu, const FlowSpec& spec,
                 std::vector<Eigen::VectorXd>* trajectory) {
  if (spec.steps < 1) throw std::invalid_argument("flow: steps must be >= 1");
  if (spec.tau <= 0.0) throw std::invalid_argument("flow: tau must be positive");
  const int n = sys.dim_n();
  if (static_cast<int>(z0.size()) != 2 * n) throw std::invalid_argument("flow: state dimension mismatch");
  JetVec q(z0.begin(), z0.begin() + n), p(z0.begin() + n, z0.end());
  const double h = spec.step_size();
  if (trajectory) {
    trajectory->clear();
    Eigen::VectorXd z(2 * n);
    z << values_of(q), values_of(p);
    trajectory->push_back(z);
  }
  for (int k = 0; k < spec.steps; ++k) {
    try {
      switch (spec.method) {
        case Method::sv: step_sv_separable(sys, q, p, mu, h); break;
        case Method::sv_implicit: step_sv_general(sys, q, p, mu, h); break;
        case Method::rk2: step_rk2(sys, q, p, mu, h); break;
        case Method::ref_rk4: step_rk4(sys, q, p, mu, h); break;
      }
    } catch (const std::exception& e) {
      throw FlowError(k, sys.label() + ": step " + std::to_string(k) + " failed: " + e.what());
    }
    if (trajectory) {
      Eigen::VectorXd z(2 * n);
      z << values_of(q), values_of(p);
      trajectory->push_back(z);
    }
  }
  JetVec out = q;
  out.insert(out.end(), p.begin(), p.end());
  return out;
}

FlowResult flow(const HamiltonianSystem& sys, const Eigen::VectorXd& z0, const Eigen::VectorXd& mu,
                const FlowSpec& spec) {
  FlowResult res;
  const JetVec z0j = spec.with_jets ? lift_all(z0) : lift_const(z0);
  const JetVec muj = lift_const(mu);
  std::vector<Eigen::VectorXd> traj;
  const JetVec zt = flow_jets(sys, z0j, muj, spec, spec.store_trajectory ? &traj : nullptr);
  res.z_final = values_of(zt);
  if (spec.with_jets) res.jac = partials_of(zt, static_cast<int>(z0.size()));
  res.trajectory = std::move(traj);
  return res;
}

Eigen::MatrixXd symplectic_J(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  J.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  return J;
}

double symplecticity_residual(const Eigen::MatrixXd& M) {
  const int n = static_cast<int>(M.rows()) / 2;
  const Eigen::MatrixXd J = symplectic_J(n);
  return (M.transpose() * J * M - J).cwiseAbs().maxCoeff();
}

}  // namespace hambvp
