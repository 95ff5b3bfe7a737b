#include "hambvp/georattle.hpp"

#include <algorithm>
#include <cmath>

#include "hambvp/parallel.hpp"

namespace hambvp {

namespace {

std::string state_string(const Eigen::VectorXd& q, const Eigen::VectorXd& p, double h) {
  std::string s = "q = (";
  for (int i = 0; i < q.size(); ++i) s += (i ? ", " : "") + std::to_string(q[i]);
  s += "), p = (";
  for (int i = 0; i < p.size(); ++i) s += (i ? ", " : "") + std::to_string(p[i]);
  s += "), h = " + std::to_string(h);
  return s;
}

}  // namespace

double solve_lambda(const Hypersurface& surface, const Eigen::VectorXd& q, const Eigen::VectorXd& p, double h,
                    double lambda0) {
  const Eigen::VectorXd g = surface.grad_value(q);
  if (g.norm() == 0.0) throw RattleError("solve_lambda: zero gradient at " + state_string(q, p, h));
  auto value = [&](double lam) { return surface.f_value(q + h * (p - (0.5 * h * lam) * g)); };

  constexpr double kTol = 1e-13;
  double lam = lambda0;
  for (int it = 0; it < 30; ++it) {
    const double fv = value(lam);
    if (std::abs(fv) < kTol) return lam;
    const Eigen::VectorXd gq1 = surface.grad_value(q + h * (p - (0.5 * h * lam) * g));
    const double dfd = gq1.dot(-0.5 * h * h * g);
    if (dfd == 0.0) break;
    lam -= fv / dfd;
  }
  if (std::abs(value(lam)) < kTol) return lam;

  // bracketed bisection fallback; widen until the sign changes
  double lam_max = 1.0;
  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  while (lam_max <= 1024.0) {
    const double fa = value(-lam_max), fb = value(lam_max);
    if (fa == 0.0) return -lam_max;
    if (fb == 0.0) return lam_max;
    if (fa * fb < 0.0) {
      lo = -lam_max;
      hi = lam_max;
      bracketed = true;
      break;
    }
    lam_max *= 2.0;
  }
  if (!bracketed)
    throw RattleError("solve_lambda: no sign change within lambda_max = 1024 at " + state_string(q, p, h));
  double flo = value(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = value(mid);
    if (std::abs(fm) < kTol) return mid;
    if (flo * fm <= 0.0)
      hi = mid;
    else {
      lo = mid;
      flo = fm;
    }
  }
  const double mid = 0.5 * (lo + hi);
  if (std::abs(value(mid)) < 1e-11) return mid;
  throw RattleError("solve_lambda: bisection stalled at " + state_string(q, p, h));
}

namespace {

ConstrainedState rattle_core(const Hypersurface& surface, const ConstrainedState& s, double h, double* lambda_io,
                             bool project) {
  double lam0 = lambda_io ? *lambda_io : 0.0;
  const double lam = solve_lambda(surface, s.q, s.p, h, lam0);
  if (lambda_io) *lambda_io = lam;

  const Eigen::VectorXd g = surface.grad_value(s.q);
  ConstrainedState out;
  const Eigen::VectorXd p_half = s.p - (0.5 * h * lam) * g;
  out.q = s.q + h * p_half;
  if (!project) {
    out.p = p_half;
    return out;
  }
  const Eigen::VectorXd g1 = surface.grad_value(out.q);
  const double g1n = g1.norm();
  if (g1n == 0.0) throw RattleError("rattle_step: zero gradient after drift at " + state_string(out.q, p_half, h));
  const Eigen::VectorXd nvec = g1 / g1n;
  out.p = p_half - nvec.dot(p_half) * nvec;

  // per-step invariants: constraint satisfied by the lambda solve, tangency
  // by construction
  if (std::abs(surface.f_value(out.q)) > 1e-10)
    throw RattleError("rattle_step: constraint residual above 1e-10 at " + state_string(out.q, out.p, h));
  if (std::abs(nvec.dot(out.p)) > 1e-10 * (1.0 + out.p.norm()))
    throw RattleError("rattle_step: tangency residual above 1e-10 at " + state_string(out.q, out.p, h));
  return out;
}

}  // namespace

ConstrainedState rattle_step(const Hypersurface& surface, const ConstrainedState& s, double h, double* lambda_io) {
  return rattle_core(surface, s, h, lambda_io, true);
}

ConstrainedState rattle_step_no_projection(const Hypersurface& surface, const ConstrainedState& s, double h,
                                           double* lambda_io) {
  return rattle_core(surface, s, h, lambda_io, false);
}

Eigen::MatrixXd rattle_step_derivative(const Hypersurface& surface, const ConstrainedState& s, double h,
                                       double lambda, const ConstrainedState& next) {
  const int n = static_cast<int>(s.q.size());
  const Eigen::VectorXd g = surface.grad_value(s.q);
  const Eigen::MatrixXd H0 = surface.hess(s.q);
  const Eigen::VectorXd p_half = s.p - (0.5 * h * lambda) * g;

  const Eigen::VectorXd g1 = surface.grad_value(next.q);
  const double g1n = g1.norm();
  const Eigen::VectorXd nvec = g1 / g1n;
  const Eigen::MatrixXd H1 = surface.hess(next.q);

  const double denom = nvec.dot(g);
  if (denom == 0.0) throw RattleError("jet_rattle_step: tangential drift (n . grad f = 0)");

  const Eigen::VectorXd grad_q_lambda = (-lambda * (H0 * nvec) + (2.0 / (h * h)) * nvec) / denom;
  const Eigen::VectorXd grad_p_lambda = (2.0 / (h * denom)) * nvec;

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd Dq_ph = -0.5 * h * (H0 * lambda + g * grad_q_lambda.transpose());
  const Eigen::MatrixXd Dp_ph = I - 0.5 * h * g * grad_p_lambda.transpose();
  const Eigen::MatrixXd Dq_q1 = I + h * Dq_ph;
  const Eigen::MatrixXd Dp_q1 = h * Dp_ph;

  const Eigen::MatrixXd proj = (I - nvec * nvec.transpose()) * H1 / g1n;
  const Eigen::MatrixXd Dq_n = proj * Dq_q1;
  const Eigen::MatrixXd Dp_n = proj * Dp_q1;

  const double np = nvec.dot(p_half);
  const Eigen::MatrixXd Dq_p1 =
      Dq_ph - np * Dq_n - nvec * (p_half.transpose() * Dq_n) - nvec * (nvec.transpose() * Dq_ph);
  const Eigen::MatrixXd Dp_p1 =
      Dp_ph - np * Dp_n - nvec * (p_half.transpose() * Dp_n) - nvec * (nvec.transpose() * Dp_ph);

  Eigen::MatrixXd D(2 * n, 2 * n);
  D.topLeftCorner(n, n) = Dq_q1;
  D.topRightCorner(n, n) = Dp_q1;
  D.bottomLeftCorner(n, n) = Dq_p1;
  D.bottomRightCorner(n, n) = Dp_p1;
  return D;
}

JetRattleState jet_rattle_step(const Hypersurface& surface, const JetRattleState& js, double h, double* lambda_io) {
  double lam = lambda_io ? *lambda_io : 0.0;
  JetRattleState out;
  out.state = rattle_step(surface, js.state, h, &lam);
  if (lambda_io) *lambda_io = lam;
  out.V = rattle_step_derivative(surface, js.state, h, lam, out.state) * js.V;
  return out;
}

// ---------------------------------------------------------------------------
// tangent basis
// ---------------------------------------------------------------------------

Eigen::MatrixXd tangent_basis(const Hypersurface& surface, const Eigen::VectorXd& q_star) {
  const int n = surface.dim_ambient();
  const Eigen::VectorXd g = surface.grad_value(q_star);
  if (g.norm() == 0.0) throw std::invalid_argument("tangent_basis: zero gradient");

  if (surface.is_graph()) {
    // columns (e_i, df/dq_i) for the graph chart, normalized to unit length
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n - 1);
    for (int i = 0; i < n - 1; ++i) {
      A(i, i) = 1.0;
      A(n - 1, i) = g[i];
      A.col(i).normalize();
    }
    return A;
  }

  // orthonormal kernel basis of <grad f, .> nearest the trailing coordinate
  // directions; e1 only as fallback when a projection degenerates
  const Eigen::VectorXd ghat = g / g.norm();
  std::vector<Eigen::VectorXd> cols;
  for (int pass = 0; pass < n && static_cast<int>(cols.size()) < n - 1; ++pass) {
    const int idx = (pass + 1) % n;  // e2, ..., en, e1
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v[idx] = 1.0;
    v -= ghat.dot(v) * ghat;
    for (const Eigen::VectorXd& c : cols) v -= c.dot(v) * c;
    if (v.norm() < 0.1) continue;
    cols.push_back(v / v.norm());
  }
  if (static_cast<int>(cols.size()) != n - 1) throw std::runtime_error("tangent_basis: kernel basis not found");

  // order columns by dominant coordinate, signs toward +identity
  std::sort(cols.begin(), cols.end(), [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    int ia, ib;
    a.cwiseAbs().maxCoeff(&ia);
    b.cwiseAbs().maxCoeff(&ib);
    return ia < ib;
  });
  Eigen::MatrixXd A(n, n - 1);
  for (int i = 0; i < n - 1; ++i) {
    int dom;
    cols[i].cwiseAbs().maxCoeff(&dom);
    A.col(i) = cols[i][dom] < 0 ? -cols[i] : cols[i];
  }
  return A;
}

// ---------------------------------------------------------------------------
// ray grids and conjugate loci
// ---------------------------------------------------------------------------

RayGrid circle_ray_grid(int count) {
  RayGrid grid;
  grid.n_theta = count;
  grid.n_phi = 0;
  for (int i = 0; i < count; ++i) {
    const double th = 2.0 * M_PI * i / count;
    Eigen::VectorXd rho(2);
    rho << std::cos(th), std::sin(th);
    grid.rho.push_back(rho);
    grid.grid_index.push_back({i, 0});
  }
  return grid;
}

RayGrid sphere_ray_grid(int n_theta, int n_phi, double theta_lo, double theta_hi, double phi_lo, double phi_hi) {
  RayGrid grid;
  grid.n_theta = n_theta;
  grid.n_phi = n_phi;
  for (int i = 0; i < n_theta; ++i)
    for (int j = 0; j < n_phi; ++j) {
      const double th = theta_lo + (theta_hi - theta_lo) * (n_theta == 1 ? 0.5 : double(i) / (n_theta - 1));
      const double ph = phi_lo + (phi_hi - phi_lo) * (n_phi == 1 ? 0.5 : double(j) / (n_phi - 1));
      Eigen::VectorXd rho(3);
      rho << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
      grid.rho.push_back(rho);
      grid.grid_index.push_back({i, j});
    }
  return grid;
}

namespace {

int corank_of(const Eigen::VectorXd& singular_values, double tol = 1e-6) {
  double smax = singular_values.size() > 0 ? singular_values.maxCoeff() : 0.0;
  if (smax == 0.0) smax = 1.0;
  int c = 0;
  for (int i = 0; i < singular_values.size(); ++i)
    if (singular_values[i] <= tol * smax) ++c;
  return c;
}

struct ReducedMonitor {
  const Eigen::MatrixXd* A;
  int drop;
  int n;

  Eigen::MatrixXd reduced(const Eigen::MatrixXd& V) const {
    const Eigen::MatrixXd DpQ = V.topRightCorner(n, n);
    Eigen::MatrixXd full = DpQ * (*A);  // n x (n-1)
    Eigen::MatrixXd R(n - 1, n - 1);
    int r = 0;
    for (int i = 0; i < n; ++i) {
      if (i == drop) continue;
      R.row(r++) = full.row(i);
    }
    return R;
  }
};

}  // namespace

double default_max_arc(const Hypersurface& surface, const Eigen::VectorXd& q_star) {
  const double gn = surface.grad_value(q_star).norm();
  const double hn = surface.hess(q_star).operatorNorm();
  const double curvature_proxy = std::max(hn / std::max(gn, 1e-12), 1e-6);
  return 1.2 * M_PI / std::sqrt(curvature_proxy);
}

ConjugateLocus conjugate_locus(const Hypersurface& surface, const Eigen::VectorXd& q_star_in, const RayGrid& grid,
                               double h, double max_arc) {
  ConjugateLocus locus;
  locus.q_star = surface.project(q_star_in);
  locus.A = tangent_basis(surface, locus.q_star);
  locus.grid = grid;
  locus.h = h;
  locus.max_arc = max_arc;
  const int n = surface.dim_ambient();

  const Eigen::VectorXd g_star = surface.grad_value(locus.q_star);
  const Eigen::VectorXd nhat_star = g_star / g_star.norm();

  locus.rays.resize(grid.rho.size());
  parallel_for(static_cast<long>(grid.rho.size()), [&](long ri) {
    RayResult rr;
    rr.rho = grid.rho[ri];
    Eigen::VectorXd p0 = locus.A * rr.rho;
    p0 -= nhat_star.dot(p0) * nhat_star;
    p0.normalize();

    JetRattleState js = JetRattleState::initial({locus.q_star, p0});
    double lam = 0.0;

    // output chart: drop the ambient coordinate with the largest gradient
    // component at the current endpoint
    auto monitor_at = [&](const JetRattleState& st) {
      int drop;
      surface.grad_value(st.state.q).cwiseAbs().maxCoeff(&drop);
      ReducedMonitor mon{&locus.A, drop, n};
      return std::pair<double, Eigen::MatrixXd>(mon.reduced(st.V).determinant(), mon.reduced(st.V));
    };

    double prev_det = 0.0;
    bool have_prev = false;
    JetRattleState prev = js;
    double prev_lam = lam;
    const int max_steps = static_cast<int>(std::ceil(max_arc / h));
    for (int k = 1; k <= max_steps; ++k) {
      prev = js;
      prev_lam = lam;
      js = jet_rattle_step(surface, js, h, &lam);
      const auto [det, R] = monitor_at(js);
      if (have_prev && prev_det != 0.0 && det * prev_det < 0.0) {
        // secant refinement in the arc parameter from the stored state
        double s_lo = 0.0, d_lo = prev_det;
        double s_hi = h, d_hi = det;
        JetRattleState at_best = js;
        double s_best = h;
        for (int it = 0; it < 80; ++it) {
          double s_mid = s_hi - d_hi * (s_hi - s_lo) / (d_hi - d_lo);
          if (!(s_mid > 0.0 && s_mid < h)) s_mid = 0.5 * (s_lo + s_hi);
          double lam_try = prev_lam;
          JetRattleState trial = jet_rattle_step(surface, prev, s_mid, &lam_try);
          const auto [dm, Rm] = monitor_at(trial);
          at_best = trial;
          s_best = s_mid;
          if (std::abs(dm) < 1e-9) break;
          if (dm * d_lo < 0.0) {
            s_hi = s_mid;
            d_hi = dm;
          } else {
            s_lo = s_mid;
            d_lo = dm;
          }
        }
        const auto [df, Rf] = monitor_at(at_best);
        rr.degenerate = true;
        rr.arc = (k - 1) * h + s_best;
        rr.endpoint = at_best.state.q;
        rr.det_residual = df;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Rf);
        const Eigen::VectorXd s = svd.singularValues();
        rr.corank = corank_of(s);
        rr.sigma_ratio = s.size() >= 2 && s[0] > 0 ? s[s.size() - 2] / s[0] : 1.0;
        break;
      }
      prev_det = det;
      have_prev = true;
    }
    locus.rays[ri] = rr;
  });

  // cusp candidates on circle grids: strict extrema of the degeneracy arc
  // with a chord reversal of the locus curve, confirmed at corank 1
  if (grid.n_phi == 0 && grid.n_theta >= 5) {
    const int m = grid.n_theta;
    auto ray = [&](int i) -> const RayResult& { return locus.rays[((i % m) + m) % m]; };
    for (int i = 0; i < m; ++i) {
      const RayResult& c = ray(i);
      const RayResult& l = ray(i - 1);
      const RayResult& r = ray(i + 1);
      if (!c.degenerate || !l.degenerate || !r.degenerate) continue;
      const bool is_max = c.arc > l.arc && c.arc > r.arc;
      const bool is_min = c.arc < l.arc && c.arc < r.arc;
      if (!is_max && !is_min) continue;
      const Eigen::VectorXd chord_in = c.endpoint - l.endpoint;
      const Eigen::VectorXd chord_out = r.endpoint - c.endpoint;
      if (chord_in.dot(chord_out) >= 0.0) continue;  // tangent must turn
      if (c.corank != 1) continue;
      locus.cusp_rays.push_back(i);
    }
  }
  if (!locus.rays.empty()) {
    int drop;
    surface.grad_value(locus.rays.front().degenerate ? locus.rays.front().endpoint : locus.q_star)
        .cwiseAbs()
        .maxCoeff(&drop);
    locus.drop_coordinate = drop;
  }
  return locus;
}

}  // namespace hambvp
