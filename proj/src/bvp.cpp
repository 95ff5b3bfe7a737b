#include "hambvp/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "hambvp/parallel.hpp"

namespace hambvp {

std::string tag_name(PointTag t) {
  switch (t) {
    case PointTag::regular: return "regular";
    case PointTag::fold: return "fold";
    case PointTag::cusp_candidate: return "cusp_candidate";
    case PointTag::umbilic_candidate: return "umbilic_candidate";
  }
  return "?";
}

size_t BifurcationDiagram::total_points() const {
  size_t n = 0;
  for (const Branch& b : branches) n += b.points.size();
  return n;
}

Eigen::VectorXd bvp_start_state(const SeparatedBVP& bvp, const Eigen::VectorXd& y) {
  return bvp.start_base + bvp.start_chart * y;
}

ResidualEval residual_eval(const SeparatedBVP& bvp, const FlowSpec& spec, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& mu, bool with_jac, bool with_mu_jac) {
  const int n = bvp.n;
  const int m_mu = with_mu_jac ? static_cast<int>(mu.size()) : 0;
  const int m = with_jac ? n + m_mu : 0;

  JetVec yj;
  yj.reserve(n);
  for (int i = 0; i < n; ++i) yj.push_back(with_jac ? Jet::seeded(y[i], m, i) : Jet(y[i]));
  JetVec muj;
  muj.reserve(mu.size());
  for (int i = 0; i < mu.size(); ++i)
    muj.push_back(with_mu_jac ? Jet::seeded(mu[i], m, n + i) : Jet(mu[i]));

  // z0 = start_base + start_chart * y in jet arithmetic
  JetVec z0;
  z0.reserve(2 * n);
  for (int i = 0; i < 2 * n; ++i) {
    Jet zi(bvp.start_base[i]);
    for (int j = 0; j < n; ++j)
      if (bvp.start_chart(i, j) != 0.0) zi += bvp.start_chart(i, j) * yj[j];
    z0.push_back(zi);
  }

  JetVec z_tau;
  if (const auto* map = bvp.map()) {
    z_tau = (*map)->apply(z0, muj);
  } else {
    z_tau = flow_jets(**bvp.system(), z0, muj, spec);
  }

  JetVec rj;
  rj.reserve(n);
  for (int i = 0; i < n; ++i) {
    Jet ri(-bvp.end_target[i]);
    for (int j = 0; j < 2 * n; ++j)
      if (bvp.end_selector(i, j) != 0.0) ri += bvp.end_selector(i, j) * z_tau[j];
    rj.push_back(ri);
  }

  ResidualEval out;
  out.r = values_of(rj);
  if (with_jac) {
    const Eigen::MatrixXd full = partials_of(rj, m);
    out.J_y = full.leftCols(n);
    if (with_mu_jac) out.J_mu = full.rightCols(m_mu);
  }
  return out;
}

Eigen::VectorXd residual(const SeparatedBVP& bvp, const FlowSpec& spec, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& mu) {
  return residual_eval(bvp, spec, y, mu, false).r;
}

ShootResult shoot(const SeparatedBVP& bvp, const FlowSpec& spec, const Eigen::VectorXd& mu,
                  const Eigen::VectorXd& y0) {
  constexpr double kTol = 1e-10;
  constexpr int kMaxIter = 40;
  constexpr int kMaxHalvings = 8;
  constexpr double kCondLimit = 1e14;

  ShootResult res;
  Eigen::VectorXd y = y0;
  double norm;
  try {
    norm = residual(bvp, spec, y, mu).norm();
  } catch (const std::exception& e) {
    res.message = std::string("flow failure at start: ") + e.what();
    res.point.mu = mu;
    res.point.y = y;
    res.point.z_full = bvp_start_state(bvp, y);
    res.final_norm = std::numeric_limits<double>::infinity();
    return res;
  }
  Eigen::VectorXd best_y = y;
  double best_norm = norm;

  for (int it = 0; it < kMaxIter; ++it) {
    ResidualEval ev;
    try {
      ev = residual_eval(bvp, spec, y, mu, true);
    } catch (const std::exception& e) {
      res.message = std::string("flow failure: ") + e.what();
      break;
    }
    norm = ev.r.norm();
    if (norm < best_norm) {
      best_norm = norm;
      best_y = y;
    }
    if (norm < kTol) {
      res.converged = true;
      res.iterations = it;
      break;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ev.J_y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    res.condition = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(res.condition < kCondLimit)) {
      res.message = "singular shooting Jacobian (condition " + std::to_string(res.condition) + ")";
      break;
    }
    const Eigen::VectorXd step = svd.solve(-ev.r);

    // step halving when the residual does not decrease
    double lambda = 1.0;
    bool accepted = false;
    for (int halv = 0; halv <= kMaxHalvings; ++halv) {
      const Eigen::VectorXd y_trial = y + lambda * step;
      double trial_norm;
      try {
        trial_norm = residual(bvp, spec, y_trial, mu).norm();
      } catch (const std::exception&) {
        lambda *= 0.5;
        continue;
      }
      if (trial_norm < norm || trial_norm < kTol) {
        y = y_trial;
        norm = trial_norm;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      res.message = "damped Newton stalled";
      break;
    }
    if (norm < kTol) {
      res.converged = true;
      res.iterations = it + 1;
    }
  }

  if (!res.converged && norm >= best_norm) y = best_y;
  ResidualEval fin;
  try {
    fin = residual_eval(bvp, spec, y, mu, true);
  } catch (const std::exception& e) {
    res.message = std::string("flow failure: ") + e.what();
    res.point.mu = mu;
    res.point.y = y;
    res.point.z_full = bvp_start_state(bvp, y);
    res.final_norm = std::numeric_limits<double>::infinity();
    res.converged = false;
    return res;
  }
  res.final_norm = fin.r.norm();
  res.converged = res.converged || res.final_norm < kTol;
  res.point.mu = mu;
  res.point.y = y;
  res.point.z_full = bvp_start_state(bvp, y);
  res.point.residual_norm = res.final_norm;
  res.point.det_Dy = fin.J_y.determinant();
  return res;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

namespace {

std::vector<BranchPoint> dedupe(std::vector<BranchPoint> pts, double tol) {
  std::sort(pts.begin(), pts.end(), [](const BranchPoint& a, const BranchPoint& b) {
    for (int i = 0; i < a.y.size(); ++i)
      if (a.y[i] != b.y[i]) return a.y[i] < b.y[i];
    return false;
  });
  std::vector<BranchPoint> out;
  for (const BranchPoint& p : pts) {
    bool dup = false;
    for (const BranchPoint& q : out)
      if ((p.y - q.y).norm() < tol) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(p);
  }
  return out;
}

/// Greedy nearest-neighbour matching between branch tails and the next
/// cell's roots; returns pairs (tail index, point index).
std::vector<std::pair<int, int>> match_cells(const std::vector<Eigen::VectorXd>& tails,
                                             const std::vector<BranchPoint>& pts, double bound) {
  struct Cand {
    double d;
    int t, p;
  };
  std::vector<Cand> cands;
  for (int t = 0; t < static_cast<int>(tails.size()); ++t)
    for (int p = 0; p < static_cast<int>(pts.size()); ++p) {
      const double d = (tails[t] - pts[p].y).norm();
      if (d <= bound) cands.push_back({d, t, p});
    }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.d < b.d; });
  std::vector<bool> t_used(tails.size(), false), p_used(pts.size(), false);
  std::vector<std::pair<int, int>> out;
  for (const Cand& c : cands) {
    if (t_used[c.t] || p_used[c.p]) continue;
    t_used[c.t] = p_used[c.p] = true;
    out.push_back({c.t, c.p});
  }
  return out;
}

}  // namespace

BifurcationDiagram sweep(const SeparatedBVP& bvp, const FlowSpec& spec, const SweepConfig& config) {
  if (config.mu_grid.empty() || config.y_starts.empty())
    throw std::invalid_argument("sweep: empty parameter grid or multistart set");

  BifurcationDiagram diag;
  diag.scenario = config.scenario;
  diag.method = method_name(spec.method);
  diag.steps = spec.steps;
  diag.tau = spec.tau;
  diag.source_bvp = std::make_shared<SeparatedBVP>(bvp);
  diag.source_spec = spec;

  const int cells_n = static_cast<int>(config.mu_grid.size());
  std::vector<std::vector<BranchPoint>> cells(cells_n);
  std::vector<std::string> cell_notes(cells_n);

  const Eigen::VectorXd accept_center = config.y_accept_center.size() == bvp.n
                                            ? config.y_accept_center
                                            : Eigen::VectorXd::Zero(bvp.n);
  parallel_for(cells_n, [&](long ci) {
    const Eigen::VectorXd& mu = config.mu_grid[ci];
    std::vector<BranchPoint> roots;
    int failures = 0;
    for (const Eigen::VectorXd& y0 : config.y_starts) {
      ShootResult sr = shoot(bvp, spec, mu, y0);
      if (sr.converged) {
        if ((sr.point.y - accept_center).norm() <= config.y_accept_radius) roots.push_back(sr.point);
      } else {
        ++failures;
      }
    }
    cells[ci] = dedupe(std::move(roots), config.dedupe_tol);
    if (failures > 0)
      cell_notes[ci] = "cell " + std::to_string(ci) + ": " + std::to_string(failures) + " start(s) not converged";
  });

  for (const std::string& note : cell_notes)
    if (!note.empty()) diag.notes.push_back(note);

  // Pass 1: provisional nearest-neighbour displacements to set the jump bound.
  std::vector<double> displacements;
  for (int ci = 0; ci + 1 < cells_n; ++ci)
    for (const BranchPoint& a : cells[ci]) {
      double best = std::numeric_limits<double>::infinity();
      for (const BranchPoint& b : cells[ci + 1]) best = std::min(best, (a.y - b.y).norm());
      if (std::isfinite(best)) displacements.push_back(best);
    }
  double bound = std::numeric_limits<double>::infinity();
  if (!displacements.empty()) {
    std::nth_element(displacements.begin(), displacements.begin() + displacements.size() / 2, displacements.end());
    const double median = displacements[displacements.size() / 2];
    bound = std::max(config.jump_factor * median, 1e-12);
  }

  // Pass 2: link.
  std::vector<Branch> open;
  for (int ci = 0; ci < cells_n; ++ci) {
    std::vector<Eigen::VectorXd> tails;
    tails.reserve(open.size());
    for (const Branch& b : open) tails.push_back(b.points.back().y);
    const auto matches = match_cells(tails, cells[ci], bound);
    std::vector<bool> tail_matched(open.size(), false), pt_matched(cells[ci].size(), false);
    for (const auto& [t, p] : matches) {
      open[t].points.push_back(cells[ci][p]);
      tail_matched[t] = true;
      pt_matched[p] = true;
    }
    std::vector<Branch> still_open;
    for (size_t t = 0; t < open.size(); ++t) {
      if (tail_matched[t])
        still_open.push_back(std::move(open[t]));
      else
        diag.branches.push_back(std::move(open[t]));
    }
    open = std::move(still_open);
    for (size_t p = 0; p < cells[ci].size(); ++p)
      if (!pt_matched[p]) open.push_back(Branch{{cells[ci][p]}});
  }
  for (Branch& b : open) diag.branches.push_back(std::move(b));

  // Deterministic branch order: by first point's mu then y.
  std::sort(diag.branches.begin(), diag.branches.end(), [](const Branch& a, const Branch& b) {
    const BranchPoint& pa = a.points.front();
    const BranchPoint& pb = b.points.front();
    for (int i = 0; i < pa.mu.size(); ++i)
      if (pa.mu[i] != pb.mu[i]) return pa.mu[i] < pb.mu[i];
    for (int i = 0; i < pa.y.size(); ++i)
      if (pa.y[i] != pb.y[i]) return pa.y[i] < pb.y[i];
    return a.points.size() < b.points.size();
  });
  return diag;
}

// ---------------------------------------------------------------------------
// continuation
// ---------------------------------------------------------------------------

namespace {

/// Tangent of the solution curve: unit kernel vector of [J_y | r_mu].
Eigen::VectorXd branch_tangent(const ResidualEval& ev, int mu_index) {
  const int n = static_cast<int>(ev.r.size());
  Eigen::MatrixXd A(n, n + 1);
  A.leftCols(n) = ev.J_y;
  A.col(n) = ev.J_mu.col(mu_index);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  Eigen::VectorXd t = svd.matrixV().col(n);
  return t / t.norm();
}

double det_at(const SeparatedBVP& bvp, const FlowSpec& spec, const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  return residual_eval(bvp, spec, y, mu, true).J_y.determinant();
}

}  // namespace

std::optional<BranchPoint> fold_polish(const SeparatedBVP& bvp, const FlowSpec& spec, const BranchPoint& near,
                                       int mu_index) {
  const int n = bvp.n;
  Eigen::VectorXd u(n + 1);
  u.head(n) = near.y;
  u[n] = near.mu[mu_index];
  Eigen::VectorXd mu = near.mu;

  const double fd = 1e-6;
  for (int it = 0; it < 60; ++it) {
    mu[mu_index] = u[n];
    ResidualEval ev;
    try {
      ev = residual_eval(bvp, spec, u.head(n), mu, true, true);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    const double det = ev.J_y.determinant();
    Eigen::VectorXd F(n + 1);
    F.head(n) = ev.r;
    F[n] = det;
    if (ev.r.norm() < 1e-11 && std::abs(det) < 1e-11) {
      BranchPoint bp;
      bp.mu = mu;
      bp.y = u.head(n);
      bp.z_full = bvp_start_state(bvp, bp.y);
      bp.tag = PointTag::fold;
      bp.residual_norm = ev.r.norm();
      bp.det_Dy = det;
      return bp;
    }

    Eigen::MatrixXd J(n + 1, n + 1);
    J.topLeftCorner(n, n) = ev.J_y;
    J.topRightCorner(n, 1) = ev.J_mu.col(mu_index);
    try {
      for (int k = 0; k <= n; ++k) {
        Eigen::VectorXd up = u, um = u;
        const double h = fd * (1.0 + std::abs(u[k]));
        up[k] += h;
        um[k] -= h;
        Eigen::VectorXd mup = mu, mum = mu;
        mup[mu_index] = up[n];
        mum[mu_index] = um[n];
        const double dp = det_at(bvp, spec, up.head(n), mup);
        const double dm = det_at(bvp, spec, um.head(n), mum);
        J(n, k) = (dp - dm) / (2.0 * h);
      }
    } catch (const std::exception&) {
      return std::nullopt;
    }
    const Eigen::VectorXd step = J.partialPivLu().solve(-F);
    u += step;
    if (step.norm() < 1e-14 * (1.0 + u.norm())) {
      // stagnation; fall through to final check on next iteration
    }
  }
  return std::nullopt;
}

Branch continue_branch(const SeparatedBVP& bvp, const FlowSpec& spec, const BranchPoint& seed,
                       const ContinuationConfig& config, std::string* stop_reason) {
  Branch branch;
  branch.points.push_back(seed);
  std::string reason = "max points reached";

  Eigen::VectorXd mu = seed.mu;
  Eigen::VectorXd u(bvp.n + 1);
  u.head(bvp.n) = seed.y;
  u[bvp.n] = seed.mu[config.mu_index];

  ResidualEval ev;
  try {
    ev = residual_eval(bvp, spec, u.head(bvp.n), mu, true, true);
  } catch (const std::exception& e) {
    if (stop_reason) *stop_reason = std::string("seed evaluation failed: ") + e.what();
    return branch;
  }
  Eigen::VectorXd tangent = branch_tangent(ev, config.mu_index);
  if (tangent[bvp.n] < 0) tangent = -tangent;  // start towards increasing mu
  double prev_det = ev.J_y.determinant();

  double ds = config.ds;
  for (int pt = 0; pt < config.max_points; ++pt) {
    bool accepted = false;
    Eigen::VectorXd u_new;
    ResidualEval ev_new;
    while (!accepted) {
      const Eigen::VectorXd pred = u + ds * tangent;
      // corrector: Newton on [r; t^T (u - pred)] = 0
      Eigen::VectorXd w = pred;
      bool ok = false;
      for (int it = 0; it < 25; ++it) {
        mu[config.mu_index] = w[bvp.n];
        ResidualEval e;
        try {
          e = residual_eval(bvp, spec, w.head(bvp.n), mu, true, true);
        } catch (const std::exception&) {
          break;
        }
        Eigen::VectorXd F(bvp.n + 1);
        F.head(bvp.n) = e.r;
        F[bvp.n] = tangent.dot(w - pred);
        if (F.norm() < 1e-10) {
          ok = true;
          u_new = w;
          ev_new = e;
          break;
        }
        Eigen::MatrixXd J(bvp.n + 1, bvp.n + 1);
        J.topLeftCorner(bvp.n, bvp.n) = e.J_y;
        J.topRightCorner(bvp.n, 1) = e.J_mu.col(config.mu_index);
        J.row(bvp.n) = tangent.transpose();
        w += J.partialPivLu().solve(-F);
      }
      if (ok) {
        accepted = true;
      } else {
        ds *= 0.5;
        if (ds < config.ds_min) {
          reason = "corrector failed at minimal step size";
          if (stop_reason) *stop_reason = reason;
          return branch;
        }
      }
    }

    mu[config.mu_index] = u_new[bvp.n];
    BranchPoint bp;
    bp.mu = mu;
    bp.y = u_new.head(bvp.n);
    bp.z_full = bvp_start_state(bvp, bp.y);
    bp.residual_norm = ev_new.r.norm();
    bp.det_Dy = ev_new.J_y.determinant();

    Eigen::VectorXd tangent_new = branch_tangent(ev_new, config.mu_index);
    if (tangent_new.dot(tangent) < 0) tangent_new = -tangent_new;

    // fold: mu-component of the tangent changes sign
    if (tangent_new[bvp.n] * tangent[bvp.n] < 0) {
      bp.tag = PointTag::fold;
      if (config.polish_folds) {
        if (auto polished = fold_polish(bvp, spec, bp, config.mu_index)) {
          polished->tag = PointTag::fold;
          branch.points.push_back(*polished);
        }
      }
    }
    // cross-check marker: det sign change along the branch
    if (bp.tag == PointTag::regular && prev_det * bp.det_Dy < 0 && branch.points.back().tag != PointTag::fold)
      bp.tag = PointTag::fold;
    prev_det = bp.det_Dy;

    branch.points.push_back(bp);
    u = u_new;
    tangent = tangent_new;
    if (ds < config.ds_max) ds = std::min(config.ds_max, ds * 1.5);

    if (u[bvp.n] < config.mu_min || u[bvp.n] > config.mu_max) {
      reason = "parameter bound reached";
      break;
    }
  }
  if (stop_reason) *stop_reason = reason;
  return branch;
}

// ---------------------------------------------------------------------------
// pitchfork break
// ---------------------------------------------------------------------------

BreakResult pitchfork_break(const BifurcationDiagram& diagram, const BreakWindow& window,
                            const Eigen::MatrixXd* y_metric) {
  BreakResult out;
  if (!diagram.source_bvp) {
    out.message = "diagram carries no source problem";
    return out;
  }
  const SeparatedBVP& bvp = *diagram.source_bvp;
  const FlowSpec& spec = diagram.source_spec;
  const int mi = window.mu_index;
  const int n = bvp.n;
  auto metric_norm = [&](const Eigen::VectorXd& d) { return y_metric ? (*y_metric * d).norm() : d.norm(); };

  // Parameter extent of the diagram, for interior-endpoint detection.
  double mu_lo = std::numeric_limits<double>::infinity(), mu_hi = -mu_lo;
  for (const Branch& b : diagram.branches)
    for (const BranchPoint& p : b.points) {
      mu_lo = std::min(mu_lo, p.mu[mi]);
      mu_hi = std::max(mu_hi, p.mu[mi]);
    }
  const double margin = 1e-9 + 1e-3 * (mu_hi - mu_lo);

  // Fold candidates: tagged points, branch turning points in mu, and branches
  // that die in the interior of the swept range (the fold pair of a swept
  // diagram shows up as two arms ending mid-grid).
  std::vector<BranchPoint> cands;
  for (const Branch& b : diagram.branches) {
    for (const BranchPoint& p : b.points)
      if (p.tag == PointTag::fold && p.mu[mi] >= window.mu_min && p.mu[mi] <= window.mu_max) cands.push_back(p);
    for (size_t i = 1; i + 1 < b.points.size(); ++i) {
      const double m0 = b.points[i - 1].mu[mi], m1 = b.points[i].mu[mi], m2 = b.points[i + 1].mu[mi];
      if ((m1 - m0) * (m2 - m1) < 0 && m1 >= window.mu_min && m1 <= window.mu_max) cands.push_back(b.points[i]);
    }
    for (const BranchPoint* end : {&b.points.front(), &b.points.back()}) {
      const double m = end->mu[mi];
      if (m > mu_lo + margin && m < mu_hi - margin && m >= window.mu_min && m <= window.mu_max)
        cands.push_back(*end);
    }
  }
  if (cands.empty()) {
    out.message = "window contains no fold";
    return out;
  }

  // Polish candidates; keep distinct folds inside the window that stayed
  // local to their seeds.
  std::vector<BranchPoint> folds;
  for (const BranchPoint& c : cands) {
    auto polished = fold_polish(bvp, spec, c, mi);
    if (!polished) continue;
    if (polished->mu[mi] < window.mu_min || polished->mu[mi] > window.mu_max) continue;
    if ((polished->y - c.y).norm() > window.y_radius) continue;
    bool dup = false;
    for (const BranchPoint& f : folds)
      if (std::abs(f.mu[mi] - polished->mu[mi]) < 1e-7 && (f.y - polished->y).norm() < 1e-7) dup = true;
    if (!dup) folds.push_back(*polished);
  }
  if (folds.empty()) {
    out.message = "window contains no polishable fold";
    return out;
  }

  double best = std::numeric_limits<double>::infinity();
  for (const BranchPoint& fold : folds) {
    const double mu_f = fold.mu[mi];

    // Work in pulled-back coordinates y_hat = W y when a metric is given, so
    // that measurements commute exactly with linear coordinate changes.
    const Eigen::MatrixXd W = y_metric ? *y_metric : Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd W_inv = y_metric ? Eigen::MatrixXd(W.partialPivLu().inverse()) : W;

    // noise radius of the double root from the quadratic/cubic coefficients
    // of the residual along the kernel
    ResidualEval ev_f;
    try {
      ev_f = residual_eval(bvp, spec, fold.y, fold.mu, true);
    } catch (const std::exception&) {
      continue;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ev_f.J_y * W_inv, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd v_hat = svd.matrixV().col(n - 1);
    const Eigen::VectorXd w_left = svd.matrixU().col(n - 1);
    const Eigen::VectorXd dv = W_inv * v_hat;  // unit step in the metric
    const double delta = 1e-3;
    auto g = [&](double t) { return w_left.dot(residual(bvp, spec, fold.y + t * dv, fold.mu)); };
    const double g0 = w_left.dot(ev_f.r);
    double gp, gm, gpp, gmm;
    try {
      gp = g(delta);
      gm = g(-delta);
      gpp = g(2 * delta);
      gmm = g(-2 * delta);
    } catch (const std::exception&) {
      continue;
    }
    const double c2 = std::abs(gp - 2.0 * g0 + gm) / (delta * delta);
    const double c3 = std::abs(gpp - 2.0 * gp + 2.0 * gm - gmm) / (2.0 * delta * delta * delta);
    const double tol = 1e-10;
    const double r_noise =
        std::max({std::sqrt(tol / std::max(c2, 1e-4)), std::cbrt(tol / std::max(c3, 1e-4)), 1e-9});
    out.noise_floor = std::max(out.noise_floor, 3.0 * r_noise);

    // candidate starts for the continuing solution at mu_f
    std::vector<Eigen::VectorXd> starts;
    for (const Branch& b : diagram.branches)
      for (size_t i = 0; i + 1 < b.points.size(); ++i) {
        const double a = b.points[i].mu[mi], c = b.points[i + 1].mu[mi];
        if ((a - mu_f) * (c - mu_f) >= 0 || a == c) continue;
        const double t = (mu_f - a) / (c - a);
        starts.push_back((1 - t) * b.points[i].y + t * b.points[i + 1].y);
      }
    const double r_hi = std::min(window.y_radius, 1.0);
    std::vector<Eigen::VectorXd> dirs;  // unit directions in the metric
    if (n == 1) {
      dirs.push_back(W_inv.col(0) / W_inv.col(0).norm() * (W_inv(0, 0) >= 0 ? 1.0 : -1.0));
      dirs.push_back(-dirs[0]);
    } else {
      const Eigen::VectorXd u_hat = svd.matrixV().col(0);
      for (int k = 0; k < 8; ++k) {
        Eigen::VectorXd d_hat = std::cos(2 * M_PI * k / 8.0) * v_hat + std::sin(2 * M_PI * k / 8.0) * u_hat;
        dirs.push_back(W_inv * d_hat);
      }
    }
    for (double r = r_hi; r > std::max(4.0 * r_noise, 1e-8); r *= 0.25)
      for (const Eigen::VectorXd& d : dirs) starts.push_back(fold.y + r * d);

    for (const Eigen::VectorXd& y0 : starts) {
      ShootResult sr;
      try {
        sr = shoot(bvp, spec, fold.mu, y0);
      } catch (const std::exception&) {
        continue;
      }
      if (!sr.converged) continue;
      const double gap = metric_norm(sr.point.y - fold.y);
      if (gap <= 3.0 * r_noise) continue;        // inside the double-root blur
      if (gap > window.y_radius) continue;       // unrelated solution far away
      if (gap < best) {
        best = gap;
        out.fold_mu = fold.mu;
        out.fold_y = fold.y;
        out.continuing_y = sr.point.y;
      }
    }
    if (!std::isfinite(best) && out.fold_mu.size() == 0) {
      out.fold_mu = fold.mu;
      out.fold_y = fold.y;
    }
  }

  out.ok = true;
  if (!std::isfinite(best)) {
    // no solution distinct from the fold pair: perfect pitchfork at this
    // measurement resolution
    out.value = 0.0;
    out.continuing_y = out.fold_y;
    out.message = "no distinct continuing solution above the noise floor";
  } else {
    out.value = best;
  }
  return out;
}

double verify_diagram(const SeparatedBVP& bvp, const FlowSpec& spec, const BifurcationDiagram& diagram) {
  double worst = 0.0;
  for (const Branch& b : diagram.branches)
    for (const BranchPoint& p : b.points) {
      if (p.tag == PointTag::fold && p.residual_norm == 0.0) continue;
      worst = std::max(worst, residual(bvp, spec, p.y, p.mu).norm());
    }
  return worst;
}

}  // namespace hambvp
