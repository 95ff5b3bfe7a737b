#include "hambvp/singular.hpp"

#include <algorithm>
#include <cmath>

#include "hambvp/parallel.hpp"

namespace hambvp {

int corank(const Eigen::MatrixXd& M, double tol, double reference_scale) {
  if (tol <= 0.0 || tol >= 1.0) throw std::invalid_argument("corank: tol must lie in (0,1)");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const Eigen::VectorXd s = svd.singularValues();
  double smax = s.size() > 0 ? s.maxCoeff() : 0.0;
  smax = std::max(smax, reference_scale);
  if (smax == 0.0) smax = 1.0;  // zero matrix: full corank
  int c = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] <= tol * smax) ++c;
  return c;
}

Eigen::MatrixXd dirichlet_jac(const SeparatedBVP& bvp, const FlowSpec& spec, double x2, const Eigen::Vector2d& y,
                              Eigen::VectorXd* phiX) {
  if (bvp.n != 2) throw std::invalid_argument("dirichlet_jac: requires n = 2");
  SeparatedBVP local = bvp;
  local.start_base[1] = x2;
  const ResidualEval ev = residual_eval(local, spec, y, local.default_mu(), true);
  if (phiX) *phiX = ev.r + local.end_target;
  return ev.J_y;
}

SingularPoint locate_umbilic(const SeparatedBVP& bvp, const FlowSpec& spec, const Eigen::Vector3d& seed) {
  if (bvp.n != 2) throw std::invalid_argument("locate_umbilic: requires n = 2 (corank-2 regime)");
  constexpr double kTol = 1e-8;
  constexpr double kFdStep = 1e-5;
  constexpr int kMaxIter = 80;

  auto eval_R = [&](const Eigen::Vector3d& u) -> Eigen::Vector4d {
    const Eigen::MatrixXd J = dirichlet_jac(bvp, spec, u[0], u.tail(2));
    return Eigen::Vector4d(J(0, 0), J(0, 1), J(1, 0), J(1, 1));
  };

  SingularPoint out;
  Eigen::Vector3d u = seed;
  Eigen::Vector4d R = eval_R(u);
  double best_norm = R.norm();
  Eigen::Vector3d best_u = u;
  std::vector<double> history{best_norm};

  int it = 0;
  for (; it < kMaxIter; ++it) {
    if (best_norm < kTol) break;
    // stagnation: relative decrease below 1e-3 over the last 5 iterations
    if (history.size() >= 6) {
      const double then = history[history.size() - 6];
      if (then > 0.0 && (then - best_norm) / then < 1e-3) break;
    }

    Eigen::Matrix<double, 4, 3> JR;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d up = u, um = u;
      up[k] += kFdStep;
      um[k] -= kFdStep;
      JR.col(k) = (eval_R(up) - eval_R(um)) / (2.0 * kFdStep);
    }
    const Eigen::Vector3d step = JR.colPivHouseholderQr().solve(-R);
    u += step;
    R = eval_R(u);
    const double nrm = R.norm();
    if (nrm < best_norm) {
      best_norm = nrm;
      best_u = u;
    }
    history.push_back(best_norm);
  }

  out.location = best_u;
  out.jac = dirichlet_jac(bvp, spec, best_u[0], best_u.tail(2));
  out.residual_frobenius = best_norm;
  out.converged = best_norm < kTol;
  out.iterations = it;
  // the problem scale, not the (possibly vanishing) converged matrix, is the
  // reference for the corank of the located point
  const double seed_scale = dirichlet_jac(bvp, spec, seed[0], seed.tail(2)).operatorNorm();
  out.corank = corank(out.jac, 1e-6, std::max(1.0, seed_scale));
  out.class_hint = out.corank >= 2 ? "D4_candidate" : "unknown";
  return out;
}

Eigen::Vector3d umbilic_seed_scan(const SeparatedBVP& bvp, const FlowSpec& spec, const Eigen::Vector3d& lo,
                                  const Eigen::Vector3d& hi, int per_axis) {
  const long total = static_cast<long>(per_axis) * per_axis * per_axis;
  std::vector<double> norm(total);
  parallel_for(total, [&](long idx) {
    const int i = static_cast<int>(idx % per_axis);
    const int j = static_cast<int>((idx / per_axis) % per_axis);
    const int k = static_cast<int>(idx / (static_cast<long>(per_axis) * per_axis));
    Eigen::Vector3d u;
    u[0] = lo[0] + (hi[0] - lo[0]) * i / (per_axis - 1);
    u[1] = lo[1] + (hi[1] - lo[1]) * j / (per_axis - 1);
    u[2] = lo[2] + (hi[2] - lo[2]) * k / (per_axis - 1);
    const Eigen::MatrixXd J = dirichlet_jac(bvp, spec, u[0], u.tail(2));
    norm[idx] = J.operatorNorm();
  });
  long best = 0;
  for (long idx = 1; idx < total; ++idx)
    if (norm[idx] < norm[best]) best = idx;
  const int i = static_cast<int>(best % per_axis);
  const int j = static_cast<int>((best / per_axis) % per_axis);
  const int k = static_cast<int>(best / (static_cast<long>(per_axis) * per_axis));
  return Eigen::Vector3d(lo[0] + (hi[0] - lo[0]) * i / (per_axis - 1), lo[1] + (hi[1] - lo[1]) * j / (per_axis - 1),
                         lo[2] + (hi[2] - lo[2]) * k / (per_axis - 1));
}

// ---------------------------------------------------------------------------
// level bifurcation set
// ---------------------------------------------------------------------------

namespace {

struct FieldEval {
  double det = 0.0;
  Eigen::MatrixXd J;
  Eigen::VectorXd phiX;
};

struct FieldContext {
  const SeparatedBVP* bvp;
  const FlowSpec* spec;
  const LevelSetSpec* ls;

  FieldEval eval(const Eigen::VectorXd& u) const {
    SeparatedBVP local = *bvp;
    Eigen::VectorXd mu = local.default_mu();
    Eigen::VectorXd y = Eigen::VectorXd::Zero(local.n);
    for (size_t k = 0; k < ls->free_vars.size(); ++k) {
      const FreeVar& fv = ls->free_vars[k];
      switch (fv.kind) {
        case FreeVar::MuComponent: mu[fv.index] = u[k]; break;
        case FreeVar::XStarComponent: local.start_base[fv.index] = u[k]; break;
        case FreeVar::YComponent: y[fv.index] = u[k]; break;
      }
    }
    const ResidualEval ev = residual_eval(local, *spec, y, mu, true);
    FieldEval out;
    out.J = ev.J_y;
    out.det = ev.J_y.determinant();
    out.phiX = ev.r + local.end_target;
    return out;
  }

  Eigen::VectorXd mapped_point(const Eigen::VectorXd& u, const FieldEval& fe) const {
    std::vector<double> coords;
    for (size_t k = 0; k < ls->free_vars.size(); ++k)
      if (ls->free_vars[k].kind != FreeVar::YComponent) coords.push_back(u[k]);
    for (int i = 0; i < fe.phiX.size(); ++i) coords.push_back(fe.phiX[i]);
    return Eigen::Map<Eigen::VectorXd>(coords.data(), coords.size());
  }
};

void validate_bindings(const SeparatedBVP& bvp, const LevelSetSpec& ls) {
  std::vector<bool> y_bound(bvp.n, false);
  for (const FreeVar& fv : ls.free_vars) {
    if (fv.kind == FreeVar::YComponent) {
      if (fv.index < 0 || fv.index >= bvp.n) throw std::invalid_argument("level set: y index out of range");
      y_bound[fv.index] = true;
    }
  }
  for (int i = 0; i < bvp.n; ++i)
    if (!y_bound[i]) throw std::invalid_argument("level set: every shooting variable must be bound to a box axis");
}

}  // namespace

LevelSetResult level_bifurcation_set(const SeparatedBVP& bvp, const FlowSpec& spec, const LevelSetSpec& ls) {
  const int dim = static_cast<int>(ls.free_vars.size());
  if (dim != 2 && dim != 3) throw std::invalid_argument("level set: box dimension must be 2 or 3");
  if (static_cast<int>(ls.resolution.size()) != dim || ls.lo.size() != dim || ls.hi.size() != dim)
    throw std::invalid_argument("level set: inconsistent box specification");
  validate_bindings(bvp, ls);
  FieldContext ctx{&bvp, &spec, &ls};

  LevelSetResult out;
  out.dim = dim;
  out.spec = ls;

  if (dim == 2) {
    GridSpec2 grid{ls.lo.head<2>(), ls.hi.head<2>(), ls.resolution[0], ls.resolution[1]};
    Eigen::MatrixXd field(grid.nx, grid.ny);
    parallel_for(static_cast<long>(grid.nx) * grid.ny, [&](long idx) {
      const int ix = static_cast<int>(idx % grid.nx), iy = static_cast<int>(idx / grid.nx);
      field(ix, iy) = ctx.eval(grid.node(ix, iy)).det;
    });
    out.field.assign(field.data(), field.data() + field.size());
    const std::function<double(const Eigen::Vector2d&)> refine = [&](const Eigen::Vector2d& u) {
      return ctx.eval(u).det;
    };
    out.seg = marching_squares(field, grid, &refine);
    for (const Eigen::Vector2d& v : out.seg.vertices) {
      const FieldEval fe = ctx.eval(v);
      out.mapped.push_back(ctx.mapped_point(v, fe));
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(fe.J);
      const double smax = svd.singularValues().maxCoeff();
      out.vertex_sigma_ratio.push_back(smax > 0 ? svd.singularValues().minCoeff() / smax : 0.0);
      out.vertex_corank.push_back(corank(fe.J, 1e-6, 1.0));
    }
  } else {
    GridSpec3 grid{ls.lo.head<3>(), ls.hi.head<3>(), ls.resolution[0], ls.resolution[1], ls.resolution[2]};
    std::vector<double> field(static_cast<size_t>(grid.nx) * grid.ny * grid.nz);
    parallel_for(static_cast<long>(field.size()), [&](long idx) {
      const int ix = static_cast<int>(idx % grid.nx);
      const int iy = static_cast<int>((idx / grid.nx) % grid.ny);
      const int iz = static_cast<int>(idx / (static_cast<long>(grid.nx) * grid.ny));
      field[idx] = ctx.eval(grid.node(ix, iy, iz)).det;
    });
    out.field = field;
    const std::function<double(const Eigen::Vector3d&)> refine = [&](const Eigen::Vector3d& u) {
      return ctx.eval(u).det;
    };
    out.tri = marching_cubes(field, grid, &refine);
    out.mapped.resize(out.tri.vertices.size());
    out.vertex_sigma_ratio.resize(out.tri.vertices.size());
    out.vertex_corank.resize(out.tri.vertices.size());
    parallel_for(static_cast<long>(out.tri.vertices.size()), [&](long vi) {
      const Eigen::Vector3d& v = out.tri.vertices[vi];
      const FieldEval fe = ctx.eval(v);
      out.mapped[vi] = ctx.mapped_point(v, fe);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(fe.J);
      const double smax = svd.singularValues().maxCoeff();
      out.vertex_sigma_ratio[vi] = smax > 0 ? svd.singularValues().minCoeff() / smax : 0.0;
      out.vertex_corank[vi] = corank(fe.J, 1e-6, 1.0);
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// cusp ridges
// ---------------------------------------------------------------------------

std::vector<CuspRidgePoint> extract_cusp_ridges(const SeparatedBVP& bvp, const FlowSpec& spec,
                                                const LevelSetResult& level_set) {
  if (level_set.dim != 3) throw std::invalid_argument("extract_cusp_ridges: needs a 3d level set");
  const LevelSetSpec& ls = level_set.spec;
  if (ls.free_vars[0].kind == FreeVar::YComponent || ls.free_vars[1].kind != FreeVar::YComponent ||
      ls.free_vars[2].kind != FreeVar::YComponent)
    throw std::invalid_argument("extract_cusp_ridges: expects axes (parameter, y1, y2)");
  FieldContext ctx{&bvp, &spec, &ls};

  const int n0 = ls.resolution[0], n1 = ls.resolution[1], n2 = ls.resolution[2];
  GridSpec2 slice_grid{Eigen::Vector2d(ls.lo[1], ls.lo[2]), Eigen::Vector2d(ls.hi[1], ls.hi[2]), n1, n2};
  const double fd1 = (ls.hi[1] - ls.lo[1]) / (n1 - 1) * 0.5;
  const double fd2 = (ls.hi[2] - ls.lo[2]) / (n2 - 1) * 0.5;

  std::vector<std::vector<CuspRidgePoint>> per_slice(n0);
  parallel_for(n0, [&](long s0) {
    const double u0 = ls.lo[0] + (ls.hi[0] - ls.lo[0]) * s0 / (n0 - 1);
    Eigen::MatrixXd field(n1, n2);
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j)
        field(i, j) = level_set.field[s0 + static_cast<size_t>(n0) * (i + static_cast<size_t>(n1) * j)];
    const Segments2 seg = marching_squares(field, slice_grid, nullptr);
    const auto polylines = chain_polylines(seg);

    auto eval3 = [&](double y1, double y2) {
      Eigen::Vector3d u(u0, y1, y2);
      return ctx.eval(u);
    };

    for (const auto& line : polylines) {
      if (line.size() < 3) continue;
      Eigen::Vector2d v_prev = Eigen::Vector2d::Zero();
      std::vector<double> w(line.size(), 0.0);
      std::vector<bool> valid(line.size(), false);
      std::vector<Eigen::Vector2d> pos(line.size());
      for (size_t k = 0; k < line.size(); ++k) {
        const Eigen::Vector2d x = seg.vertices[line[k]];
        pos[k] = x;
        const FieldEval fe = eval3(x[0], x[1]);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(fe.J, Eigen::ComputeFullV);
        Eigen::Vector2d v = svd.matrixV().col(1);
        if (k > 0 && v.dot(v_prev) < 0) v = -v;
        v_prev = v;
        const double dx = (eval3(x[0] + fd1, x[1]).det - eval3(x[0] - fd1, x[1]).det) / (2 * fd1);
        const double dy = (eval3(x[0], x[1] + fd2).det - eval3(x[0], x[1] - fd2).det) / (2 * fd2);
        w[k] = dx * v[0] + dy * v[1];
        valid[k] = true;
      }
      for (size_t k = 0; k + 1 < line.size(); ++k) {
        if (!valid[k] || !valid[k + 1]) continue;
        if (w[k] == 0.0 || w[k] * w[k + 1] >= 0) continue;
        const double t = w[k] / (w[k] - w[k + 1]);
        const Eigen::Vector2d x = pos[k] + t * (pos[k + 1] - pos[k]);
        per_slice[s0].push_back({Eigen::Vector3d(u0, x[0], x[1]), static_cast<int>(s0)});
      }
    }
  });

  std::vector<CuspRidgePoint> out;
  for (auto& v : per_slice) out.insert(out.end(), v.begin(), v.end());
  return out;
}

int count_ridges_meeting(const std::vector<CuspRidgePoint>& cusps, const Eigen::Vector3d& center, double r_inner,
                         double r_outer, double link_distance) {
  std::vector<Eigen::Vector3d> pts;
  for (const CuspRidgePoint& c : cusps) {
    const double d = (c.location - center).norm();
    if (d >= r_inner && d <= r_outer) pts.push_back(c.location);
  }
  const int np = static_cast<int>(pts.size());
  std::vector<int> comp(np, -1);
  int n_comp = 0;
  for (int i = 0; i < np; ++i) {
    if (comp[i] >= 0) continue;
    // flood fill by link distance
    std::vector<int> stack{i};
    comp[i] = n_comp;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      for (int b = 0; b < np; ++b)
        if (comp[b] < 0 && (pts[a] - pts[b]).norm() <= link_distance) {
          comp[b] = n_comp;
          stack.push_back(b);
        }
    }
    ++n_comp;
  }
  // a component counts as a ridge entering the annulus when it reaches the
  // inner boundary
  int ridges = 0;
  for (int c = 0; c < n_comp; ++c) {
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < np; ++i)
      if (comp[i] == c) dmin = std::min(dmin, (pts[i] - center).norm());
    if (dmin <= r_inner + 2.0 * link_distance) ++ridges;
  }
  return ridges;
}

// ---------------------------------------------------------------------------
// classify_A
// ---------------------------------------------------------------------------

std::string classify_A(const ResidualFn& r, const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                       const Eigen::MatrixXd& J_y) {
  if (corank(J_y) != 1) throw std::invalid_argument("classify_A: requires a corank-1 point");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J_y, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const int last = static_cast<int>(J_y.cols()) - 1;
  const Eigen::VectorXd v = svd.matrixV().col(last);
  const Eigen::VectorXd w = svd.matrixU().col(last);
  const double scale = std::max(1.0, svd.singularValues().maxCoeff());

  const double delta = 1e-3;
  auto g = [&](double t) { return w.dot(r(y + t * v, mu)); };
  const double g0 = g(0.0), gp = g(delta), gm = g(-delta);
  const double c2 = (gp - 2.0 * g0 + gm) / (delta * delta);
  if (std::abs(c2) > 1e-4 * scale) return "A2";
  const double c3 = (g(2 * delta) - 2.0 * gp + 2.0 * gm - g(-2 * delta)) / (2.0 * delta * delta * delta);
  if (std::abs(c3) > 1e-2 * scale) return "A3";
  return "higher";
}

std::string classify_A(const SeparatedBVP& bvp, const FlowSpec& spec, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& mu) {
  const ResidualEval ev = residual_eval(bvp, spec, y, mu, true);
  ResidualFn fn = [&](const Eigen::VectorXd& yy, const Eigen::VectorXd& mm) { return residual(bvp, spec, yy, mm); };
  return classify_A(fn, y, mu, ev.J_y);
}

}  // namespace hambvp
