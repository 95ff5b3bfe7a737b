#include "hambvp/catastrophe.hpp"

#include <cmath>
#include <stdexcept>

namespace hambvp {

CatClass cat_class_from_string(const std::string& s) {
  if (s == "A2") return CatClass::A2;
  if (s == "A3") return CatClass::A3;
  if (s == "A4") return CatClass::A4;
  if (s == "A5") return CatClass::A5;
  if (s == "D4plus") return CatClass::D4plus;
  if (s == "D4minus") return CatClass::D4minus;
  if (s == "D5") return CatClass::D5;
  throw std::invalid_argument("unknown catastrophe class '" + s + "'");
}

std::string cat_class_name(CatClass c) {
  switch (c) {
    case CatClass::A2: return "A2";
    case CatClass::A3: return "A3";
    case CatClass::A4: return "A4";
    case CatClass::A5: return "A5";
    case CatClass::D4plus: return "D4plus";
    case CatClass::D4minus: return "D4minus";
    case CatClass::D5: return "D5";
  }
  return "?";
}

int unfolding_arity(CatClass c) {
  switch (c) {
    case CatClass::A2:
    case CatClass::A3:
    case CatClass::A4:
    case CatClass::A5: return 1;
    default: return 2;
  }
}

int unfolding_codim(CatClass c) {
  switch (c) {
    case CatClass::A2: return 1;
    case CatClass::A3: return 2;
    case CatClass::A4: return 3;
    case CatClass::A5: return 4;
    case CatClass::D4plus:
    case CatClass::D4minus: return 3;
    case CatClass::D5: return 4;
  }
  return 0;
}

namespace {

template <class S>
S unfolding_value_t(CatClass c, const Eigen::VectorXd& mu, const std::vector<S>& z) {
  const S& x = z[0];
  switch (c) {
    case CatClass::A2: return x * x * x + mu[0] * x;
    case CatClass::A3: return x * x * x * x + mu[1] * x * x + mu[0] * x;
    case CatClass::A4: return pow(x, 5) + mu[2] * x * x * x + mu[1] * x * x + mu[0] * x;
    case CatClass::A5: return pow(x, 6) + mu[3] * pow(x, 4) + mu[2] * x * x * x + mu[1] * x * x + mu[0] * x;
    case CatClass::D4plus: {
      const S& y = z[1];
      return x * x * x + x * y * y + mu[2] * (x * x - y * y) + mu[1] * y + mu[0] * x;
    }
    case CatClass::D4minus: {
      const S& y = z[1];
      return x * x * x - x * y * y + mu[2] * (x * x + y * y) + mu[1] * y + mu[0] * x;
    }
    case CatClass::D5: {
      const S& y = z[1];
      return x * x * y + pow(y, 4) + mu[3] * x * x + mu[2] * y * y + mu[1] * y + mu[0] * x;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

Jet unfolding_value_jet(CatClass c, const Eigen::VectorXd& mu, const JetVec& point) {
  if (static_cast<int>(point.size()) != unfolding_arity(c))
    throw std::invalid_argument("unfolding_eval: wrong arity");
  return unfolding_value_t<Jet>(c, mu, point);
}

UnfoldingEval unfolding_eval(CatClass c, const Eigen::VectorXd& mu, const Eigen::VectorXd& point) {
  const int arity = unfolding_arity(c);
  if (point.size() != arity) throw std::invalid_argument("unfolding_eval: wrong arity");
  if (mu.size() != unfolding_codim(c)) throw std::invalid_argument("unfolding_eval: wrong parameter count");
  UnfoldingEval out;
  out.grad.resize(arity);
  out.hess.resize(arity, arity);
  const double x = point[0];
  switch (c) {
    case CatClass::A2:
      out.value = x * x * x + mu[0] * x;
      out.grad[0] = 3 * x * x + mu[0];
      out.hess(0, 0) = 6 * x;
      break;
    case CatClass::A3:
      out.value = std::pow(x, 4) + mu[1] * x * x + mu[0] * x;
      out.grad[0] = 4 * x * x * x + 2 * mu[1] * x + mu[0];
      out.hess(0, 0) = 12 * x * x + 2 * mu[1];
      break;
    case CatClass::A4:
      out.value = std::pow(x, 5) + mu[2] * x * x * x + mu[1] * x * x + mu[0] * x;
      out.grad[0] = 5 * std::pow(x, 4) + 3 * mu[2] * x * x + 2 * mu[1] * x + mu[0];
      out.hess(0, 0) = 20 * x * x * x + 6 * mu[2] * x + 2 * mu[1];
      break;
    case CatClass::A5:
      out.value = std::pow(x, 6) + mu[3] * std::pow(x, 4) + mu[2] * x * x * x + mu[1] * x * x + mu[0] * x;
      out.grad[0] = 6 * std::pow(x, 5) + 4 * mu[3] * x * x * x + 3 * mu[2] * x * x + 2 * mu[1] * x + mu[0];
      out.hess(0, 0) = 30 * std::pow(x, 4) + 12 * mu[3] * x * x + 6 * mu[2] * x + 2 * mu[1];
      break;
    case CatClass::D4plus: {
      const double y = point[1];
      out.value = x * x * x + x * y * y + mu[2] * (x * x - y * y) + mu[1] * y + mu[0] * x;
      out.grad << 3 * x * x + y * y + 2 * mu[2] * x + mu[0], 2 * x * y - 2 * mu[2] * y + mu[1];
      out.hess << 6 * x + 2 * mu[2], 2 * y, 2 * y, 2 * x - 2 * mu[2];
      break;
    }
    case CatClass::D4minus: {
      const double y = point[1];
      out.value = x * x * x - x * y * y + mu[2] * (x * x + y * y) + mu[1] * y + mu[0] * x;
      out.grad << 3 * x * x - y * y + 2 * mu[2] * x + mu[0], -2 * x * y + 2 * mu[2] * y + mu[1];
      out.hess << 6 * x + 2 * mu[2], -2 * y, -2 * y, -2 * x + 2 * mu[2];
      break;
    }
    case CatClass::D5: {
      const double y = point[1];
      out.value = x * x * y + std::pow(y, 4) + mu[3] * x * x + mu[2] * y * y + mu[1] * y + mu[0] * x;
      out.grad << 2 * x * y + 2 * mu[3] * x + mu[0], x * x + 4 * y * y * y + 2 * mu[2] * y + mu[1];
      out.hess << 2 * y + 2 * mu[3], 2 * x, 2 * x, 12 * y * y + 2 * mu[2];
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// VectorUnfolding
// ---------------------------------------------------------------------------

VectorUnfolding::VectorUnfolding(bool plus, int k) : plus_(plus), k_(k) {
  if (k < 2) throw std::invalid_argument("VectorUnfolding: k must be >= 2");
}

Eigen::Vector2d VectorUnfolding::eval(const Eigen::Vector2d& xy, const Eigen::VectorXd& mu) const {
  if (mu.size() != mu_dim()) throw std::invalid_argument("VectorUnfolding: wrong parameter count");
  const double x = xy[0], y = xy[1];
  Eigen::Vector2d f;
  if (k_ == 2) {
    // Basis of the umbilic break analysis: 2 mu3 (-/+ x, y) + mu4 (y, 0).
    if (plus_)
      f << 2 * x * y + mu[0] - 2 * mu[2] * x + mu[3] * y, x * x + 3 * y * y + mu[1] + 2 * mu[2] * y;
    else
      f << -2 * x * y + mu[0] + 2 * mu[2] * x + mu[3] * y, 3 * y * y - x * x + mu[1] + 2 * mu[2] * y;
    return f;
  }
  const double sgn = plus_ ? 1.0 : -1.0;
  f << 2 * x * y + mu[0] + mu[2] * x + mu[3] * y, x * x + sgn * (k_ + 1) * std::pow(y, k_) + mu[1];
  for (int j = 1; j <= k_ - 2; ++j) f[1] += mu[3 + j] * std::pow(y, j);
  return f;
}

Eigen::Matrix2d VectorUnfolding::jac(const Eigen::Vector2d& xy, const Eigen::VectorXd& mu) const {
  if (mu.size() != mu_dim()) throw std::invalid_argument("VectorUnfolding: wrong parameter count");
  const double x = xy[0], y = xy[1];
  Eigen::Matrix2d J;
  if (k_ == 2) {
    if (plus_)
      J << 2 * y - 2 * mu[2], 2 * x + mu[3], 2 * x, 6 * y + 2 * mu[2];
    else
      J << -2 * y + 2 * mu[2], -2 * x + mu[3], -2 * x, 6 * y + 2 * mu[2];
    return J;
  }
  const double sgn = plus_ ? 1.0 : -1.0;
  J(0, 0) = 2 * y + mu[2];
  J(0, 1) = 2 * x + mu[3];
  J(1, 0) = 2 * x;
  J(1, 1) = sgn * k_ * (k_ + 1) * std::pow(y, k_ - 1);
  for (int j = 1; j <= k_ - 2; ++j) J(1, 1) += j * mu[3 + j] * std::pow(y, j - 1);
  return J;
}

double VectorUnfolding::frobenius_jac(const Eigen::Vector2d& xy, const Eigen::VectorXd& mu) const {
  return jac(xy, mu).norm();
}

double VectorUnfolding::det_jac(const Eigen::Vector2d& xy, const Eigen::VectorXd& mu) const {
  return jac(xy, mu).determinant();
}

double VectorUnfolding::det_jac_closed_form(const Eigen::Vector2d& xy, double mu3, double mu4) const {
  if (k_ != 2) throw std::logic_error("det_jac_closed_form: k = 2 only");
  const double x = xy[0], y = xy[1];
  if (plus_)
    return -4.0 * std::pow(x + mu4 / 4.0, 2) + 12.0 * std::pow(y - mu3 / 3.0, 2) + mu4 * mu4 / 4.0 -
           16.0 / 3.0 * mu3 * mu3;
  return -4.0 * std::pow(x - mu4 / 4.0, 2) - 12.0 * std::pow(y - mu3 / 3.0, 2) + 16.0 / 3.0 * mu3 * mu3 +
         mu4 * mu4 / 4.0;
}

double VectorUnfolding::potential(const Eigen::Vector2d& xy, const Eigen::VectorXd& mu) const {
  if (k_ != 2) throw std::logic_error("potential: k = 2 only");
  const double x = xy[0], y = xy[1];
  if (plus_) return y * y * y + x * x * y + mu[2] * (y * y - x * x) + mu[1] * y + mu[0] * x;
  return y * y * y - x * x * y + mu[2] * (x * x + y * y) + mu[1] * y + mu[0] * x;
}

Eigen::Vector2d VectorUnfolding::grad_potential(const Eigen::Vector2d& xy, const Eigen::VectorXd& mu) const {
  if (k_ != 2) throw std::logic_error("grad_potential: k = 2 only");
  const double x = xy[0], y = xy[1];
  Eigen::Vector2d g;
  if (plus_)
    g << 2 * x * y - 2 * mu[2] * x + mu[0], 3 * y * y + x * x + 2 * mu[2] * y + mu[1];
  else
    g << -2 * x * y + 2 * mu[2] * x + mu[0], 3 * y * y - x * x + 2 * mu[2] * y + mu[1];
  return g;
}

// ---------------------------------------------------------------------------
// level set sweep
// ---------------------------------------------------------------------------

namespace {

/// (mu1, mu2) for which (x, y) solves f = 0; affine inversion.
Eigen::Vector2d recover_mu12(bool plus, const Eigen::Vector2d& xy, double mu3, double mu4) {
  const double x = xy[0], y = xy[1];
  if (plus) return {-(2 * x * y - 2 * mu3 * x + mu4 * y), -(x * x + 3 * y * y + 2 * mu3 * y)};
  return {2 * x * y - 2 * mu3 * x - mu4 * y, x * x - 3 * y * y - 2 * mu3 * y};
}

/// Directional derivative of det Df along the kernel of Df, sign-tracked
/// along a curve via the previous kernel vector.
double cusp_indicator(const VectorUnfolding& vu, const Eigen::Vector2d& xy, double mu3, double mu4,
                      Eigen::Vector2d* kernel_prev) {
  Eigen::VectorXd mu(4);
  mu << 0.0, 0.0, mu3, mu4;
  const Eigen::Matrix2d J = vu.jac(xy, mu);
  // kernel candidates from the adjugate columns; take the larger
  const Eigen::Vector2d k1(J(1, 1), -J(1, 0));
  const Eigen::Vector2d k2(-J(0, 1), J(0, 0));
  Eigen::Vector2d k = k1.norm() >= k2.norm() ? k1 : k2;
  if (k.norm() == 0.0) return 0.0;
  k.normalize();
  if (kernel_prev) {
    if (kernel_prev->norm() > 0 && k.dot(*kernel_prev) < 0) k = -k;
    *kernel_prev = k;
  }
  // grad of det in (x, y), closed form of the quadratic det
  Eigen::Vector2d gd;
  const double x = xy[0], y = xy[1];
  if (vu.plus())
    gd << -8.0 * (x + mu4 / 4.0), 24.0 * (y - mu3 / 3.0);
  else
    gd << -8.0 * (x - mu4 / 4.0), -24.0 * (y - mu3 / 3.0);
  return gd.dot(k);
}

}  // namespace

D4LevelSet d4_level_set(bool plus, const std::vector<double>& mu3_values, double mu4, int samples_per_curve,
                        double clip_box) {
  if (samples_per_curve < 32) throw std::invalid_argument("d4_level_set: grid resolution must be >= 32");
  VectorUnfolding vu(plus, 2);
  D4LevelSet out{plus, mu4, {}};

  for (double mu3 : mu3_values) {
    D4Slice slice;
    slice.mu3 = mu3;
    // centered coordinates u = x -/+ mu4/4 (sign by kind), v = y - mu3/3
    const double uc = plus ? -mu4 / 4.0 : mu4 / 4.0;
    const double vc = mu3 / 3.0;
    const double C = plus ? (mu4 * mu4 / 4.0 - 16.0 / 3.0 * mu3 * mu3) : (16.0 / 3.0 * mu3 * mu3 + mu4 * mu4 / 4.0);

    std::vector<std::vector<Eigen::Vector2d>> branches;
    if (!plus) {
      // ellipse 4u^2 + 12v^2 = C
      if (C <= 0.0) {
        slice.degenerate_point = true;
        slice.xy.push_back({uc, vc});
        slice.mu12.push_back(recover_mu12(plus, slice.xy.back(), mu3, mu4));
        slice.curve_id.push_back(0);
        out.slices.push_back(std::move(slice));
        continue;
      }
      const double a = std::sqrt(C) / 2.0, b = std::sqrt(C / 12.0);
      std::vector<Eigen::Vector2d> loop;
      for (int i = 0; i <= samples_per_curve; ++i) {
        const double t = 2.0 * M_PI * i / samples_per_curve;
        loop.push_back({uc + a * std::cos(t), vc + b * std::sin(t)});
      }
      branches.push_back(std::move(loop));
    } else {
      // hyperbola 4u^2 - 12v^2 = C
      if (C > 0.0) {
        const double u0 = std::sqrt(C) / 2.0;
        for (int sgn : {-1, 1}) {
          std::vector<Eigen::Vector2d> br;
          for (int i = 0; i <= samples_per_curve; ++i) {
            const double v = -clip_box + 2.0 * clip_box * i / samples_per_curve;
            const double u = sgn * std::sqrt((C + 12.0 * v * v) / 4.0);
            br.push_back({uc + u, vc + v});
          }
          branches.push_back(std::move(br));
        }
        (void)u0;
      } else if (C < 0.0) {
        for (int sgn : {-1, 1}) {
          std::vector<Eigen::Vector2d> br;
          for (int i = 0; i <= samples_per_curve; ++i) {
            const double u = -clip_box + 2.0 * clip_box * i / samples_per_curve;
            const double v = sgn * std::sqrt((4.0 * u * u - C) / 12.0);
            br.push_back({uc + u, vc + v});
          }
          branches.push_back(std::move(br));
        }
      } else {
        // degenerate pair of lines v = +/- u / sqrt(3)
        for (int sgn : {-1, 1}) {
          std::vector<Eigen::Vector2d> br;
          for (int i = 0; i <= samples_per_curve; ++i) {
            const double u = -clip_box + 2.0 * clip_box * i / samples_per_curve;
            br.push_back({uc + u, vc + sgn * u / std::sqrt(3.0)});
          }
          branches.push_back(std::move(br));
        }
      }
    }

    for (int bi = 0; bi < static_cast<int>(branches.size()); ++bi) {
      const auto& br = branches[bi];
      Eigen::Vector2d kernel_prev = Eigen::Vector2d::Zero();
      std::vector<double> c(br.size());
      for (size_t i = 0; i < br.size(); ++i) {
        if (std::abs(br[i][0]) <= clip_box && std::abs(br[i][1]) <= clip_box) {
          slice.xy.push_back(br[i]);
          slice.mu12.push_back(recover_mu12(plus, br[i], mu3, mu4));
          slice.curve_id.push_back(bi);
        }
        c[i] = cusp_indicator(vu, br[i], mu3, mu4, &kernel_prev);
      }
      // cusp points: sign changes of the kernel-directional derivative of det
      for (size_t i = 0; i + 1 < br.size(); ++i) {
        if (c[i] == 0.0 || c[i] * c[i + 1] >= 0.0) continue;
        // bisection refine on the curve segment
        Eigen::Vector2d lo = br[i], hi = br[i + 1];
        double clo = c[i];
        Eigen::Vector2d kp = Eigen::Vector2d::Zero();
        cusp_indicator(vu, lo, mu3, mu4, &kp);  // anchor the kernel sign
        for (int it = 0; it < 60; ++it) {
          const Eigen::Vector2d mid = 0.5 * (lo + hi);
          const double cm = cusp_indicator(vu, mid, mu3, mu4, &kp);
          if (clo * cm <= 0.0)
            hi = mid;
          else {
            lo = mid;
            clo = cm;
          }
        }
        const Eigen::Vector2d xy = 0.5 * (lo + hi);
        if (std::abs(xy[0]) <= clip_box && std::abs(xy[1]) <= clip_box)
          slice.cusps.push_back({xy, recover_mu12(plus, xy, mu3, mu4), mu3});
      }
    }
    out.slices.push_back(std::move(slice));
  }
  return out;
}

std::vector<SwallowtailPoint> swallowtail_points(double mu4) {
  if (mu4 == 0.0) return {SwallowtailPoint{{0.0, 0.0}, 0.0}};
  const double s3 = std::sqrt(3.0);
  return {SwallowtailPoint{{-mu4 / 4.0, s3 / 24.0 * mu4}, s3 / 8.0 * mu4},
          SwallowtailPoint{{-mu4 / 4.0, -s3 / 24.0 * mu4}, -s3 / 8.0 * mu4}};
}

namespace {

/// Minimal |kernel-directional derivative of det| over the non-crossing dips
/// of a slice, and where it occurs. The dip bottoms out at zero exactly where
/// two cusp lines meet (the swallowtail); transversal zero crossings are the
/// ordinary cusps and are excluded.
struct DipResult {
  double value = std::numeric_limits<double>::infinity();
  Eigen::Vector2d xy = Eigen::Vector2d::Zero();
};

DipResult slice_dip(double mu3, double mu4, int samples, double span) {
  VectorUnfolding vu(true, 2);
  const double uc = -mu4 / 4.0, vc = mu3 / 3.0;
  const double C = mu4 * mu4 / 4.0 - 16.0 / 3.0 * mu3 * mu3;

  DipResult best;
  for (int sgn : {-1, 1}) {
    // branch point as a function of the free conic parameter
    auto point = [&](double t) -> Eigen::Vector2d {
      if (C >= 0.0) return {uc + sgn * std::sqrt((C + 12.0 * t * t) / 4.0), vc + t};
      return {uc + t, vc + sgn * std::sqrt((4.0 * t * t - C) / 12.0)};
    };
    Eigen::Vector2d kernel_prev = Eigen::Vector2d::Zero();
    auto phi = [&](double t) { return cusp_indicator(vu, point(t), mu3, mu4, &kernel_prev); };

    std::vector<double> ts(samples + 1), ph(samples + 1);
    for (int i = 0; i <= samples; ++i) {
      ts[i] = -span + 2.0 * span * i / samples;
      ph[i] = phi(ts[i]);
    }
    for (int i = 1; i + 1 <= samples; ++i) {
      const bool dip_min = std::abs(ph[i]) < std::abs(ph[i - 1]) && std::abs(ph[i]) <= std::abs(ph[i + 1]);
      const bool crossing = ph[i - 1] * ph[i] < 0 || ph[i] * ph[i + 1] < 0;
      if (!dip_min || crossing) continue;
      // golden-section refine |phi| on the bracketing interval
      double a = ts[i - 1], b = ts[i + 1];
      kernel_prev.setZero();
      phi(a);  // anchor the kernel sign at the left end
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
      double f1 = std::abs(phi(x1)), f2 = std::abs(phi(x2));
      for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - gr * (b - a);
          f1 = std::abs(phi(x1));
        } else {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + gr * (b - a);
          f2 = std::abs(phi(x2));
        }
      }
      const double t_best = f1 < f2 ? x1 : x2;
      const double v = std::min(f1, f2);
      if (v < best.value) {
        best.value = v;
        best.xy = point(t_best);
      }
    }
  }
  return best;
}

}  // namespace

std::vector<SwallowtailPoint> traced_swallowtail_points(double mu4, double mu3_max, int samples_per_curve) {
  if (mu4 == 0.0) return {SwallowtailPoint{{0.0, 0.0}, 0.0}};
  const double span = std::max(0.75 * std::abs(mu4), 0.02);
  std::vector<SwallowtailPoint> out;
  for (int sign : {1, -1}) {
    // coarse scan for the dip-vanishing parameter, then golden section
    const int coarse = 48;
    double best_mu3 = 0.0, best_val = std::numeric_limits<double>::infinity();
    for (int i = 1; i < coarse; ++i) {
      const double m3 = std::abs(mu3_max) * i / coarse;
      const DipResult d = slice_dip(sign * m3, mu4, samples_per_curve, span);
      if (d.value < best_val) {
        best_val = d.value;
        best_mu3 = m3;
      }
    }
    if (!std::isfinite(best_val)) throw std::runtime_error("traced_swallowtail_points: no dip found in range");
    double a = std::max(0.0, best_mu3 - std::abs(mu3_max) / coarse);
    double b = std::min(std::abs(mu3_max), best_mu3 + std::abs(mu3_max) / coarse);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = slice_dip(sign * x1, mu4, samples_per_curve, span).value;
    double f2 = slice_dip(sign * x2, mu4, samples_per_curve, span).value;
    for (int it = 0; it < 48; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = slice_dip(sign * x1, mu4, samples_per_curve, span).value;
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = slice_dip(sign * x2, mu4, samples_per_curve, span).value;
      }
    }
    const double mu3_star = 0.5 * (a + b);
    const DipResult d = slice_dip(sign * mu3_star, mu4, samples_per_curve, span);
    out.push_back({d.xy, sign * mu3_star});
  }
  return out;
}

double d4_min_frobenius(bool plus, double mu3, double mu4, int grid_n, double box) {
  VectorUnfolding vu(plus, 2);
  Eigen::VectorXd mu(4);
  mu << 0.0, 0.0, mu3, mu4;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_n; ++i)
    for (int j = 0; j < grid_n; ++j) {
      const double x = -box + 2.0 * box * i / (grid_n - 1);
      const double y = -box + 2.0 * box * j / (grid_n - 1);
      best = std::min(best, vu.frobenius_jac({x, y}, mu));
    }
  return best;
}

}  // namespace hambvp
