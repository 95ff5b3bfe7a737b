#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

namespace hambvp {

/// Forward-mode 1-jet: a value together with its first partial derivatives
/// with respect to a fixed set of seed directions.
///
/// A jet with seed_dim() == 0 is a constant; it combines with jets of any
/// seed dimension. Combining two jets with different nonzero seed dimensions
/// is a hard error. The scalar type S may itself be a BasicJet, which gives
/// nested (second-order directional) differentiation.
template <typename S>
class BasicJet {
 public:
  static constexpr int kMaxSeeds = 8;

  BasicJet() : v_(S(0)), m_(0) {}
  BasicJet(const S& v) : v_(v), m_(0) {}  // NOLINT: implicit by design

  template <typename T = S, typename = std::enable_if_t<!std::is_same_v<T, double>>>
  BasicJet(double v) : v_(S(v)), m_(0) {}  // NOLINT: implicit by design

  /// Value v with m zero partials.
  BasicJet(const S& v, int m) : v_(v), m_(check_m(m)) {
    for (int i = 0; i < m_; ++i) d_[i] = S(0);
  }

  /// Value v, m partials, unit derivative in direction `slot`.
  static BasicJet seeded(const S& v, int m, int slot) {
    BasicJet j(v, m);
    if (slot < 0 || slot >= m) throw std::invalid_argument("jet seed slot out of range");
    j.d_[slot] = S(1);
    return j;
  }

  static BasicJet with_partials(const S& v, const std::vector<S>& partials) {
    BasicJet j(v, static_cast<int>(partials.size()));
    for (int i = 0; i < j.m_; ++i) j.d_[i] = partials[i];
    return j;
  }

  const S& value() const { return v_; }
  S& value() { return v_; }
  int seed_dim() const { return m_; }

  const S& partial(int i) const {
    if (i < 0 || i >= m_) throw std::out_of_range("jet partial index");
    return d_[i];
  }
  S& partial_ref(int i) { return d_[i]; }

  /// Promote a constant to seed dimension m (zero partials).
  void broadcast_to(int m) {
    if (m_ == static_cast<int>(m)) return;
    if (m_ != 0) throw std::invalid_argument("jet seed dimension mismatch");
    m_ = check_m(m);
    for (int i = 0; i < m_; ++i) d_[i] = S(0);
  }

  BasicJet operator-() const {
    BasicJet r(-v_, m_);
    for (int i = 0; i < m_; ++i) r.d_[i] = -d_[i];
    return r;
  }

  BasicJet& operator+=(const BasicJet& o) { return apply(o, [](S& a, const S& b) { a += b; }); }
  BasicJet& operator-=(const BasicJet& o) { return apply(o, [](S& a, const S& b) { a -= b; }); }

  friend BasicJet operator+(BasicJet a, const BasicJet& b) { return a += b; }
  friend BasicJet operator-(BasicJet a, const BasicJet& b) { return a -= b; }

  friend BasicJet operator*(const BasicJet& a, const BasicJet& b) {
    const int m = combined_dim(a, b);
    BasicJet r(a.v_ * b.v_, m);
    for (int i = 0; i < m; ++i) r.d_[i] = a.pad(i) * b.v_ + a.v_ * b.pad(i);
    return r;
  }

  friend BasicJet operator/(const BasicJet& a, const BasicJet& b) {
    if (primal_of(b.v_) == 0.0) throw std::domain_error("jet division by value 0");
    const int m = combined_dim(a, b);
    const S inv = S(1) / b.v_;
    BasicJet r(a.v_ * inv, m);
    for (int i = 0; i < m; ++i) r.d_[i] = (a.pad(i) - r.v_ * b.pad(i)) * inv;
    return r;
  }

  friend bool operator==(const BasicJet& a, const BasicJet& b) { return primal_of(a.v_) == primal_of(b.v_); }
  friend bool operator<(const BasicJet& a, const BasicJet& b) { return primal_of(a.v_) < primal_of(b.v_); }
  friend bool operator>(const BasicJet& a, const BasicJet& b) { return primal_of(a.v_) > primal_of(b.v_); }

  /// Underlying double value, drilling through nesting levels.
  static double primal_of(const S& s) {
    if constexpr (std::is_same_v<S, double>) {
      return s;
    } else {
      return S::primal_of(s.value());
    }
  }
  double primal() const { return primal_of(v_); }

 private:
  template <typename F>
  BasicJet& apply(const BasicJet& o, F f) {
    const int m = combined_dim(*this, o);
    if (m_ == 0 && m > 0) broadcast_to(m);
    for (int i = 0; i < m; ++i) f(d_[i], o.pad(i));
    f(v_, o.v_);
    return *this;
  }

  // Partial i, treating constants as having zero partials of any length.
  const S& pad(int i) const {
    static const S zero(0);
    return (m_ == 0) ? zero : d_[i];
  }

  static int combined_dim(const BasicJet& a, const BasicJet& b) {
    if (a.m_ == 0) return b.m_;
    if (b.m_ == 0) return a.m_;
    if (a.m_ != b.m_) throw std::invalid_argument("jet seed dimension mismatch");
    return a.m_;
  }

  static int check_m(int m) {
    if (m < 0 || m > kMaxSeeds)
      throw std::invalid_argument("jet seed dimension out of range (max " + std::to_string(kMaxSeeds) + ")");
    return m;
  }

  S v_;
  int m_;
  std::array<S, kMaxSeeds> d_;
};

// Chain rule for a scalar function with value fv and derivative dfv at a.v.
template <typename S>
BasicJet<S> jet_chain(const BasicJet<S>& a, const S& fv, const S& dfv) {
  BasicJet<S> r(fv, a.seed_dim());
  for (int i = 0; i < a.seed_dim(); ++i) r.partial_ref(i) = dfv * a.partial(i);
  return r;
}

template <typename S>
BasicJet<S> exp(const BasicJet<S>& a) {
  using std::exp;
  const S e = exp(a.value());
  return jet_chain(a, e, e);
}

template <typename S>
BasicJet<S> log(const BasicJet<S>& a) {
  using std::log;
  if (BasicJet<S>::primal_of(a.value()) <= 0.0) throw std::domain_error("jet log of non-positive value");
  return jet_chain(a, log(a.value()), S(1) / a.value());
}

template <typename S>
BasicJet<S> sin(const BasicJet<S>& a) {
  using std::cos;
  using std::sin;
  return jet_chain(a, sin(a.value()), cos(a.value()));
}

template <typename S>
BasicJet<S> cos(const BasicJet<S>& a) {
  using std::cos;
  using std::sin;
  return jet_chain(a, cos(a.value()), -sin(a.value()));
}

template <typename S>
BasicJet<S> sqrt(const BasicJet<S>& a) {
  using std::sqrt;
  if (BasicJet<S>::primal_of(a.value()) < 0.0) throw std::domain_error("jet sqrt of negative value");
  const S r = sqrt(a.value());
  return jet_chain(a, r, S(0.5) / r);
}

/// Integer power by repeated multiplication; exact for the polynomial
/// Hamiltonians in the catalog.
template <typename S>
BasicJet<S> pow(const BasicJet<S>& a, int k) {
  if (k < 0) return BasicJet<S>(S(1)) / pow(a, -k);
  BasicJet<S> r{S(1)};
  BasicJet<S> base = a;
  for (int e = k; e > 0; e >>= 1) {
    if (e & 1) r = r * base;
    base = base * base;
  }
  return r;
}

template <typename S>
BasicJet<S> pow(const BasicJet<S>& a, double expo) {
  using std::pow;
  const double av = BasicJet<S>::primal_of(a.value());
  if (av <= 0.0) throw std::domain_error("jet pow with non-positive base");
  const S p = pow(a.value(), S(expo));
  return jet_chain(a, p, S(expo) * p / a.value());
}

using Jet = BasicJet<double>;
using Jet2 = BasicJet<Jet>;  // nested jet, for derivatives of jet-valued maps
using JetVec = std::vector<Jet>;
using Jet2Vec = std::vector<Jet2>;

inline Jet dot(const JetVec& a, const JetVec& b) {
  Jet s(0.0);
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Lift a real vector into jet space: entries listed in `active` (0-based)
/// get unit seed rows in order, all others carry zero partials.
inline JetVec lift(const Eigen::VectorXd& x, const std::vector<int>& active) {
  if (x.size() == 0) throw std::invalid_argument("lift: empty input vector");
  const int m = static_cast<int>(active.size());
  JetVec out;
  out.reserve(x.size());
  for (int i = 0; i < x.size(); ++i) out.emplace_back(x[i], m);
  for (int k = 0; k < m; ++k) {
    const int idx = active[k];
    if (idx < 0 || idx >= x.size()) throw std::invalid_argument("lift: active index out of range");
    out[idx] = Jet::seeded(x[idx], m, k);
  }
  return out;
}

/// All entries active, identity seed.
inline JetVec lift_all(const Eigen::VectorXd& x) {
  std::vector<int> active(x.size());
  for (int i = 0; i < x.size(); ++i) active[i] = i;
  return lift(x, active);
}

/// Constant (zero-partial) lift.
inline JetVec lift_const(const Eigen::VectorXd& x) {
  JetVec out;
  out.reserve(x.size());
  for (int i = 0; i < x.size(); ++i) out.emplace_back(x[i]);
  return out;
}

inline Eigen::VectorXd values_of(const JetVec& v) {
  Eigen::VectorXd out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i].value();
  return out;
}

/// k x m matrix of partials; rows = entries, cols = seed directions.
inline Eigen::MatrixXd partials_of(const JetVec& v, int m) {
  Eigen::MatrixXd out(v.size(), m);
  for (size_t i = 0; i < v.size(); ++i) {
    if (v[i].seed_dim() == 0) {
      out.row(i).setZero();
      continue;
    }
    if (v[i].seed_dim() != m) throw std::invalid_argument("partials_of: seed dimension mismatch");
    for (int j = 0; j < m; ++j) out(i, j) = v[i].partial(j);
  }
  return out;
}

/// Jacobian of a jet-evaluable map at x (all coordinates active).
template <typename F>
Eigen::MatrixXd jacobian(F&& map, const Eigen::VectorXd& x) {
  JetVec y = map(lift_all(x));
  return partials_of(y, static_cast<int>(x.size()));
}

}  // namespace hambvp
