#pragma once

// Truncated bivariate Taylor polynomials ("jets") in the disk coordinates
// (x, y). Every field in the library is evaluated through these, so first,
// second and third partial derivatives come out of the same arithmetic that
// produces the value.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <span>

namespace maglab {

inline constexpr int kMaxJetOrder = 3;

namespace detail {

constexpr int jet_index(int i, int j) { return (i + j) * (i + j + 1) / 2 + j; }
constexpr int jet_size(int order) { return (order + 1) * (order + 2) / 2; }

inline constexpr std::array<double, 5> kFactorial = {1.0, 1.0, 2.0, 6.0, 24.0};

}  // namespace detail

/// Taylor coefficients c_ij of x^i y^j for i + j <= order, about a base point.
/// The order is a runtime property; binary operations truncate to the lower
/// order of their operands.
class Jet {
 public:
  static constexpr int kCapacity = detail::jet_size(kMaxJetOrder);

  Jet() = default;
  explicit Jet(double value, int order = kMaxJetOrder) : order_(order) { c_[0] = value; }

  /// The coordinate function x (axis 0) or y (axis 1) expanded at `at`.
  static Jet variable(int axis, double at, int order) {
    Jet j(at, order);
    if (order >= 1) j.c_[axis == 0 ? detail::jet_index(1, 0) : detail::jet_index(0, 1)] = 1.0;
    return j;
  }

  int order() const { return order_; }
  double value() const { return c_[0]; }

  double coeff(int i, int j) const { return c_[detail::jet_index(i, j)]; }
  double& coeff(int i, int j) { return c_[detail::jet_index(i, j)]; }

  /// Partial derivative d^{i+j} / dx^i dy^j at the base point.
  double d(int i, int j) const {
    assert(i + j <= order_);
    return coeff(i, j) * detail::kFactorial[i] * detail::kFactorial[j];
  }
  double dx() const { return d(1, 0); }
  double dy() const { return d(0, 1); }

  /// Jet of the partial derivative along `axis`, one order lower.
  Jet partial(int axis) const {
    assert(order_ >= 1);
    Jet r(0.0, order_ - 1);
    for (int deg = 0; deg <= order_ - 1; ++deg)
      for (int j = 0; j <= deg; ++j) {
        const int i = deg - j;
        r.coeff(i, j) = axis == 0 ? (i + 1) * coeff(i + 1, j) : (j + 1) * coeff(i, j + 1);
      }
    return r;
  }

  Jet truncated(int order) const {
    Jet r = *this;
    r.set_order(order < order_ ? order : order_);
    return r;
  }

  Jet& operator+=(const Jet& o) {
    set_order(std::min(order_, o.order_));
    for (int k = 0; k < detail::jet_size(order_); ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    set_order(std::min(order_, o.order_));
    for (int k = 0; k < detail::jet_size(order_); ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    c_[0] -= s;
    return *this;
  }
  Jet& operator*=(double s) {
    for (int k = 0; k < detail::jet_size(order_); ++k) c_[k] *= s;
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    *this = *this * o;
    return *this;
  }

  friend Jet operator*(const Jet& a, const Jet& b) {
    const int ord = std::min(a.order_, b.order_);
    Jet r(0.0, ord);
    for (int da = 0; da <= ord; ++da)
      for (int ja = 0; ja <= da; ++ja) {
        const double ca = a.coeff(da - ja, ja);
        if (ca == 0.0) continue;
        for (int db = 0; db + da <= ord; ++db)
          for (int jb = 0; jb <= db; ++jb)
            r.coeff(da - ja + db - jb, ja + jb) += ca * b.coeff(db - jb, jb);
      }
    return r;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return -a + s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator-(Jet a) { return a *= -1.0; }

 private:
  void set_order(int order) {
    for (int k = detail::jet_size(order); k < detail::jet_size(order_); ++k) c_[k] = 0.0;
    order_ = order;
  }

  int order_ = kMaxJetOrder;
  std::array<double, kCapacity> c_{};
};

/// Univariate truncated Taylor series, used to chain scalar profiles before
/// they are pushed through a bivariate jet.
struct Series {
  std::array<double, kMaxJetOrder + 1> c{};

  static Series variable(double at) {
    Series s;
    s.c[0] = at;
    s.c[1] = 1.0;
    return s;
  }
  friend Series operator*(const Series& a, const Series& b) {
    Series r;
    for (int i = 0; i <= kMaxJetOrder; ++i)
      for (int j = 0; i + j <= kMaxJetOrder; ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
  }
  friend Series operator+(Series a, const Series& b) {
    for (int i = 0; i <= kMaxJetOrder; ++i) a.c[i] += b.c[i];
    return a;
  }
  friend Series operator*(double s, Series a) {
    for (double& x : a.c) x *= s;
    return a;
  }
  friend Series operator+(double s, Series a) {
    a.c[0] += s;
    return a;
  }
};

/// f(inner) where taylor[k] = f^{(k)}(inner.value()) / k!.
inline Jet compose(const Jet& inner, std::span<const double> taylor) {
  const int ord = inner.order();
  assert(static_cast<int>(taylor.size()) > ord);
  Jet h = inner;
  h.coeff(0, 0) = 0.0;
  Jet result(taylor[0], ord);
  Jet power = h;
  for (int k = 1; k <= ord; ++k) {
    Jet term = power;
    term *= taylor[k];
    result += term;
    if (k < ord) power = power * h;
  }
  return result;
}

inline Series compose(const Series& inner, std::span<const double> taylor) {
  Series h = inner;
  h.c[0] = 0.0;
  Series result;
  result.c[0] = taylor[0];
  Series power = h;
  for (int k = 1; k <= kMaxJetOrder; ++k) {
    result = result + taylor[k] * power;
    power = power * h;
  }
  return result;
}

namespace detail {

inline std::array<double, kMaxJetOrder + 1> exp_taylor(double a) {
  const double e = std::exp(a);
  return {e, e, e / 2.0, e / 6.0};
}

inline std::array<double, kMaxJetOrder + 1> reciprocal_taylor(double a) {
  const double r = 1.0 / a;
  return {r, -r * r, r * r * r, -r * r * r * r};
}

inline std::array<double, kMaxJetOrder + 1> log_taylor(double a) {
  const double r = 1.0 / a;
  return {std::log(a), r, -r * r / 2.0, r * r * r / 3.0};
}

}  // namespace detail

inline Jet exp(const Jet& x) { return compose(x, detail::exp_taylor(x.value())); }
inline Jet reciprocal(const Jet& x) { return compose(x, detail::reciprocal_taylor(x.value())); }
inline Jet log(const Jet& x) { return compose(x, detail::log_taylor(x.value())); }

inline Series exp(const Series& x) { return compose(x, detail::exp_taylor(x.c[0])); }
inline Series reciprocal(const Series& x) { return compose(x, detail::reciprocal_taylor(x.c[0])); }

}  // namespace maglab
