#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Core>

#include "maglab/errors.hpp"

namespace maglab {

using Complex = std::complex<double>;
/// A point of the Poincare disk, x + iy with |z| < 1.
using Point = Complex;
/// Tangent vectors and covectors in the disk coordinates.
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline Vec2 to_vec(Complex z) { return {z.real(), z.imag()}; }
inline Complex to_complex(const Vec2& v) { return {v.x(), v.y()}; }

inline void require_in_disk(Point z, const char* what) {
  if (!(std::norm(z) < 1.0)) throw DomainError(std::string(what) + ": point not inside the unit disk");
}

/// Orientation-preserving isometry z -> (a z + b) / (conj(b) z + conj(a)),
/// normalised so that |a|^2 - |b|^2 = 1.
class MobiusTransform {
 public:
  MobiusTransform() = default;
  MobiusTransform(Complex a, Complex b) : a_(a), b_(b) {}

  static MobiusTransform identity() { return {}; }
  static MobiusTransform rotation(double angle) { return {std::polar(1.0, angle / 2.0), 0.0}; }
  /// The isometry taking 0 to p whose derivative at 0 is real and positive.
  static MobiusTransform translation_to(Point p) {
    const double s = 1.0 / std::sqrt(1.0 - std::norm(p));
    return {s, s * p};
  }

  Complex a() const { return a_; }
  Complex b() const { return b_; }

  Point operator()(Point z) const {
    require_in_disk(z, "mobius_apply");
    return apply_unchecked(z);
  }
  Point apply_unchecked(Point z) const { return (a_ * z + b_) / (std::conj(b_) * z + std::conj(a_)); }

  Complex derivative(Point z) const {
    const Complex den = std::conj(b_) * z + std::conj(a_);
    return 1.0 / (den * den);
  }
  Complex second_derivative(Point z) const {
    const Complex den = std::conj(b_) * z + std::conj(a_);
    return -2.0 * std::conj(b_) / (den * den * den);
  }
  /// Push-forward of a tangent vector at z.
  Vec2 push(Point z, const Vec2& v) const { return to_vec(derivative(z) * to_complex(v)); }

  MobiusTransform inverse() const { return {std::conj(a_), -b_}; }

  /// Composition (*this)(rhs(z)).
  MobiusTransform operator*(const MobiusTransform& rhs) const {
    return {a_ * rhs.a_ + b_ * std::conj(rhs.b_), a_ * rhs.b_ + b_ * std::conj(rhs.a_)};
  }

  double trace() const { return 2.0 * a_.real(); }
  double determinant() const { return std::norm(a_) - std::norm(b_); }

  /// Frobenius distance to +identity or -identity, whichever is closer.
  double distance_to_identity() const {
    const double plus = std::abs(a_ - 1.0) + std::abs(b_);
    const double minus = std::abs(a_ + 1.0) + std::abs(b_);
    return std::min(plus, minus);
  }

 private:
  Complex a_{1.0, 0.0};
  Complex b_{0.0, 0.0};
};

/// sinh^2(d/2) for the disk metric; monotone in the hyperbolic distance and
/// free of cancellation for nearby points.
inline double half_sinh_sq(Point z, Point w) {
  return std::norm(z - w) / ((1.0 - std::norm(z)) * (1.0 - std::norm(w)));
}

inline double hyperbolic_distance(Point z, Point w) {
  require_in_disk(z, "hyperbolic_distance");
  require_in_disk(w, "hyperbolic_distance");
  const double ratio = std::abs(z - w) / std::abs(1.0 - std::conj(w) * z);
  return 2.0 * std::atanh(ratio);
}

inline double translation_length(const MobiusTransform& t) {
  const double tr = std::abs(t.trace());
  if (!(tr > 2.0)) throw DomainError("translation_length: element is not hyperbolic (|tr| <= 2)");
  return 2.0 * std::acosh(tr / 2.0);
}

/// Conformal factor of the disk metric, |v|_hyp = lambda(z) |v|_euclid.
inline double disk_factor(Point z) { return 2.0 / (1.0 - std::norm(z)); }

/// The invariant geodesic of a hyperbolic element, described by its point
/// closest to the origin and the unit Euclidean direction of translation there.
struct Axis {
  Point foot;
  Complex direction;
  double length;

  /// Point at signed hyperbolic arclength s from the foot.
  Point at(double s) const {
    const Point w = direction * std::tanh(s / 2.0);
    return (w + foot) / (1.0 + std::conj(foot) * w);
  }
  /// Unit (Euclidean) tangent direction at arclength s.
  Complex tangent(double s) const {
    const Point w = direction * std::tanh(s / 2.0);
    const Complex den = 1.0 + std::conj(foot) * w;
    const Complex d = (1.0 - std::norm(foot)) / (den * den) * direction;
    return d / std::abs(d);
  }
};

inline Axis axis_of(const MobiusTransform& t) {
  const double len = translation_length(t);
  const Complex a = t.a();
  const Complex b = t.b();
  const double im = a.imag();
  const double s = std::sqrt(std::max(0.0, std::norm(b) - im * im));
  const Complex z1 = Complex(s, im) / std::conj(b);
  const Complex z2 = Complex(-s, im) / std::conj(b);
  // The attracting fixed point has |T'| < 1.
  const bool z1_attracting = std::abs(t.derivative(z1)) < 1.0;
  const Complex attract = z1_attracting ? z1 : z2;
  const Complex repel = z1_attracting ? z2 : z1;

  const double theta_a = std::arg(attract);
  double delta = std::arg(repel / attract);  // in (-pi, pi]
  const Complex mid = std::polar(1.0, theta_a + delta / 2.0);
  const double psi = std::abs(delta) / 2.0;
  const double radius = std::cos(psi) / (1.0 + std::sin(psi));
  const Point foot = radius * mid;
  Complex dir = Complex(0.0, 1.0) * mid;
  if ((std::conj(dir) * (attract - repel)).real() < 0.0) dir = -dir;
  return {foot, dir, len};
}

}  // namespace maglab
