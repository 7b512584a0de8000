#pragma once

// An exact magnetic system (g, alpha) with g conformal to the hyperbolic metric.
// In two dimensions the Lorentz force is Y v = b J v, where b = d(alpha)/dvol_g
// and J is the rotation by +90 degrees in the (x, y) orientation.

#include <atomic>
#include <cmath>
#include <optional>
#include <string>

#include "maglab/metric.hpp"
#include "maglab/tensor_fields.hpp"

namespace maglab {

inline Vec2 rotate_quarter(const Vec2& v) { return {-v.y(), v.x()}; }

struct PhasePoint {
  Point z;
  Vec2 v;  // coordinate velocity

  /// Unit vector (in g) at z making Euclidean angle theta with the x axis.
  static PhasePoint from_angle(const ConformalMetric& g, Point z, double theta) {
    const double s = std::exp(-g.sigma_value(z));
    return {z, Vec2(s * std::cos(theta), s * std::sin(theta))};
  }
  double angle() const { return std::atan2(v.y(), v.x()); }

  PhasePoint normalized(const ConformalMetric& g) const {
    const double n = g.norm(z, v);
    if (!(n > 0.0)) throw DomainError("PhasePoint: zero velocity");
    return {z, v / n};
  }
  PhasePoint reversed() const { return {z, -v}; }
};

/// Values the flow needs at a point, from one field evaluation.
struct FlowCoefficients {
  double sigma = 0.0;
  Vec2 grad_sigma = Vec2::Zero();
  double b = 0.0;
};

class MagneticSystem {
 public:
  MagneticSystem(SurfacePtr surface, ConformalMetric metric, OneFormField alpha, std::string name = "system")
      : surface_(std::move(surface)), metric_(std::move(metric)), alpha_(std::move(alpha)), name_(std::move(name)),
        uid_(next_uid()) {}

  /// Universal-cover harness with a prescribed constant field strength. Such a
  /// b is not d(alpha) of any 1-form on the closed surface; the harness exists
  /// only for closed-form oracles.
  static MagneticSystem with_constant_field(ConformalMetric metric, double b, std::string name = "constant-field") {
    MagneticSystem s(nullptr, std::move(metric), OneFormField(), std::move(name));
    s.prescribed_b_ = b;
    return s;
  }

  const SurfacePtr& surface() const { return surface_; }
  const ConformalMetric& metric() const { return metric_; }
  const OneFormField& alpha() const { return alpha_; }
  const std::string& name() const { return name_; }
  std::uint64_t uid() const { return uid_; }
  std::optional<double> prescribed_field() const { return prescribed_b_; }

  /// Same metric, different 1-form.
  MagneticSystem with_alpha(OneFormField alpha, std::string name) const {
    MagneticSystem s(surface_, metric_, std::move(alpha), std::move(name));
    s.prescribed_b_ = prescribed_b_;
    return s;
  }
  MagneticSystem with_metric(ConformalMetric metric, std::string name) const {
    MagneticSystem s(surface_, std::move(metric), alpha_, std::move(name));
    s.prescribed_b_ = prescribed_b_;
    return s;
  }
  /// alpha -> -alpha: its flow from (z, -v) retraces this flow backwards.
  MagneticSystem time_reversed() const {
    MagneticSystem s(surface_, metric_, alpha_.scaled(-1.0), name_ + " (reversed)");
    if (prescribed_b_) s.prescribed_b_ = -*prescribed_b_;
    return s;
  }

  /// b = d(alpha)(e_x, e_y) / e^{2 sigma}.
  Jet field_strength_jet(Point z, int order) const {
    if (prescribed_b_) return Jet(*prescribed_b_, order);
    const Jet da = alpha_.exterior_derivative_jet(z, order);
    return da * exp(-2.0 * metric_.sigma(z, order));
  }
  double field_strength(Point z) const {
    if (prescribed_b_) return *prescribed_b_;
    if (alpha_.is_zero()) return 0.0;
    return alpha_.exterior_derivative(z) * std::exp(-2.0 * metric_.sigma_value(z));
  }

  FlowCoefficients coefficients(Point z) const {
    FlowCoefficients c;
    const Jet s = metric_.sigma(z, 1);
    c.sigma = s.value();
    c.grad_sigma = {s.dx(), s.dy()};
    if (prescribed_b_) {
      c.b = *prescribed_b_;
    } else if (!alpha_.is_zero()) {
      c.b = alpha_.exterior_derivative(z) * std::exp(-2.0 * c.sigma);
    }
    return c;
  }

  Vec2 lorentz_force(Point z, const Vec2& v) const { return field_strength(z) * rotate_quarter(v); }

  /// (nabla_w Y)(v) from the general formula
  ///   (nabla_w Y)^k_l = w^i (d_i Y^k_l + Gamma^k_im Y^m_l - Gamma^m_il Y^k_m).
  Vec2 covariant_lorentz(Point z, const Vec2& w, const Vec2& v) const {
    const Jet b = field_strength_jet(z, 1);
    const Christoffel gam = metric_.christoffel(z);
    // Y^k_l = b J^k_l with J = [[0, -1], [1, 0]].
    const double jm[2][2] = {{0.0, -1.0}, {1.0, 0.0}};
    const double db[2] = {b.dx(), b.dy()};
    Vec2 r = Vec2::Zero();
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) {
        double t = 0.0;
        for (int i = 0; i < 2; ++i) {
          double s = db[i] * jm[k][l];
          for (int m = 0; m < 2; ++m) s += b.value() * (gam(k, i, m) * jm[m][l] - gam(m, i, l) * jm[k][m]);
          t += w[i] * s;
        }
        r[k] += t * v[l];
      }
    return r;
  }

 private:
  static std::uint64_t next_uid() {
    static std::atomic<std::uint64_t> counter{0};
    return ++counter;
  }

  SurfacePtr surface_;
  ConformalMetric metric_;
  OneFormField alpha_;
  std::string name_;
  std::uint64_t uid_;
  std::optional<double> prescribed_b_;
};

}  // namespace maglab
