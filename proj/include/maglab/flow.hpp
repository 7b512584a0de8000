#pragma once

// Magnetic geodesic flow on the universal cover: classical RK4 for
//   z'' + Gamma(z', z') = b J z',
// with the speed reset to 1 after every step.

#include <cmath>
#include <vector>

#include "maglab/errors.hpp"
#include "maglab/magnetic_system.hpp"

namespace maglab {

inline constexpr double kBoundaryGuard = 1.0 - 1e-12;

struct FlowSample {
  double t = 0.0;
  PhasePoint state;
};

struct FlowOptions {
  double h = 1e-3;      // largest step; the actual step divides T evenly
  bool dense = false;   // keep the state after every step
  int steps = 0;        // when positive, overrides h: exactly this many steps
};

struct FlowResult {
  PhasePoint end;
  std::vector<FlowSample> samples;
  int steps = 0;
  double max_speed_drift = 0.0;  // |speed - 1| before each renormalization
};

namespace detail {

struct State {
  double x, y, vx, vy;
};

/// Conformal geodesic spray plus Lorentz term:
///   a = -(2 v (grad sigma . v) - |v|^2 grad sigma) + b J v.
inline State rhs(const State& s, const FlowCoefficients& c) {
  const double gv = c.grad_sigma.x() * s.vx + c.grad_sigma.y() * s.vy;
  const double vv = s.vx * s.vx + s.vy * s.vy;
  const double ax = -(2.0 * s.vx * gv - vv * c.grad_sigma.x()) - c.b * s.vy;
  const double ay = -(2.0 * s.vy * gv - vv * c.grad_sigma.y()) + c.b * s.vx;
  return {s.vx, s.vy, ax, ay};
}

inline State axpy(const State& s, double h, const State& k) {
  return {s.x + h * k.x, s.y + h * k.y, s.vx + h * k.vx, s.vy + h * k.vy};
}

inline FlowCoefficients coefficients_checked(const MagneticSystem& sys, double x, double y) {
  if (!(x * x + y * y < kBoundaryGuard * kBoundaryGuard))
    throw NumericalError("flow: trajectory left the disk (|z| >= 1 - 1e-12)");
  return sys.coefficients({x, y});
}

}  // namespace detail

inline FlowResult flow(const MagneticSystem& sys, const PhasePoint& start, double T, const FlowOptions& opts = {}) {
  if (!std::isfinite(T) || T < 0.0) throw InputError("flow: time must be finite and non-negative");
  if (!(opts.h > 0.0)) throw InputError("flow: step must be positive");
  require_in_disk(start.z, "flow");
  const int n = opts.steps > 0 ? opts.steps : std::max(1, static_cast<int>(std::ceil(T / opts.h - 1e-9)));
  const double h = T / n;

  FlowResult res;
  res.steps = n;
  const PhasePoint p0 = start.normalized(sys.metric());
  detail::State s{p0.z.real(), p0.z.imag(), p0.v.x(), p0.v.y()};
  FlowCoefficients c = detail::coefficients_checked(sys, s.x, s.y);
  if (opts.dense) {
    res.samples.reserve(n + 1);
    res.samples.push_back({0.0, p0});
  }
  for (int i = 0; i < n; ++i) {
    const detail::State k1 = detail::rhs(s, c);
    const detail::State s2 = detail::axpy(s, 0.5 * h, k1);
    const detail::State k2 = detail::rhs(s2, detail::coefficients_checked(sys, s2.x, s2.y));
    const detail::State s3 = detail::axpy(s, 0.5 * h, k2);
    const detail::State k3 = detail::rhs(s3, detail::coefficients_checked(sys, s3.x, s3.y));
    const detail::State s4 = detail::axpy(s, h, k3);
    const detail::State k4 = detail::rhs(s4, detail::coefficients_checked(sys, s4.x, s4.y));
    s.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    s.vx += h / 6.0 * (k1.vx + 2.0 * k2.vx + 2.0 * k3.vx + k4.vx);
    s.vy += h / 6.0 * (k1.vy + 2.0 * k2.vy + 2.0 * k3.vy + k4.vy);

    // The evaluation here is reused as k1 of the next step.
    c = detail::coefficients_checked(sys, s.x, s.y);
    const double speed = std::exp(c.sigma) * std::hypot(s.vx, s.vy);
    res.max_speed_drift = std::max(res.max_speed_drift, std::abs(speed - 1.0));
    s.vx /= speed;
    s.vy /= speed;
    if (opts.dense) res.samples.push_back({(i + 1) * h, PhasePoint{{s.x, s.y}, {s.vx, s.vy}}});
  }
  res.end = PhasePoint{{s.x, s.y}, {s.vx, s.vy}};
  return res;
}

/// Image of a phase point under a disk isometry.
inline PhasePoint push_forward(const MobiusTransform& g, const PhasePoint& p) {
  return {g.apply_unchecked(p.z), g.push(p.z, p.v)};
}

/// Moves p into the fundamental octagon; returns the image and the element used.
inline std::pair<PhasePoint, MobiusTransform> deck_normalize(const FuchsianGroup& group, const PhasePoint& p) {
  require_in_disk(p.z, "deck_normalize");
  const auto [w, h] = group.normalize(p.z);
  (void)w;
  return {push_forward(h, p), h};
}

}  // namespace maglab
