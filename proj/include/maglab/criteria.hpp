#pragma once

// Pointwise curvature quantities behind the two solenoidal-injectivity criteria,
// for surfaces (n = 2). In two dimensions the only plane through v is spanned
// by v and w = +-J v / |J v|, so both suprema reduce to a single evaluation.

#include <cmath>
#include <vector>

#include "maglab/errors.hpp"
#include "maglab/magnetic_system.hpp"

namespace maglab {

inline constexpr int kDimension = 2;

namespace detail {

inline Vec2 unit_or_warn(const ConformalMetric& g, Point z, const Vec2& v, bool* warned) {
  const double n = g.norm(z, v);
  if (!(n > 0.0)) throw InputError("criteria: zero tangent vector");
  if (std::abs(n - 1.0) > 1e-10 && warned) *warned = true;
  return v / n;
}

}  // namespace detail

/// R(w,v,v,w) + g((nabla_w Y) v, w) + |Y w|^2 / 4 + 3/4 g(w, Y v)^2 for unit
/// v, w. Non-unit inputs are normalized and flagged through `normalized`.
inline double magnetic_sectional(const MagneticSystem& sys, Point z, Vec2 v, Vec2 w, bool* normalized = nullptr) {
  const ConformalMetric& g = sys.metric();
  v = detail::unit_or_warn(g, z, v, normalized);
  w = detail::unit_or_warn(g, z, w, normalized);
  // For a unit pair in 2D, R(w,v,v,w) = K (1 - g(v,w)^2).
  const double cos_vw = g.inner(z, v, w);
  const double curv = g.gaussian_curvature(z) * (1.0 - cos_vw * cos_vw);
  const Vec2 yw = sys.lorentz_force(z, w);
  const Vec2 yv = sys.lorentz_force(z, v);
  const double g_w_yv = g.inner(z, w, yv);
  return curv + g.inner(z, sys.covariant_lorentz(z, w, v), w) + 0.25 * g.inner(z, yw, yw) + 0.75 * g_w_yv * g_w_yv;
}

/// Unit vector orthogonal to v, obtained by the +90 degree rotation.
inline Vec2 orthogonal_unit(const ConformalMetric& g, Point z, const Vec2& v) {
  const Vec2 w = rotate_quarter(v);
  return w / g.norm(z, w);
}

/// sup over unit w orthogonal to v of
///   2 R(w,v,v,w) + g(Y v, w)^2 + (n+3) |Y w|^2 - 2 g((nabla_w Y) v, w).
inline double dp_k(const MagneticSystem& sys, Point z, Vec2 v) {
  const ConformalMetric& g = sys.metric();
  v = detail::unit_or_warn(g, z, v, nullptr);
  const double curv = g.gaussian_curvature(z);
  double best = -INFINITY;
  for (double sign : {1.0, -1.0}) {
    const Vec2 w = sign * orthogonal_unit(g, z, v);
    const Vec2 yv = sys.lorentz_force(z, v);
    const Vec2 yw = sys.lorentz_force(z, w);
    const double t = g.inner(z, yv, w);
    const double val = 2.0 * curv + t * t + (kDimension + 3) * g.inner(z, yw, yw) -
                       2.0 * g.inner(z, sys.covariant_lorentz(z, w, v), w);
    best = std::max(best, val);
  }
  return best;
}

struct MarginResult {
  double worst = -INFINITY;
  Point worst_point = 0.0;
  double worst_angle = 0.0;
  bool pass = false;
  std::size_t evaluations = 0;
};

/// max over grid points, directions and w orthogonal to v of
///   sec_v(w) + (n/2 - 1 + 2/(n+2)) g(w, Y v)^2; passes when negative.
inline MarginResult crit_b_margin(const MagneticSystem& sys, const std::vector<Point>& grid, int directions = 16) {
  if (grid.empty()) throw InputError("crit_b_margin: empty sample grid");
  if (directions < 1) throw InputError("crit_b_margin: need at least one direction");
  constexpr double coeff = kDimension / 2.0 - 1.0 + 2.0 / (kDimension + 2.0);
  const ConformalMetric& g = sys.metric();
  MarginResult r;
  for (Point z : grid) {
    for (int k = 0; k < directions; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / directions;
      const PhasePoint p = PhasePoint::from_angle(g, z, theta);
      for (double sign : {1.0, -1.0}) {
        const Vec2 w = sign * orthogonal_unit(g, z, p.v);
        const double t = g.inner(z, w, sys.lorentz_force(z, p.v));
        const double val = magnetic_sectional(sys, z, p.v, w) + coeff * t * t;
        ++r.evaluations;
        if (val > r.worst) {
          r.worst = val;
          r.worst_point = z;
          r.worst_angle = theta;
        }
      }
    }
  }
  r.pass = r.worst < 0.0;
  return r;
}

}  // namespace maglab
