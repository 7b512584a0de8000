#pragma once

// Group-invariant smooth functions built from averaged bumps
//   f(z) = c + sum_k A_k sum_{g in G} chi_{r_k}(d(z, g c_k)),
//   chi_r(t) = exp(1 - 1 / (1 - (t/r)^2)) on [0, r), 0 beyond.
// The orbit sums are finite, so invariance is exact rather than truncated.

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "maglab/errors.hpp"
#include "maglab/jet.hpp"
#include "maglab/surface.hpp"

namespace maglab {

struct Bump {
  Point center;
  double radius = 0.5;
  double amplitude = 0.0;
};

namespace detail {

/// Taylor series of q(u) = d^2 = (2 asinh(sqrt u))^2 about u0 >= 0, where
/// u = sinh^2(d/2). q is analytic at u = 0 even though d is not.
inline Series distance_squared_series(double u0) {
  Series s;
  if (u0 < 0.25) {
    std::array<double, 64> pows{};
    pows[0] = 1.0;
    for (std::size_t k = 1; k < pows.size(); ++k) pows[k] = pows[k - 1] * u0;
    double a = 4.0;  // coefficient of u^n, starting at n = 1
    for (int n = 1; n + 3 < static_cast<int>(pows.size()); ++n) {
      s.c[0] += a * pows[n];
      s.c[1] += a * n * pows[n - 1];
      if (n >= 2) s.c[2] += a * (n * (n - 1) / 2) * pows[n - 2];
      if (n >= 3) s.c[3] += a * (n * (n - 1) * (n - 2) / 6) * pows[n - 3];
      if (n > 3 && std::abs(a) * n * n * n * pows[n - 3] < 1e-22) break;
      a *= -4.0 * n * n / ((2.0 * n + 1.0) * (2.0 * n + 2.0));
    }
    return s;
  }
  // q satisfies 2u(1+u) q'' + (1+2u) q' = 4; differentiating gives the rest.
  const double w = std::asinh(std::sqrt(u0));
  const double p = u0 * (1.0 + u0);
  const double q1 = 4.0 * w / std::sqrt(p);
  const double q2 = (4.0 - (1.0 + 2.0 * u0) * q1) / (2.0 * p);
  const double q3 = -(3.0 * (1.0 + 2.0 * u0) * q2 + 2.0 * q1) / (2.0 * p);
  s.c = {4.0 * w * w, q1, q2 / 2.0, q3 / 6.0};
  return s;
}

/// sinh^2(d(z, c)/2) as a jet in z.
inline Jet half_sinh_sq_jet(Point z, Point c, int order) {
  const Jet x = Jet::variable(0, z.real(), order);
  const Jet y = Jet::variable(1, z.imag(), order);
  const Jet dx = x - c.real();
  const Jet dy = y - c.imag();
  const Jet num = dx * dx + dy * dy;
  const Jet den = (1.0 - (x * x + y * y)) * (1.0 - std::norm(c));
  return num * reciprocal(den);
}

/// chi_r(d(z, c)) as a jet in z; zero outside the support.
inline Jet bump_jet(Point z, Point c, double radius, int order) {
  const Jet u = half_sinh_sq_jet(z, c, order);
  const double s = std::sinh(radius / 2.0);
  if (u.value() >= s * s) return Jet(0.0, order);
  const double r2 = radius * radius;
  const Series q = distance_squared_series(u.value());
  const Series gap = r2 + (-1.0) * q;
  if (r2 / gap.c[0] > 700.0) return Jet(0.0, order);
  const Series chi = exp(1.0 + (-r2) * reciprocal(gap));
  return compose(u, chi.c);
}

}  // namespace detail

inline double bump_profile(double t, double radius) {
  if (t >= radius) return 0.0;
  const double s = t / radius;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

class ScalarField {
 public:
  ScalarField() = default;

  static ScalarField constant(double c) {
    ScalarField f;
    f.constant_ = c;
    return f;
  }

  static ScalarField averaged_bump(SurfacePtr surface, Point center, double radius, double amplitude) {
    if (!(radius > 0.0) || radius > kMaxBumpRadius)
      throw InputError("averaged_bump: radius must lie in (0, " + std::to_string(kMaxBumpRadius) + "]");
    require_in_disk(center, "averaged_bump");
    ScalarField f;
    f.surface_ = surface;
    Entry e;
    e.bump = {center, radius, amplitude};
    e.translates = std::make_shared<const std::vector<Point>>(surface->translates_near_domain(center, radius));
    f.entries_.push_back(std::move(e));
    return f;
  }

  static ScalarField from_bumps(SurfacePtr surface, const std::vector<Bump>& bumps, double constant = 0.0) {
    ScalarField f = ScalarField::constant(constant);
    for (const auto& b : bumps) f = f + averaged_bump(surface, b.center, b.radius, b.amplitude);
    return f;
  }

  double constant_term() const { return constant_; }
  std::vector<Bump> bumps() const {
    std::vector<Bump> out;
    for (const auto& e : entries_) out.push_back(e.bump);
    return out;
  }
  bool is_constant() const {
    for (const auto& e : entries_)
      if (e.bump.amplitude != 0.0) return false;
    return true;
  }
  const SurfacePtr& surface() const { return surface_; }

  Jet jet(Point z, int order) const {
    Jet result(constant_, order);
    if (entries_.empty()) return result;
    require_in_disk(z, "ScalarField");
    const auto [w, h] = surface_->normalize(z);
    const bool moved = h.b() != Complex(0.0) || h.a() != Complex(1.0);
    const MobiusTransform hinv = h.inverse();
    for (const auto& e : entries_) {
      if (e.bump.amplitude == 0.0) continue;
      const double s = std::sinh(e.bump.radius / 2.0);
      const double cut = s * s;
      for (const Point& t : *e.translates) {
        if (half_sinh_sq(w, t) >= cut) continue;
        const Point c = moved ? hinv.apply_unchecked(t) : t;
        Jet b = detail::bump_jet(z, c, e.bump.radius, order);
        b *= e.bump.amplitude;
        result += b;
      }
    }
    return result;
  }

  double value(Point z) const { return jet(z, 0).value(); }
  Vec2 gradient(Point z) const {
    const Jet j = jet(z, 1);
    return {j.dx(), j.dy()};
  }

  ScalarField scaled(double s) const {
    ScalarField f = *this;
    f.constant_ *= s;
    for (auto& e : f.entries_) e.bump.amplitude *= s;
    return f;
  }

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    ScalarField r = a;
    r.constant_ += b.constant_;
    if (!r.surface_) r.surface_ = b.surface_;
    r.entries_.insert(r.entries_.end(), b.entries_.begin(), b.entries_.end());
    return r;
  }
  friend ScalarField operator*(double s, const ScalarField& f) { return f.scaled(s); }
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b) { return a + b.scaled(-1.0); }

 private:
  struct Entry {
    Bump bump;
    std::shared_ptr<const std::vector<Point>> translates;
  };

  double constant_ = 0.0;
  SurfacePtr surface_;
  std::vector<Entry> entries_;
};

}  // namespace maglab
