#pragma once

// The regular octagon fundamental domain and hyperbolic-area quadrature over it.
//
// The eight fan triangles from the centre are split at hyperbolic midpoints.
// Each small triangle is moved by an isometry so that it sits around the
// origin, where it is an exact straight triangle in the Klein model with a
// nearly flat area density dx dy / (1 - |x|^2)^{3/2}; a collapsed Gauss rule
// is applied there and mapped back.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "maglab/mobius.hpp"

namespace maglab {

inline Point klein_to_disk(Complex k) { return k / (1.0 + std::sqrt(1.0 - std::norm(k))); }
inline Complex disk_to_klein(Point z) { return 2.0 * z / (1.0 + std::norm(z)); }

inline Point geodesic_midpoint(Point z, Point w) {
  const MobiusTransform to = MobiusTransform::translation_to(z);
  const Point u = to.inverse().apply_unchecked(w);
  const double r = std::abs(u);
  if (r == 0.0) return z;
  // tanh(d/4) with d = 2 atanh(r)
  return to.apply_unchecked(u / r * std::tanh(0.5 * std::atanh(r)));
}

/// Gauss-Legendre nodes and weights on [0, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = t;
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - t);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
  return {x, w};
}

struct QuadratureRule {
  std::vector<Point> nodes;     // disk coordinates
  std::vector<double> weights;  // include the hyperbolic area element
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool accuracy_warning = false;
};

struct DomainOptions {
  int gauss_points = 8;   // per direction, collapsed onto each triangle
  int level = 3;          // midpoint subdivisions of the eight fan triangles
  double tolerance = 1e-6;
};

class FundamentalDomain {
 public:
  explicit FundamentalDomain(DomainOptions opts = {}) : opts_(opts) {
    const double r = std::pow(2.0, -0.25);
    for (int j = 0; j < 8; ++j) vertices_[j] = std::polar(r, std::numbers::pi / 8.0 + j * std::numbers::pi / 4.0);
    coarse_ = build_rule(opts_.level);
    fine_ = build_rule(opts_.level + 1);
  }

  const DomainOptions& options() const { return opts_; }
  const std::array<Point, 8>& vertices() const { return vertices_; }

  double circumradius() const { return hyperbolic_distance(0.0, vertices_[0]); }
  /// Distance from the centre to the side midpoints.
  double inradius() const {
    const Point mid_klein = 0.5 * (disk_to_klein(vertices_[0]) + disk_to_klein(vertices_[7]));
    return hyperbolic_distance(0.0, klein_to_disk(mid_klein));
  }

  /// Interior angle at vertex j between the two geodesic sides meeting there.
  double interior_angle(int j) const {
    const Point v = vertices_[j];
    const MobiusTransform to_origin = MobiusTransform::translation_to(v).inverse();
    const Point prev = to_origin(vertices_[(j + 7) % 8]);
    const Point next = to_origin(vertices_[(j + 1) % 8]);
    double ang = std::abs(std::arg(next / prev));
    return ang;
  }

  /// Geodesic fan triangles (disk coordinates) after `level` midpoint subdivisions.
  std::vector<std::array<Point, 3>> triangulation(int level) const {
    std::vector<std::array<Point, 3>> tris;
    for (int j = 0; j < 8; ++j) tris.push_back({Point(0.0), vertices_[j], vertices_[(j + 1) % 8]});
    for (int l = 0; l < level; ++l) {
      std::vector<std::array<Point, 3>> next;
      next.reserve(tris.size() * 4);
      for (const auto& t : tris) {
        const Point m01 = geodesic_midpoint(t[0], t[1]), m12 = geodesic_midpoint(t[1], t[2]),
                    m20 = geodesic_midpoint(t[2], t[0]);
        next.push_back({t[0], m01, m20});
        next.push_back({m01, t[1], m12});
        next.push_back({m20, m12, t[2]});
        next.push_back({m12, m20, m01});
      }
      tris = std::move(next);
    }
    return tris;
  }

  const QuadratureRule& rule() const { return fine_; }
  const QuadratureRule& coarse_rule() const { return coarse_; }

  /// Integral of f over the octagon against the hyperbolic area; the value is
  /// the finer of two subdivision levels and the estimate is their difference.
  template <class F>
  QuadratureResult integrate(F&& integrand) const {
    auto sum = [&](const QuadratureRule& r) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * integrand(r.nodes[i]);
      return s;
    };
    QuadratureResult res;
    const double coarse = sum(coarse_);
    res.value = sum(fine_);
    res.error_estimate = std::abs(res.value - coarse);
    res.accuracy_warning = res.error_estimate > opts_.tolerance * std::max(1.0, std::abs(res.value));
    return res;
  }

  /// Integral on one fixed rule, for callers that combine several integrands.
  template <class F>
  double integrate_on(const QuadratureRule& r, F&& integrand) const {
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * integrand(r.nodes[i]);
    return s;
  }

  /// Deterministic sample points: barycentric lattice of spacing 1/n on each
  /// fan triangle (Klein coordinates), including the boundary.
  std::vector<Point> lattice(int n) const {
    std::vector<Point> pts;
    pts.push_back(0.0);
    for (int j = 0; j < 8; ++j) {
      const Complex a = disk_to_klein(vertices_[j]), b = disk_to_klein(vertices_[(j + 1) % 8]);
      for (int i = 1; i <= n; ++i)
        for (int k = 0; k < i; ++k) {
          const double s = static_cast<double>(i) / n, t = static_cast<double>(k) / i;
          pts.push_back(klein_to_disk(s * ((1.0 - t) * a + t * b)));
        }
    }
    return pts;
  }

 private:
  QuadratureRule build_rule(int level) const {
    const auto [gx, gw] = gauss_legendre(opts_.gauss_points);
    QuadratureRule r;
    for (const auto& t : triangulation(level)) {
      const Point centre = klein_to_disk((disk_to_klein(t[0]) + disk_to_klein(t[1]) + disk_to_klein(t[2])) / 3.0);
      const MobiusTransform back = MobiusTransform::translation_to(centre);
      const MobiusTransform there = back.inverse();
      std::array<Complex, 3> k;
      for (int i = 0; i < 3; ++i) k[i] = disk_to_klein(there.apply_unchecked(t[i]));
      const Complex e1 = k[1] - k[0], e2 = k[2] - k[1];
      const double jac = std::abs(e1.real() * e2.imag() - e1.imag() * e2.real());
      for (std::size_t i = 0; i < gx.size(); ++i)
        for (std::size_t j = 0; j < gx.size(); ++j) {
          const double u = gx[i], v = gx[j];
          const Complex q = k[0] + u * e1 + u * v * e2;
          const double density = std::pow(1.0 - std::norm(q), -1.5);
          r.nodes.push_back(back.apply_unchecked(klein_to_disk(q)));
          r.weights.push_back(gw[i] * gw[j] * u * jac * density);
        }
    }
    return r;
  }

  DomainOptions opts_;
  std::array<Point, 8> vertices_;
  QuadratureRule coarse_;
  QuadratureRule fine_;
};

inline QuadratureResult domain_quadrature(const FundamentalDomain& fd, const auto& integrand) {
  return fd.integrate(integrand);
}

}  // namespace maglab
