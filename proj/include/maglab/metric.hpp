#pragma once

// Conformal metrics g = e^{2f} g_hyp on the disk, written as g = e^{2 sigma} delta
// with sigma = f + log 2 - log(1 - |z|^2).

#include <array>
#include <cmath>
#include <numbers>

#include "maglab/scalar_field.hpp"
#include "maglab/tensor_fields.hpp"

namespace maglab {

/// Gamma^k_ij stored as gamma[k][i][j].
struct Christoffel {
  double gamma[2][2][2] = {};

  double operator()(int k, int i, int j) const { return gamma[k][i][j]; }
  /// Gamma^k_ij u^i v^j.
  Vec2 contract(const Vec2& u, const Vec2& v) const {
    Vec2 r = Vec2::Zero();
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r[k] += gamma[k][i][j] * u[i] * v[j];
    return r;
  }
};

/// For g = e^{2 sigma} delta: Gamma^k_ij = delta_ik s_j + delta_jk s_i - delta_ij s_k.
inline Christoffel conformal_christoffel(const Vec2& grad_sigma) {
  Christoffel c;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        c.gamma[k][i][j] = (i == k ? grad_sigma[j] : 0.0) + (j == k ? grad_sigma[i] : 0.0) -
                           (i == j ? grad_sigma[k] : 0.0);
  return c;
}

/// Jet form of the same, components as jets of one order below sigma.
struct ChristoffelJet {
  std::array<std::array<std::array<Jet, 2>, 2>, 2> gamma;

  static ChristoffelJet from_sigma(const Jet& sigma) {
    const std::array<Jet, 2> s = {sigma.partial(0), sigma.partial(1)};
    const Jet zero(0.0, s[0].order());
    ChristoffelJet c;
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          Jet v = zero;
          if (i == k) v += s[j];
          if (j == k) v += s[i];
          if (i == j) v -= s[k];
          c.gamma[k][i][j] = v;
        }
    return c;
  }
};

class ConformalMetric {
 public:
  ConformalMetric() = default;
  explicit ConformalMetric(ScalarField f) : f_(std::move(f)) {}

  const ScalarField& f() const { return f_; }
  bool is_hyperbolic() const { return f_.is_constant() && f_.constant_term() == 0.0; }

  /// log of the conformal factor relative to dx^2 + dy^2.
  Jet sigma(Point z, int order) const {
    require_in_disk(z, "ConformalMetric");
    const Jet x = Jet::variable(0, z.real(), order);
    const Jet y = Jet::variable(1, z.imag(), order);
    return f_.jet(z, order) + (std::numbers::ln2 - log(1.0 - (x * x + y * y)));
  }
  double sigma_value(Point z) const {
    require_in_disk(z, "ConformalMetric");
    return f_.value(z) + std::numbers::ln2 - std::log1p(-std::norm(z));
  }
  /// (sigma, grad sigma) in one evaluation.
  std::pair<double, Vec2> sigma_gradient(Point z) const {
    const Jet s = sigma(z, 1);
    return {s.value(), Vec2(s.dx(), s.dy())};
  }

  /// e^{2 sigma}, so that g_ij = factor * delta_ij.
  double factor(Point z) const { return std::exp(2.0 * sigma_value(z)); }
  Jet factor_jet(Point z, int order) const { return exp(2.0 * sigma(z, order)); }
  Mat2 components(Point z) const { return factor(z) * Mat2::Identity(); }

  Christoffel christoffel(Point z) const { return conformal_christoffel(sigma_gradient(z).second); }
  ChristoffelJet christoffel_jet(Point z, int order) const { return ChristoffelJet::from_sigma(sigma(z, order + 1)); }

  /// K = -e^{-2 sigma} Laplacian(sigma) = e^{-2f}(-1 - Delta_hyp f).
  double gaussian_curvature(Point z) const {
    const Jet s = sigma(z, 2);
    return -std::exp(-2.0 * s.value()) * (s.d(2, 0) + s.d(0, 2));
  }

  Vec2 lower(Point z, const Vec2& v) const { return factor(z) * v; }
  Vec2 raise(Point z, const Vec2& covector) const { return covector / factor(z); }
  double inner(Point z, const Vec2& v, const Vec2& w) const { return factor(z) * v.dot(w); }
  double norm(Point z, const Vec2& v) const { return std::exp(sigma_value(z)) * v.norm(); }
  /// Inner product of covectors.
  double co_inner(Point z, const Vec2& a, const Vec2& b) const { return a.dot(b) / factor(z); }

  /// Riemannian area density relative to dx dy.
  double area_density(Point z) const { return factor(z); }

  /// Area of the surface, by quadrature over the octagon.
  QuadratureResult volume(const FundamentalDomain& fd) const {
    // dvol_g = e^{2f} dvol_hyp
    return fd.integrate([&](Point z) { return std::exp(2.0 * f_.value(z)); });
  }

 private:
  ScalarField f_;
};

namespace detail {

/// s * g as a symmetric tensor field.
class MetricMultiple final : public SymTensorSource {
 public:
  MetricMultiple(ConformalMetric g, ScalarField s) : g_(std::move(g)), s_(std::move(s)) {}
  SymTensorJet jet(Point z, int order) const override {
    const Jet v = s_.jet(z, order) * g_.factor_jet(z, order);
    return {v, Jet(0.0, order), v};
  }

 private:
  ConformalMetric g_;
  ScalarField s_;
};

}  // namespace detail

inline SymTensorField metric_multiple(const ConformalMetric& g, ScalarField s) {
  return SymTensorField(std::make_shared<const detail::MetricMultiple>(g, std::move(s)));
}

inline SymTensorField metric_tensor(const ConformalMetric& g) { return metric_multiple(g, ScalarField::constant(1.0)); }

}  // namespace maglab
