#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "maglab/metric.hpp"
#include "maglab/scalar_field.hpp"
#include "maglab/tensor_fields.hpp"

using namespace maglab;

namespace {

const SurfacePtr& surface() {
  static const SurfacePtr s = make_surface();
  return s;
}

Point random_point(std::mt19937_64& rng, double rmax = 0.9) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(rmax * std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng));
}

ScalarField sample_field(double scale = 1.0) {
  return ScalarField::from_bumps(surface(), {{Point(0.2, 0.1), 0.9, 0.7 * scale},
                                             {Point(-0.5, 0.3), 0.6, -0.4 * scale},
                                             {Point(0.6, -0.45), 1.0, 0.3 * scale}});
}

ScalarField other_field() {
  return ScalarField::from_bumps(surface(), {{Point(-0.1, -0.3), 0.8, 0.5}, {Point(0.45, 0.5), 0.7, 0.8}});
}

// Brute-force orbit sum over a large enumerated ball, independent of the
// normalization and translate cache used by ScalarField.
double brute_force_bump(Point z, Point c, double radius) {
  static const auto els = enumerate_group(surface()->group(), 9.0);
  double s = 0.0;
  for (const auto& g : els) s += bump_profile(hyperbolic_distance(z, g.matrix.apply_unchecked(c)), radius);
  return s;
}

// Central finite-difference derivative d^{i+j}/dx^i dy^j of a scalar function.
template <class F>
double fd(F&& f, Point z, int i, int j, double h) {
  if (i > 0) return (fd(f, z + Point(h, 0.0), i - 1, j, h) - fd(f, z - Point(h, 0.0), i - 1, j, h)) / (2.0 * h);
  if (j > 0) return (fd(f, z + Point(0.0, h), i, j - 1, h) - fd(f, z - Point(0.0, h), i, j - 1, h)) / (2.0 * h);
  return f(z);
}

// Richardson-extrapolated version of the above, error O(h^4).
template <class F>
double fd_rich(F&& f, Point z, int i, int j, double h) {
  return (4.0 * fd(f, z, i, j, h / 2.0) - fd(f, z, i, j, h)) / 3.0;
}

void expect_rel(double got, double want, double rel, double floor, const std::string& what) {
  EXPECT_LE(std::abs(got - want), rel * std::abs(want) + floor) << what << ": got " << got << " want " << want;
}

}  // namespace

TEST(DistanceSeries, MatchesClosedFormOnBothBranches) {
  for (double u0 : {0.0, 1e-6, 0.05, 0.2, 0.2499, 0.2501, 0.7, 3.0}) {
    const Series s = detail::distance_squared_series(u0);
    auto q = [](double u) { return std::pow(2.0 * std::asinh(std::sqrt(u)), 2); };
    EXPECT_NEAR(s.c[0], q(u0), 1e-14);
    if (u0 > 1e-3) {
      const double h = 1e-4 * std::max(u0, 0.01);
      EXPECT_NEAR(s.c[1], (q(u0 + h) - q(u0 - h)) / (2 * h), 1e-6);
      EXPECT_NEAR(2.0 * s.c[2], (q(u0 + h) - 2 * q(u0) + q(u0 - h)) / (h * h), 1e-3);
    } else {
      EXPECT_NEAR(s.c[1], 4.0, 1e-5);
      EXPECT_NEAR(s.c[2], -4.0 / 3.0, 1e-5);
    }
  }
  // Continuity across the branch switch.
  const Series a = detail::distance_squared_series(0.25 - 1e-12), b = detail::distance_squared_series(0.25 + 1e-12);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(a.c[k], b.c[k], 1e-9);
}

TEST(ScalarField, ZeroAmplitudeIsZero) {
  const auto f = ScalarField::averaged_bump(surface(), Point(0.1, 0.2), 0.8, 0.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(f.value(random_point(rng)), 0.0);
  EXPECT_TRUE(f.is_constant());
}

TEST(ScalarField, ValueAtCentreIsAmplitude) {
  for (double r : {0.3, 0.7, 1.0}) {
    const auto f = ScalarField::averaged_bump(surface(), Point(0.35, -0.2), r, 1.7);
    EXPECT_NEAR(f.value(Point(0.35, -0.2)), 1.7, 1e-14);
  }
  // The nearest other translate of any centre is at least 2 * inradius > 2.
  for (const auto& g : enumerate_group(surface()->group(), 4.0))
    if (!g.word.empty()) {
      EXPECT_GT(g.displacement, 2.0 * kMaxBumpRadius);
    }
}

TEST(ScalarField, RadiusAboveBoundIsInputError) {
  EXPECT_THROW(ScalarField::averaged_bump(surface(), 0.0, 1.2, 1.0), InputError);
  EXPECT_THROW(ScalarField::averaged_bump(surface(), 0.0, 0.0, 1.0), InputError);
  EXPECT_THROW(ScalarField::averaged_bump(surface(), Point(1.0, 0.0), 0.5, 1.0), DomainError);
}

TEST(ScalarField, MatchesBruteForceOrbitSum) {
  std::mt19937_64 rng(2);
  const Point c(0.55, 0.4);
  const auto f = ScalarField::averaged_bump(surface(), c, 1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Point z = random_point(rng, 0.97);
    EXPECT_NEAR(f.value(z), brute_force_bump(z, c, 1.0), 1e-12);
  }
}

TEST(ScalarField, ExactlyInvariant) {
  std::mt19937_64 rng(3);
  const auto f = sample_field();
  for (int i = 0; i < 100; ++i) {
    const Point z = random_point(rng, 0.9);
    const auto& g = surface()->group().letter(i % 8);
    const Point gz = g(z);
    EXPECT_NEAR(f.value(gz), f.value(z), 1e-12);
  }
}

TEST(ScalarField, JetsMatchFiniteDifferences) {
  std::mt19937_64 rng(4);
  const auto f = sample_field();
  auto val = [&](Point z) { return f.value(z); };
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    const Point z = random_point(rng, 0.8);
    const Jet j = f.jet(z, 3);
    if (std::abs(j.value()) < 1e-3) continue;
    ++checked;
    for (auto [a, b] : {std::pair{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}) {
      const double want = fd(val, z, a, b, 1e-5);
      expect_rel(j.d(a, b), want, 1e-5, 1e-5, "d" + std::to_string(a) + std::to_string(b));
    }
    // Third derivatives against differences of the analytic second derivatives.
    for (auto [a, b] : {std::pair{2, 0}, {1, 1}, {0, 2}}) {
      auto second = [&](Point w) { return f.jet(w, 2).d(a, b); };
      expect_rel(j.d(a + 1, b), fd_rich(second, z, 1, 0, 1e-4), 1e-5, 1e-4, "third x");
      expect_rel(j.d(a, b + 1), fd_rich(second, z, 0, 1, 1e-4), 1e-5, 1e-4, "third y");
    }
  }
  EXPECT_GT(checked, 10);
}

TEST(ScalarField, LinearOperations) {
  const auto f = sample_field(), g = other_field();
  const auto h = 2.0 * f - g + ScalarField::constant(0.5);
  const Point z(0.1, -0.4);
  EXPECT_NEAR(h.value(z), 2.0 * f.value(z) - g.value(z) + 0.5, 1e-14);
}

TEST(Metric, HyperbolicChristoffelsVanishAtOrigin) {
  const ConformalMetric g;
  const auto c = g.christoffel(0.0);
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_EQ(c(k, i, j), 0.0);
}

TEST(Metric, ChristoffelsMatchMetricDerivatives) {
  // Gamma^k_ij = g^{kl} (d_i g_jl + d_j g_il - d_l g_ij) / 2 from differenced components.
  const ConformalMetric g(sample_field(0.3));
  std::mt19937_64 rng(5);
  for (int n = 0; n < 20; ++n) {
    const Point z = random_point(rng, 0.8);
    const auto c = g.christoffel(z);
    const double h = 1e-6;
    const double dl[2] = {(g.factor(z + Point(h, 0)) - g.factor(z - Point(h, 0))) / (2 * h),
                          (g.factor(z + Point(0, h)) - g.factor(z - Point(0, h))) / (2 * h)};
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const double want =
              ((i == k ? dl[j] : 0.0) + (j == k ? dl[i] : 0.0) - (i == j ? dl[k] : 0.0)) / (2.0 * g.factor(z));
          EXPECT_NEAR(c(k, i, j), want, 1e-6 * (1.0 + std::abs(want)));
          EXPECT_EQ(c(k, i, j), c(k, j, i));
        }
  }
}

TEST(Metric, CurvatureOfConstantFactors) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const Point z = random_point(rng, 0.95);
    EXPECT_NEAR(ConformalMetric().gaussian_curvature(z), -1.0, 1e-10);
    EXPECT_NEAR(ConformalMetric(ScalarField::constant(0.3)).gaussian_curvature(z), -std::exp(-0.6), 1e-10);
  }
}

TEST(Metric, CurvatureMatchesFiniteDifferences) {
  // K = -Laplacian(log lambda) / (2 lambda) for g = lambda delta, lambda differenced.
  const ConformalMetric g(sample_field(0.5));
  std::mt19937_64 rng(7);
  for (int n = 0; n < 30; ++n) {
    const Point z = random_point(rng, 0.7);
    auto loglam = [&](Point w) { return std::log(g.factor(w)); };
    const double lap = fd_rich(loglam, z, 2, 0, 1e-3) + fd_rich(loglam, z, 0, 2, 1e-3);
    EXPECT_NEAR(g.gaussian_curvature(z), -lap / (2.0 * g.factor(z)), 1e-4);
  }
}

TEST(Metric, ParallelTransportHolonomy) {
  // Transporting a vector around a small coordinate square rotates it by
  // K * area (area measured in g), up to O(size^3).
  const ConformalMetric g(sample_field(0.5));
  const Point z0(0.25, -0.15);
  const double s = 2e-3;
  auto transport = [&](Vec2 v, Point a, Point b) {
    const int n = 200;
    const Vec2 d = to_vec(b - a) / n;
    for (int i = 0; i < n; ++i) {
      auto rhs = [&](Point p, const Vec2& w) { return Vec2(-g.christoffel(p).contract(d, w)); };
      const Point p = a + (b - a) * (double(i) / n);
      const Point pm = p + 0.5 * to_complex(d), pe = p + to_complex(d);
      const Vec2 k1 = rhs(p, v), k2 = rhs(pm, v + 0.5 * k1), k3 = rhs(pm, v + 0.5 * k2), k4 = rhs(pe, v + k3);
      v += (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
    }
    return v;
  };
  const Point c[4] = {z0, z0 + Point(s, 0), z0 + Point(s, s), z0 + Point(0, s)};
  Vec2 v(1.0, 0.0);
  for (int i = 0; i < 4; ++i) v = transport(v, c[i], c[(i + 1) % 4]);
  const double angle = std::atan2(v.y(), v.x());
  const Point mid = z0 + Point(s / 2, s / 2);
  const double area = g.factor(mid) * s * s;
  EXPECT_NEAR(angle, g.gaussian_curvature(mid) * area, 1e-3 * std::abs(g.gaussian_curvature(mid) * area));
  EXPECT_NEAR(g.norm(z0, v), g.norm(z0, Vec2(1.0, 0.0)), 1e-10);
}

TEST(Metric, GaussBonnet) {
  for (double scale : {0.0, 0.5, 1.0}) {
    const ConformalMetric g(sample_field(scale));
    const auto r = surface()->domain().integrate(
        [&](Point z) { return g.gaussian_curvature(z) * std::exp(2.0 * g.f().value(z)); });
    EXPECT_NEAR(r.value, -4.0 * std::numbers::pi, 1e-3) << "scale " << scale;
  }
}

TEST(Metric, MusicalIsomorphisms) {
  const ConformalMetric g(sample_field());
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Point z = random_point(rng);
    const Vec2 xi(n(rng), n(rng)), v(n(rng), n(rng));
    EXPECT_LT((g.lower(z, g.raise(z, xi)) - xi).norm(), 1e-12 * xi.norm());
    EXPECT_GT(g.inner(z, v, v), 0.0);
    EXPECT_NEAR(g.inner(z, v, g.raise(z, xi)), xi.dot(v), 1e-10 * (1.0 + std::abs(xi.dot(v))));
  }
  EXPECT_NEAR(ConformalMetric().norm(0.0, Vec2(0.3, -0.4)), 2.0 * 0.5, 1e-15);
}

TEST(OneForm, ExactFormIsClosed) {
  const auto a = OneFormField::exact(sample_field());
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const Point z = random_point(rng);
    EXPECT_NEAR(a.exterior_derivative(z), 0.0, 1e-10);
    // Generic path through the component jets.
    const CovectorJet j = a.jet(z, 1);
    EXPECT_NEAR(j.c[1].dx() - j.c[0].dy(), 0.0, 1e-10);
  }
}

TEST(OneForm, UdvExteriorDerivativeIsLeibniz) {
  const auto u = sample_field(), v = other_field();
  const auto a = OneFormField::udv({{1.5, u, v}});
  std::mt19937_64 rng(10);
  for (int i = 0; i < 50; ++i) {
    const Point z = random_point(rng);
    const Vec2 du = u.gradient(z), dv = v.gradient(z);
    const double want = 1.5 * (du.x() * dv.y() - du.y() * dv.x());
    EXPECT_NEAR(a.exterior_derivative(z), want, 1e-12 * (1.0 + std::abs(want)));
    // Against differenced components.
    auto a1 = [&](Point w) { return a.value(w).x(); };
    auto a2 = [&](Point w) { return a.value(w).y(); };
    EXPECT_NEAR(a.exterior_derivative(z), fd(a2, z, 1, 0, 1e-6) - fd(a1, z, 0, 1, 1e-6), 1e-6 * (1.0 + std::abs(want)));
  }
}

TEST(OneForm, JetsMatchFiniteDifferences) {
  const auto a = OneFormField::udv({{0.8, sample_field(), other_field()}}, other_field());
  std::mt19937_64 rng(11);
  for (int n = 0; n < 30; ++n) {
    const Point z = random_point(rng, 0.8);
    const CovectorJet j = a.jet(z, 2);
    for (int k = 0; k < 2; ++k) {
      auto comp = [&](Point w) { return a.value(w)[k]; };
      for (auto [p, q] : {std::pair{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}})
        expect_rel(j.c[k].d(p, q), fd(comp, z, p, q, 1e-5), 1e-5, 1e-5, "alpha jet");
    }
  }
}

TEST(OneForm, PullbackInvariance) {
  const auto a = OneFormField::udv({{0.8, sample_field(), other_field()}}, sample_field());
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Point z = random_point(rng, 0.85);
    const auto& g = surface()->group().letter(i % 8);
    const Vec2 v(n(rng), n(rng));
    const double here = a.value(z).dot(v);
    const double there = a.value(g(z)).dot(g.push(z, v));
    EXPECT_NEAR(there, here, 1e-10 * (1.0 + std::abs(here)));
  }
}

namespace {

// d(alpha) = c dx^dy; against hyperbolic area the density is c / (2/(1-|z|^2))^2.
QuadratureResult integrate_exterior_derivative(const OneFormField& a, bool absolute = false) {
  return surface()->domain().integrate([&](Point z) {
    const double lam = disk_factor(z);
    const double c = a.exterior_derivative(z) / (lam * lam);
    return absolute ? std::abs(c) : c;
  });
}

}  // namespace

TEST(OneForm, ExteriorDerivativeIntegratesToZero) {
  const auto u = ScalarField::from_bumps(surface(), {{Point(0.2, 0.1), 1.0, 0.7}, {Point(-0.5, 0.3), 1.0, -0.4}});
  const auto v = ScalarField::from_bumps(surface(), {{Point(-0.1, -0.3), 1.0, 0.5}, {Point(0.45, 0.5), 1.0, 0.8}});
  const auto a = OneFormField::udv({{1.0, u, v}, {-0.5, v, 2.0 * u}});
  EXPECT_GT(integrate_exterior_derivative(a, true).value, 0.5);
  EXPECT_NEAR(integrate_exterior_derivative(a).value, 0.0, 1e-6);
}

TEST(OneForm, ExactnessDefectIsWithinReportedQuadratureError) {
  // Narrow bumps are steep, so the defect is pure quadrature error and the
  // level-to-level estimate must account for it.
  const auto a = OneFormField::udv({{1.0, sample_field(), other_field()}, {-0.5, other_field(), sample_field(2.0)}});
  const auto r = integrate_exterior_derivative(a);
  EXPECT_LT(std::abs(r.value), 1e-5);
  EXPECT_LE(std::abs(r.value), 10.0 * r.error_estimate + 1e-12);
}

TEST(OneForm, LinearCombinationsStayExact) {
  const auto a = OneFormField::udv({{1.0, sample_field(), other_field()}});
  const auto b = OneFormField::exact(other_field());
  const auto c = 2.0 * a - b;
  const Point z(-0.2, 0.33);
  EXPECT_LT((c.value(z) - (2.0 * a.value(z) - b.value(z))).norm(), 1e-13);
  EXPECT_NEAR(c.exterior_derivative(z), 2.0 * a.exterior_derivative(z), 1e-12);
  EXPECT_TRUE(OneFormField().is_zero());
  EXPECT_EQ(OneFormField().exterior_derivative(z), 0.0);
}

TEST(SymTensor, ProductIsSymmetricAndInvariant) {
  const auto p = SymTensorField::sym_product(sample_field(), other_field(), 0.7) +
                 metric_multiple(ConformalMetric(sample_field(0.2)), other_field());
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Point z = random_point(rng, 0.85);
    const auto& g = surface()->group().letter(i % 8);
    const Vec2 v(n(rng), n(rng)), w(n(rng), n(rng));
    const Mat2 pz = p.value(z), pgz = p.value(g(z));
    EXPECT_EQ(pz(0, 1), pz(1, 0));
    const double here = v.dot(pz * w);
    const double there = g.push(z, v).dot(pgz * g.push(z, w));
    EXPECT_NEAR(there, here, 1e-10 * (1.0 + std::abs(here)));
  }
}

TEST(SymTensor, JetsMatchFiniteDifferences) {
  const auto p = SymTensorField::sym_product(sample_field(), other_field());
  const Point z(0.3, 0.2);
  const auto j = p.jet(z, 1);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      auto comp = [&](Point w) { return p.value(w)(a, b); };
      expect_rel(j.at(a, b).dx(), fd(comp, z, 1, 0, 1e-5), 1e-5, 1e-6, "p_x");
      expect_rel(j.at(a, b).dy(), fd(comp, z, 0, 1, 1e-5), 1e-5, 1e-6, "p_y");
    }
}
