#pragma once

// Magnetic X-ray transform along closed orbits, the potential operator
// D_mu[xi, phi] = [D xi, Y xi + d phi], its formal adjoint
// D_mu^*[p, q] = [-tr(nabla p) - Y q, -tr(nabla q)], and the identities tying
// them together.
//
// Conventions: D is the symmetrized covariant derivative; (Y xi)(v) = xi(Y v);
// tr(nabla p)_j = g^{ik} (nabla_i p)_{kj}. L^2 products use dvol_g.

#include <cmath>
#include <memory>
#include <vector>

#include "maglab/flow.hpp"
#include "maglab/shooting.hpp"
#include "maglab/surface.hpp"

namespace maglab {

struct TensorPair {
  SymTensorField p;
  OneFormField q;
};

struct PotentialPair {
  OneFormField xi;
  ScalarField phi;
};

namespace detail {

inline void require_same_system(const MagneticSystem& sys, const ClosedOrbit& orbit, const char* what) {
  if (orbit.system_uid != sys.uid())
    throw InputError(std::string(what) + ": orbit of " + orbit.word.str() + " belongs to a different system");
}

template <class F>
double orbit_integral(const ClosedOrbit& orbit, F&& integrand) {
  std::vector<double> f;
  f.reserve(orbit.samples.size());
  for (const auto& s : orbit.samples) f.push_back(integrand(s.state));
  return simpson(f, orbit.step);
}

/// (D xi)_ij = (d_i xi_j + d_j xi_i) / 2 - Gamma^k_ij xi_k.
class SymmetricDerivative final : public SymTensorSource {
 public:
  SymmetricDerivative(ConformalMetric g, OneFormField xi) : g_(std::move(g)), xi_(std::move(xi)) {}
  SymTensorJet jet(Point z, int order) const override {
    const CovectorJet x = xi_.jet(z, order + 1);
    const ChristoffelJet gam = ChristoffelJet::from_sigma(g_.sigma(z, order + 1));
    const std::array<Jet, 2> xk = {x.c[0].truncated(order), x.c[1].truncated(order)};
    auto comp = [&](int i, int j) {
      Jet r = 0.5 * (x.c[j].partial(i) + x.c[i].partial(j));
      for (int k = 0; k < 2; ++k) r -= gam.gamma[k][i][j] * xk[k];
      return r;
    };
    return {comp(0, 0), comp(0, 1), comp(1, 1)};
  }

 private:
  ConformalMetric g_;
  OneFormField xi_;
};

/// Y xi + d phi, with (Y xi) = (b xi_y, -b xi_x) for Y v = b J v.
class TwistedDifferential final : public OneFormSource {
 public:
  TwistedDifferential(MagneticSystem sys, OneFormField xi, ScalarField phi)
      : sys_(std::move(sys)), xi_(std::move(xi)), phi_(std::move(phi)) {}
  CovectorJet jet(Point z, int order) const override {
    const Jet f = phi_.jet(z, order + 1);
    CovectorJet r{{f.partial(0), f.partial(1)}};
    if (!xi_.is_zero()) {
      const Jet b = sys_.field_strength_jet(z, order);
      const CovectorJet x = xi_.jet(z, order);
      r.c[0] += b * x.c[1];
      r.c[1] -= b * x.c[0];
    }
    return r;
  }

 private:
  MagneticSystem sys_;
  OneFormField xi_;
  ScalarField phi_;
};

}  // namespace detail

/// [D xi, Y xi + d phi] as fields (jets up to order 2).
inline TensorPair d_mu(const MagneticSystem& sys, const PotentialPair& pp) {
  TensorPair r;
  if (!pp.xi.is_zero()) r.p = SymTensorField(std::make_shared<const detail::SymmetricDerivative>(sys.metric(), pp.xi));
  if (!pp.xi.is_zero() || !pp.phi.is_constant())
    r.q = OneFormField(std::make_shared<const detail::TwistedDifferential>(sys, pp.xi, pp.phi));
  return r;
}

struct DivergenceValue {
  Vec2 one_form = Vec2::Zero();
  double scalar = 0.0;
};

/// Pointwise [-tr(nabla p) - Y q, -tr(nabla q)].
inline DivergenceValue d_mu_star(const MagneticSystem& sys, const TensorPair& pair, Point z) {
  const ConformalMetric& g = sys.metric();
  const Christoffel gam = g.christoffel(z);
  const double inv = std::exp(-2.0 * g.sigma_value(z));
  DivergenceValue r;
  if (!pair.p.is_zero()) {
    const SymTensorJet p = pair.p.jet(z, 1);
    for (int j = 0; j < 2; ++j) {
      double t = 0.0;
      for (int i = 0; i < 2; ++i) {
        t += i == 0 ? p.at(i, j).dx() : p.at(i, j).dy();
        for (int l = 0; l < 2; ++l) t -= gam(l, i, i) * p.at(l, j).value() + gam(l, i, j) * p.at(i, l).value();
      }
      r.one_form[j] -= inv * t;
    }
  }
  if (!pair.q.is_zero()) {
    const CovectorJet q = pair.q.jet(z, 1);
    const double b = sys.field_strength(z);
    r.one_form -= Vec2(b * q.c[1].value(), -b * q.c[0].value());
    double t = q.c[0].dx() + q.c[1].dy();
    for (int i = 0; i < 2; ++i)
      for (int l = 0; l < 2; ++l) t -= gam(l, i, i) * q.c[l].value();
    r.scalar = -inv * t;
  }
  return r;
}

/// I_2[p, q](c) = int_0^T p(gamma', gamma') + q(gamma') dt.
inline double xray_I2(const MagneticSystem& sys, const TensorPair& pair, const ClosedOrbit& orbit) {
  detail::require_same_system(sys, orbit, "xray_I2");
  return detail::orbit_integral(orbit, [&](const PhasePoint& s) {
    double v = 0.0;
    if (!pair.p.is_zero()) v += s.v.dot(pair.p.value(s.z) * s.v);
    if (!pair.q.is_zero()) v += pair.q.value(s.z).dot(s.v);
    return v;
  });
}

/// I_1[q, phi](c) = int_0^T q(gamma') + phi(gamma) dt.
inline double xray_I1(const MagneticSystem& sys, const OneFormField& q, const ScalarField& phi, const ClosedOrbit& orbit) {
  detail::require_same_system(sys, orbit, "xray_I1");
  return detail::orbit_integral(orbit, [&](const PhasePoint& s) {
    double v = phi.value(s.z);
    if (!q.is_zero()) v += q.value(s.z).dot(s.v);
    return v;
  });
}

/// Largest |D xi(v,v) + (Y xi + d phi)(v) - d/dt [xi(gamma') + phi(gamma)]| over
/// the phase points, the time derivative by centred differences along the flow.
/// With `extrapolate`, the centred quotients at step and step/2 are combined by
/// one Richardson step, removing the O(step^2) truncation term.
inline double flow_identity_check(const MagneticSystem& sys, const PotentialPair& pp, const std::vector<PhasePoint>& points,
                                  double step = 1e-4, bool extrapolate = true) {
  const TensorPair dm = d_mu(sys, pp);
  const MagneticSystem back = sys.time_reversed();
  auto potential = [&](const PhasePoint& s) {
    double v = pp.phi.value(s.z);
    if (!pp.xi.is_zero()) v += pp.xi.value(s.z).dot(s.v);
    return v;
  };
  auto centred = [&](const PhasePoint& p, double h) {
    const PhasePoint fwd = flow(sys, p, h, {.steps = 1}).end;
    const PhasePoint bwd = flow(back, p.reversed(), h, {.steps = 1}).end.reversed();
    return (potential(fwd) - potential(bwd)) / (2.0 * h);
  };
  double worst = 0.0;
  for (const PhasePoint& p0 : points) {
    const PhasePoint p = p0.normalized(sys.metric());
    double lhs = 0.0;
    if (!dm.p.is_zero()) lhs += p.v.dot(dm.p.value(p.z) * p.v);
    if (!dm.q.is_zero()) lhs += dm.q.value(p.z).dot(p.v);
    const double d1 = centred(p, step);
    const double rhs = extrapolate ? (4.0 * centred(p, 0.5 * step) - d1) / 3.0 : d1;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

namespace detail {

// Per-hyperbolic-area weights turning coordinate contractions into g-products:
// dvol_g = e^{2f} dvol_hyp, and each raised index costs e^{-2 sigma}.
struct Weights {
  double vol, inv;
};

inline Weights weights(const ConformalMetric& g, Point z) {
  return {std::exp(2.0 * g.f().value(z)), std::exp(-2.0 * g.sigma_value(z))};
}

inline double sym_contract(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

// Integrates on the surface's domain rule; while the rule flags an accuracy
// warning, repeats on rules up to `max_refinements` levels finer.
template <class F>
QuadratureResult integrate_refined(const MagneticSystem& sys, F&& integrand, int max_refinements) {
  if (!sys.surface()) throw InputError("L2 product: system has no surface");
  QuadratureResult r = sys.surface()->domain().integrate(integrand);
  DomainOptions opts = sys.surface()->domain().options();
  for (int k = 0; k < max_refinements && r.accuracy_warning; ++k) {
    ++opts.level;
    r = FundamentalDomain(opts).integrate(integrand);
  }
  return r;
}

}  // namespace detail

/// <u, w> in L^2(dvol_g) for tensor pairs.
inline QuadratureResult pair_inner(const MagneticSystem& sys, const TensorPair& u, const TensorPair& w,
                                   int max_refinements = 0) {
  return detail::integrate_refined(sys, [&](Point z) {
    const auto [vol, inv] = detail::weights(sys.metric(), z);
    double s = 0.0;
    if (!u.p.is_zero() && !w.p.is_zero()) s += inv * inv * detail::sym_contract(u.p.value(z), w.p.value(z));
    if (!u.q.is_zero() && !w.q.is_zero()) s += inv * u.q.value(z).dot(w.q.value(z));
    return vol * s;
  }, max_refinements);
}

struct AdjointnessResult {
  QuadratureResult lhs;  // <D_mu u, w>
  QuadratureResult rhs;  // <u, D_mu^* w>
  double relative_error = 0.0;
};

/// Both sides are integrated on a rule refined (at most `max_refinements`
/// levels) until its error estimate is within the domain tolerance.
inline AdjointnessResult adjointness_check(const MagneticSystem& sys, const PotentialPair& u, const TensorPair& w,
                                           int max_refinements = 1) {
  if (!sys.surface()) throw InputError("adjointness_check: system has no surface");
  AdjointnessResult r;
  r.lhs = pair_inner(sys, d_mu(sys, u), w, max_refinements);
  r.rhs = detail::integrate_refined(sys, [&](Point z) {
    const auto [vol, inv] = detail::weights(sys.metric(), z);
    const DivergenceValue d = d_mu_star(sys, w, z);
    double s = u.phi.value(z) * d.scalar;
    if (!u.xi.is_zero()) s += inv * u.xi.value(z).dot(d.one_form);
    return vol * s;
  }, max_refinements);
  const double scale = std::max({std::abs(r.lhs.value), std::abs(r.rhs.value), 1e-300});
  r.relative_error = std::abs(r.lhs.value - r.rhs.value) / scale;
  return r;
}

/// L^2(dvol_g) norm of D_mu^*[p, q]; zero for solenoidal pairs.
inline QuadratureResult solenoidal_defect(const MagneticSystem& sys, const TensorPair& pair) {
  if (!sys.surface()) throw InputError("solenoidal_defect: system has no surface");
  QuadratureResult r = sys.surface()->domain().integrate([&](Point z) {
    const auto [vol, inv] = detail::weights(sys.metric(), z);
    const DivergenceValue d = d_mu_star(sys, pair, z);
    return vol * (inv * d.one_form.squaredNorm() + d.scalar * d.scalar);
  });
  r.error_estimate = r.error_estimate / (2.0 * std::sqrt(std::max(r.value, 1e-300)));
  r.value = std::sqrt(std::max(r.value, 0.0));
  return r;
}

/// sup |xi|_g + sup |nabla xi|_g over the domain lattice.
inline double c1_norm(const MagneticSystem& sys, const OneFormField& xi, int lattice = 12) {
  if (xi.is_zero()) return 0.0;
  const ConformalMetric& g = sys.metric();
  double s0 = 0.0, s1 = 0.0;
  for (Point z : sys.surface()->domain().lattice(lattice)) {
    const CovectorJet x = xi.jet(z, 1);
    const Christoffel gam = g.christoffel(z);
    const double inv = std::exp(-2.0 * g.sigma_value(z));
    double grad2 = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double t = i == 0 ? x.c[j].dx() : x.c[j].dy();
        for (int k = 0; k < 2; ++k) t -= gam(k, i, j) * x.c[k].value();
        grad2 += t * t;
      }
    s0 = std::max(s0, std::sqrt(inv * x.value().squaredNorm()));
    s1 = std::max(s1, std::sqrt(inv * inv * grad2));
  }
  return s0 + s1;
}

/// sup |phi| + sup |d phi|_g over the domain lattice.
inline double c1_norm(const MagneticSystem& sys, const ScalarField& phi, int lattice = 12) {
  double s0 = 0.0, s1 = 0.0;
  for (Point z : sys.surface()->domain().lattice(lattice)) {
    const Jet f = phi.jet(z, 1);
    s0 = std::max(s0, std::abs(f.value()));
    s1 = std::max(s1, std::hypot(f.dx(), f.dy()) * std::exp(-sys.metric().sigma_value(z)));
  }
  return s0 + s1;
}

}  // namespace maglab
