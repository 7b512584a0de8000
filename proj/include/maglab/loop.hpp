#pragma once

// Discrete closed loops in the universal cover and the discretized time-free
// action. A loop z_0..z_{M-1} closes through its deck element: z_M = rho(z_0).

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <string>
#include <vector>

#include "maglab/errors.hpp"
#include "maglab/group.hpp"
#include "maglab/magnetic_system.hpp"

namespace maglab {

inline constexpr int kMinLoopPoints = 16;

struct DiscreteLoop {
  Word word;
  MobiusTransform deck;
  std::vector<Point> points;
  double period = 0.0;

  int size() const { return static_cast<int>(points.size()); }
  Point closure() const { return deck.apply_unchecked(points.front()); }
  /// z_i for any integer i, continued through the deck element.
  Point at(int i) const {
    const int m = size();
    if (i >= 0 && i < m) return points[i];
    if (i == m) return closure();
    if (i == -1) return deck.inverse().apply_unchecked(points.back());
    throw InputError("DiscreteLoop: index out of range");
  }

  void validate() const {
    if (size() < kMinLoopPoints) throw InputError("DiscreteLoop: need at least 16 points");
    if (!(period > 0.0)) throw InputError("DiscreteLoop: period must be positive");
    for (Point z : points) require_in_disk(z, "DiscreteLoop");
  }
};

/// M points equally spaced along the axis of rho(word), centred on the axis
/// foot, covering one translation length.
inline DiscreteLoop initial_loop(const FuchsianGroup& group, const Word& word, int m = 1024) {
  if (m < kMinLoopPoints) throw InputError("initial_loop: need at least 16 points");
  if (cyclic_reduce(word).empty()) throw InputError("initial_loop: contractible classes carry no minimizer");
  DiscreteLoop loop;
  loop.word = word;
  loop.deck = group.matrix(word);
  const Axis axis = axis_of(loop.deck);
  loop.period = axis.length;
  loop.points.resize(m);
  for (int i = 0; i < m; ++i) loop.points[i] = axis.at(axis.length * (static_cast<double>(i) / m - 0.5));
  return loop;
}

namespace detail {

// One segment of the action, phi(p, q) = c Lambda(m) |q - p|^2 - alpha(m)(q - p)
// with m the coordinate midpoint, and its derivatives in p and q. The exact
// part of alpha is left out by the callers: summed over a closed loop it
// telescopes to phi(rho z_0) - phi(z_0) = 0.
struct SegmentTerms {
  double value = 0.0;
  double quadratic = 0.0;  // Lambda(m) |Delta|^2
  double magnetic = 0.0;   // alpha(m)(Delta)
  Vec2 gp = Vec2::Zero(), gq = Vec2::Zero();
  Mat2 hpp = Mat2::Zero(), hpq = Mat2::Zero(), hqq = Mat2::Zero();
};

inline SegmentTerms segment_terms(const ConformalMetric& g, const OneFormField& alpha, Point p, Point q, double c, int order) {
  SegmentTerms s;
  const Point mid = 0.5 * (p + q);
  const Vec2 d = to_vec(q - p);
  const Jet lam = g.factor_jet(mid, order);
  const CovectorJet a = alpha.jet(mid, order);
  const double dd = d.squaredNorm();
  s.quadratic = lam.value() * dd;
  s.magnetic = a.value().dot(d);
  s.value = c * s.quadratic - s.magnetic;
  if (order == 0) return s;

  const Vec2 grad_lam(lam.dx(), lam.dy());
  // Derivatives in (m, Delta).
  Vec2 gm = c * dd * grad_lam;
  for (int j = 0; j < 2; ++j) gm -= d[j] * Vec2(a.c[j].dx(), a.c[j].dy());
  const Vec2 gd = 2.0 * c * lam.value() * d - a.value();
  s.gp = 0.5 * gm - gd;
  s.gq = 0.5 * gm + gd;
  if (order == 1) return s;

  Mat2 hmm;
  hmm << lam.d(2, 0), lam.d(1, 1), lam.d(1, 1), lam.d(0, 2);
  hmm *= c * dd;
  for (int j = 0; j < 2; ++j) {
    Mat2 haj;
    haj << a.c[j].d(2, 0), a.c[j].d(1, 1), a.c[j].d(1, 1), a.c[j].d(0, 2);
    hmm -= d[j] * haj;
  }
  Mat2 hmd = 2.0 * c * grad_lam * d.transpose();  // rows m, columns Delta
  for (int j = 0; j < 2; ++j) {
    hmd(0, j) -= a.c[j].dx();
    hmd(1, j) -= a.c[j].dy();
  }
  const Mat2 hdd = 2.0 * c * lam.value() * Mat2::Identity();
  const Mat2 sym = hmd + hmd.transpose();
  s.hpp = 0.25 * hmm - 0.5 * sym + hdd;
  s.hqq = 0.25 * hmm + 0.5 * sym + hdd;
  s.hpq = 0.25 * hmm + 0.5 * hmd - 0.5 * hmd.transpose() - hdd;
  return s;
}

// Real Jacobian of a holomorphic map with complex derivative d.
inline Mat2 holomorphic_jacobian(Complex d) {
  Mat2 j;
  j << d.real(), -d.imag(), d.imag(), d.real();
  return j;
}

}  // namespace detail

/// Sum_i Lambda(m_i)|Delta_i|^2 / (2h) + T/2 - Sum_i alpha(m_i)(Delta_i), h = T/M.
inline double discrete_action(const MagneticSystem& sys, const DiscreteLoop& loop) {
  loop.validate();
  const int m = loop.size();
  const double c = m / (2.0 * loop.period);
  const OneFormField alpha = sys.alpha().without_exact_part();
  double total = 0.5 * loop.period;
  for (int i = 0; i < m; ++i) total += detail::segment_terms(sys.metric(), alpha, loop.at(i), loop.at(i + 1), c, 0).value;
  return total;
}

/// Sum_i Lambda(m_i)|Delta_i|^2: the discrete length is sqrt(M times this).
inline double discrete_energy_sum(const MagneticSystem& sys, const DiscreteLoop& loop) {
  double s = 0.0;
  for (int i = 0; i < loop.size(); ++i)
    s += detail::segment_terms(sys.metric(), OneFormField(), loop.at(i), loop.at(i + 1), 1.0, 0).quadratic;
  return s;
}

/// Period minimizing the action for fixed points: the discrete length.
inline double optimal_period(const MagneticSystem& sys, const DiscreteLoop& loop) {
  return std::sqrt(loop.size() * discrete_energy_sum(sys, loop));
}

struct ActionDerivatives {
  double value = 0.0;
  Eigen::VectorXd gradient;           // (x_0, y_0, x_1, y_1, ...)
  Eigen::SparseMatrix<double> hessian;
};

/// Value, gradient and Hessian of discrete_action in the points at fixed period.
inline ActionDerivatives action_derivatives(const MagneticSystem& sys, const DiscreteLoop& loop, bool with_hessian = true) {
  loop.validate();
  const int m = loop.size();
  const double c = m / (2.0 * loop.period);
  ActionDerivatives r;
  r.value = 0.5 * loop.period;
  r.gradient = Eigen::VectorXd::Zero(2 * m);
  std::vector<Eigen::Triplet<double>> trip;
  if (with_hessian) trip.reserve(16 * m);
  auto add_block = [&](int bi, int bj, const Mat2& h) {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) trip.emplace_back(2 * bi + a, 2 * bj + b, h(a, b));
  };

  const OneFormField alpha = sys.alpha().without_exact_part();
  const Point z0 = loop.points.front();
  const Mat2 jr = detail::holomorphic_jacobian(loop.deck.derivative(z0));
  const Complex rho2 = loop.deck.second_derivative(z0);

  for (int i = 0; i < m; ++i) {
    const bool last = i == m - 1;
    const auto s = detail::segment_terms(sys.metric(), alpha, loop.at(i), loop.at(i + 1), c, with_hessian ? 2 : 1);
    r.value += s.value;
    const int j = last ? 0 : i + 1;
    r.gradient.segment<2>(2 * i) += s.gp;
    if (!last) {
      r.gradient.segment<2>(2 * j) += s.gq;
      if (with_hessian) {
        add_block(i, i, s.hpp);
        add_block(i, j, s.hpq);
        add_block(j, i, s.hpq.transpose());
        add_block(j, j, s.hqq);
      }
      continue;
    }
    // The endpoint is rho(z_0): chain rule through the deck element.
    r.gradient.segment<2>(0) += jr.transpose() * s.gq;
    if (with_hessian) {
      Mat2 u2, v2;  // Hessians of Re rho and Im rho
      u2 << rho2.real(), -rho2.imag(), -rho2.imag(), -rho2.real();
      v2 << rho2.imag(), rho2.real(), rho2.real(), -rho2.imag();
      const Mat2 h00 = jr.transpose() * s.hqq * jr + s.gq.x() * u2 + s.gq.y() * v2;
      const Mat2 hi0 = s.hpq * jr;
      add_block(i, i, s.hpp);
      add_block(i, 0, hi0);
      add_block(0, i, hi0.transpose());
      add_block(0, 0, h00);
    }
  }
  if (with_hessian) {
    r.hessian.resize(2 * m, 2 * m);
    r.hessian.setFromTriplets(trip.begin(), trip.end());
  }
  return r;
}

/// Largest covector g-norm of the per-point gradient.
inline double scaled_gradient_norm(const MagneticSystem& sys, const DiscreteLoop& loop, const Eigen::VectorXd& g) {
  double worst = 0.0;
  for (int i = 0; i < loop.size(); ++i)
    worst = std::max(worst, g.segment<2>(2 * i).norm() * std::exp(-sys.metric().sigma_value(loop.points[i])));
  return worst;
}

struct MinimizeOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 5000;
  int stagnation_limit = 50;
};

struct MinimizeStats {
  int iterations = 0;
  double gradient_norm = INFINITY;  // gauge-fixed scaled gradient
  double action = 0.0;
};

namespace detail {

// Unit tangent of the loop at z_0 from the neighbouring points.
inline Vec2 loop_tangent(const DiscreteLoop& loop) {
  const Vec2 t = to_vec(loop.at(1) - loop.at(-1));
  return t / t.norm();
}

// Rotates point 0 into (tangent, normal) coordinates and removes the tangential
// coordinate, which is the near-null sliding mode of the discretization.
inline void fix_gauge(const Vec2& t, Eigen::VectorXd& g, Eigen::SparseMatrix<double>* h) {
  Mat2 q;
  q << t.x(), -t.y(), t.y(), t.x();
  const Vec2 g0 = q.transpose() * g.segment<2>(0);
  g.segment<2>(0) = Vec2(0.0, g0.y());
  if (!h) return;
  const int n = static_cast<int>(h->rows());
  Eigen::SparseMatrix<double> r(n, n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n + 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) trip.emplace_back(a, b, q(a, b));
  for (int k = 2; k < n; ++k) trip.emplace_back(k, k, 1.0);
  r.setFromTriplets(trip.begin(), trip.end());
  const Eigen::SparseMatrix<double> rot = Eigen::SparseMatrix<double>(r.transpose()) * (*h) * r;
  trip.clear();
  trip.emplace_back(0, 0, 1.0);
  for (int k = 0; k < rot.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(rot, k); it; ++it)
      if (it.row() != 0 && it.col() != 0) trip.emplace_back(it.row(), it.col(), it.value());
  h->setFromTriplets(trip.begin(), trip.end());
}

}  // namespace detail

/// Damped Newton descent on the points with the period set to its optimal
/// value before every sweep. The first point moves only across the loop.
/// Stops on the scaled gradient in the remaining coordinates.
inline DiscreteLoop minimize_action(const MagneticSystem& sys, DiscreteLoop loop, const MinimizeOptions& opts = {},
                                    MinimizeStats* stats = nullptr) {
  loop.validate();
  const int m = loop.size();
  double lambda = 1e-6;
  int rejected = 0;
  MinimizeStats st;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  bool pattern_ready = false;

  for (st.iterations = 0; st.iterations < opts.max_iterations; ++st.iterations) {
    loop.period = optimal_period(sys, loop);
    ActionDerivatives d = action_derivatives(sys, loop);
    const Vec2 t = detail::loop_tangent(loop);
    detail::fix_gauge(t, d.gradient, &d.hessian);
    st.action = d.value;
    st.gradient_norm = scaled_gradient_norm(sys, loop, d.gradient);
    if (st.gradient_norm < opts.gradient_tolerance) break;

    // Damping is measured in the metric, so lambda is scale free.
    Eigen::VectorXd weight(2 * m);
    for (int i = 0; i < m; ++i) weight.segment<2>(2 * i).setConstant(sys.metric().factor(loop.points[i]) * m / loop.period);
    weight[0] = 0.0;
    if (!pattern_ready) {
      solver.analyzePattern(d.hessian);
      pattern_ready = true;
    }

    bool accepted = false;
    while (!accepted) {
      Eigen::SparseMatrix<double> a = d.hessian;
      for (int k = 0; k < 2 * m; ++k) a.coeffRef(k, k) += lambda * weight[k];
      solver.factorize(a);
      bool ok = solver.info() == Eigen::Success && (solver.vectorD().array() > 0.0).all();
      DiscreteLoop trial = loop;
      if (ok) {
        Eigen::VectorXd step = solver.solve(-d.gradient);
        const Vec2 normal(-t.y(), t.x());
        step.segment<2>(0) = step[1] * normal;
        for (int i = 0; i < m && ok; ++i) {
          trial.points[i] += Complex(step[2 * i], step[2 * i + 1]);
          ok = std::norm(trial.points[i]) < 1.0;
        }
      }
      if (ok) {
        const double value = discrete_action(sys, trial);
        const double slack = 1e-14 * (1.0 + std::abs(d.value));
        if (value <= d.value + slack) {
          loop = std::move(trial);
          lambda = std::max(lambda / 4.0, 1e-12);
          accepted = true;
          rejected = 0;
          break;
        }
      }
      lambda *= 8.0;
      if (++rejected >= opts.stagnation_limit)
        throw NumericalError("minimize_action: no decrease in " + std::to_string(rejected) + " successive iterations (word " +
                             loop.word.str() + ", action " + std::to_string(d.value) + ", scaled gradient " +
                             std::to_string(st.gradient_norm) + ")");
    }
  }
  loop.period = optimal_period(sys, loop);
  if (stats) *stats = st;
  return loop;
}

}  // namespace maglab
