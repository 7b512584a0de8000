#pragma once

// Newton refinement of a minimized discrete loop into a closed magnetic
// geodesic, by multiple shooting against the deck element.
//
// Unknowns: the first node on a transversal (offset s, angle theta_0), the
// interior nodes (x, y, theta) and the period. Each of the K segments flows
// for T/K and must land on the next node; the last one lands on
// rho(z_0) with angle theta_0 + arg rho'(z_0). That gives 3K equations in 3K
// unknowns.

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "maglab/criteria.hpp"
#include "maglab/errors.hpp"
#include "maglab/flow.hpp"
#include "maglab/loop.hpp"

namespace maglab {

struct ShootingOptions {
  int total_steps = 10000;        // RK4 steps over one period
  double segment_time = 2.5;      // target segment duration
  double residual_tolerance = 1e-10;
  // Newton that stalls at the roundoff floor still counts as refined when the
  // floor is below stall_tolerance and the EL residual is below el_tolerance.
  double stall_tolerance = 1e-8;
  double el_tolerance = 1e-6;
  int max_newton = 30;
  double fd_step = 1e-7;
  int el_samples = 1000;
};

struct ClosedOrbit {
  Word word;
  MobiusTransform deck;
  std::uint64_t system_uid = 0;
  PhasePoint initial;
  double period = 0.0;
  double step = 0.0;           // RK4 step; samples are this far apart
  int segment_steps = 0;       // samples per shooting segment
  std::vector<FlowSample> samples;
  double action = 0.0;
  double length = 0.0;
  double energy = 0.0;         // 1/2 int |v|^2 + T/2
  double alpha_integral = 0.0;
  double el_residual = INFINITY;
  double closure_error = INFINITY;  // largest node mismatch, scaled position or angle
  double speed_drift = INFINITY;    // largest |speed - 1| before renormalization
  double crit_dp_value = NAN;
  bool refined = false;
  int newton_iterations = 0;
  std::string diagnostic;
};

/// Composite Simpson rule over equally spaced samples (odd count), falling
/// back to the trapezoid rule on a final interval when the count is even.
inline double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  const std::size_t even = (n - 1) % 2 == 0 ? n - 1 : n - 2;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= even; i += 2) s += f[i] + 4.0 * f[i + 1] + f[i + 2];
  s *= h / 3.0;
  if (even != n - 1) s += 0.5 * h * (f[n - 2] + f[n - 1]);
  return s;
}

namespace detail {

inline double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

inline double velocity_angle(const Vec2& v) { return std::atan2(v.y(), v.x()); }

class Shooter {
 public:
  Shooter(const MagneticSystem& sys, const DiscreteLoop& loop, const ShootingOptions& opts)
      : sys_(sys), deck_(loop.deck), opts_(opts) {
    const double t0 = loop.period;
    k_ = std::max(1, static_cast<int>(std::ceil(t0 / opts.segment_time)));
    steps_ = std::max(2, static_cast<int>(std::ceil(static_cast<double>(opts.total_steps) / k_)));
    if (steps_ % 2) ++steps_;
    const int m = loop.size();

    base_ = loop.points.front();
    const Vec2 t = to_vec(loop.at(1) - loop.at(-1));
    normal_ = rotate_quarter(t / t.norm()) * std::exp(-sys.metric().sigma_value(base_));

    x_ = Eigen::VectorXd::Zero(3 * k_);
    x_[0] = 0.0;
    x_[1] = velocity_angle(t);
    for (int k = 1; k < k_; ++k) {
      const double pos = static_cast<double>(k) * m / k_;
      const int i = static_cast<int>(std::floor(pos));
      const double frac = pos - i;
      const Point z = (1.0 - frac) * loop.at(i) + frac * loop.at(i + 1);
      const Vec2 dir = to_vec(loop.at(i + 1) - loop.at(i - 1));
      x_.segment<3>(3 * k - 1) << z.real(), z.imag(), velocity_angle(dir);
    }
    x_[3 * k_ - 1] = t0;
  }

  int segments() const { return k_; }
  int segment_steps() const { return steps_; }
  const Eigen::VectorXd& unknowns() const { return x_; }

  Point node_position(const Eigen::VectorXd& x, int k) const {
    if (k == 0) return base_ + x[0] * to_complex(normal_);
    return {x[3 * k - 1], x[3 * k]};
  }
  double node_angle(const Eigen::VectorXd& x, int k) const { return k == 0 ? x[1] : x[3 * k + 1]; }
  double period(const Eigen::VectorXd& x) const { return x[3 * k_ - 1]; }

  PhasePoint node(const Eigen::VectorXd& x, int k) const {
    return PhasePoint::from_angle(sys_.metric(), node_position(x, k), node_angle(x, k));
  }

  FlowResult flow_segment(const Eigen::VectorXd& x, int k, bool dense = false) const {
    return flow(sys_, node(x, k), period(x) / k_, {.h = 1.0, .dense = dense, .steps = steps_});
  }

  /// Target of segment k: the next node, or the deck image of node 0.
  std::pair<Point, double> target(const Eigen::VectorXd& x, int k) const {
    if (k + 1 < k_) return {node_position(x, k + 1), node_angle(x, k + 1)};
    const Point z0 = node_position(x, 0);
    return {deck_.apply_unchecked(z0), node_angle(x, 0) + std::arg(deck_.derivative(z0))};
  }

  Eigen::Vector3d block(const Eigen::VectorXd& x, int k, const PhasePoint& end) const {
    const auto [zt, at] = target(x, k);
    const double scale = std::exp(sys_.metric().sigma_value(zt));
    const Complex dz = (end.z - zt) * scale;
    return {dz.real(), dz.imag(), wrap_angle(velocity_angle(end.v) - at)};
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& x, std::vector<PhasePoint>* ends = nullptr) const {
    Eigen::VectorXd r(3 * k_);
    std::vector<PhasePoint> e(k_);
    for (int k = 0; k < k_; ++k) {
      e[k] = flow_segment(x, k).end;
      r.segment<3>(3 * k) = block(x, k, e[k]);
    }
    if (ends) *ends = std::move(e);
    return r;
  }

  /// Forward-difference Jacobian; a node variable only touches its own
  /// segment (reflowed) and the previous segment's target.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& r, const std::vector<PhasePoint>& ends) const {
    const int n = 3 * k_;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int col = 0; col < n; ++col) {
      Eigen::VectorXd xp = x;
      double h = opts_.fd_step;
      const bool is_period = col == n - 1;
      int node_index = col < 2 ? 0 : (col - 2) / 3 + 1;
      if (is_period) {
        h *= period(x);
      } else if (col >= 2 && (col - 2) % 3 < 2) {
        h *= std::exp(-sys_.metric().sigma_value(node_position(x, node_index)));
      }
      xp[col] += h;
      if (is_period) {
        for (int k = 0; k < k_; ++k) jac.block(3 * k, col, 3, 1) = (block(xp, k, flow_segment(xp, k).end) - r.segment<3>(3 * k)) / h;
        continue;
      }
      const int own = node_index;
      const int prev = (node_index + k_ - 1) % k_;
      jac.block(3 * own, col, 3, 1) = (block(xp, own, flow_segment(xp, own).end) - r.segment<3>(3 * own)) / h;
      if (prev != own) jac.block(3 * prev, col, 3, 1) = (block(xp, prev, ends[prev]) - r.segment<3>(3 * prev)) / h;
    }
    return jac;
  }

 private:
  const MagneticSystem& sys_;
  MobiusTransform deck_;
  ShootingOptions opts_;
  int k_ = 1;
  int steps_ = 2;
  Point base_;
  Vec2 normal_;
  Eigen::VectorXd x_;
};

/// Covariant acceleration minus Lorentz force, from Richardson-extrapolated
/// central differences of the sampled velocities; g-norm, worst over samples.
inline double el_residual(const MagneticSystem& sys, const ClosedOrbit& orbit, int wanted) {
  const int n = static_cast<int>(orbit.samples.size());
  const int per = orbit.segment_steps;
  const double h = orbit.step;
  std::vector<int> idx;
  for (int j = 0; j < n; ++j) {
    const int r = j % per;
    if (r >= 2 && r <= per - 3 && j + 2 < n) idx.push_back(j);
  }
  if (idx.empty()) return INFINITY;
  const int stride = std::max(1, static_cast<int>(idx.size()) / std::max(1, wanted));
  double worst = 0.0;
  for (std::size_t q = 0; q < idx.size(); q += stride) {
    const int j = idx[q];
    const auto& s = orbit.samples;
    const Vec2 d1 = (s[j + 1].state.v - s[j - 1].state.v) / (2.0 * h);
    const Vec2 d2 = (s[j + 2].state.v - s[j - 2].state.v) / (4.0 * h);
    const Vec2 acc = (4.0 * d1 - d2) / 3.0;
    const Point z = s[j].state.z;
    const Vec2 v = s[j].state.v;
    const Vec2 defect = acc + sys.metric().christoffel(z).contract(v, v) - sys.lorentz_force(z, v);
    worst = std::max(worst, sys.metric().norm(z, defect));
  }
  return worst;
}

}  // namespace detail

/// T * int_0^T max(0, k(gamma, gamma')) dt on the orbit samples.
inline double crit_dp(const MagneticSystem& sys, const ClosedOrbit& orbit) {
  if (!orbit.refined) throw InputError("crit_dp: orbit of " + orbit.word.str() + " is not refined");
  if (orbit.system_uid != sys.uid()) throw InputError("crit_dp: orbit belongs to a different system");
  std::vector<double> f;
  f.reserve(orbit.samples.size());
  for (const auto& s : orbit.samples) f.push_back(std::max(0.0, dp_k(sys, s.state.z, s.state.v)));
  return orbit.period * simpson(f, orbit.step);
}

inline bool crit_dp_passes(double value) { return value <= 4.0; }

/// Fills the dense samples and every derived quantity from converged unknowns.
inline void assemble_orbit(const MagneticSystem& sys, const detail::Shooter& sh, const Eigen::VectorXd& x, ClosedOrbit& o,
                           const ShootingOptions& opts) {
  const int k_count = sh.segments();
  o.initial = sh.node(x, 0);
  o.period = sh.period(x);
  o.segment_steps = sh.segment_steps();
  o.step = o.period / (k_count * o.segment_steps);
  o.samples.clear();
  o.samples.reserve(static_cast<std::size_t>(k_count) * o.segment_steps + 1);
  o.speed_drift = 0.0;
  o.closure_error = 0.0;
  for (int k = 0; k < k_count; ++k) {
    const FlowResult seg = sh.flow_segment(x, k, true);
    o.speed_drift = std::max(o.speed_drift, seg.max_speed_drift);
    o.closure_error = std::max(o.closure_error, sh.block(x, k, seg.end).cwiseAbs().maxCoeff());
    const double t0 = k * o.period / k_count;
    const std::size_t last = k + 1 < k_count ? seg.samples.size() - 1 : seg.samples.size();
    for (std::size_t i = 0; i < last; ++i) o.samples.push_back({t0 + seg.samples[i].t, seg.samples[i].state});
  }
  std::vector<double> speed2, speed, alpha;
  for (const auto& s : o.samples) {
    const double sp = sys.metric().norm(s.state.z, s.state.v);
    speed.push_back(sp);
    speed2.push_back(sp * sp);
    alpha.push_back(sys.alpha().value(s.state.z).dot(s.state.v));
  }
  o.length = simpson(speed, o.step);
  o.alpha_integral = simpson(alpha, o.step);
  o.energy = 0.5 * simpson(speed2, o.step) + 0.5 * o.period;
  o.action = o.energy - o.alpha_integral;
  o.el_residual = detail::el_residual(sys, o, opts.el_samples);
}

/// Refines a minimized loop. Divergence or loss of the trajectory returns the
/// best iterate with refined = false and a diagnostic.
inline ClosedOrbit shoot_refine(const MagneticSystem& sys, const DiscreteLoop& loop, const ShootingOptions& opts = {}) {
  loop.validate();
  ClosedOrbit o;
  o.word = loop.word;
  o.deck = loop.deck;
  o.system_uid = sys.uid();
  detail::Shooter sh(sys, loop, opts);
  Eigen::VectorXd x = sh.unknowns();
  double rnorm = INFINITY;
  try {
    std::vector<PhasePoint> ends;
    Eigen::VectorXd r = sh.residual(x, &ends);
    rnorm = r.cwiseAbs().maxCoeff();
    int it = 0;
    bool stalled = false;
    for (; it < opts.max_newton && !(rnorm < opts.residual_tolerance); ++it) {
      const Eigen::MatrixXd jac = sh.jacobian(x, r, ends);
      const Eigen::VectorXd dx = jac.partialPivLu().solve(-r);
      if (!dx.allFinite()) throw NumericalError("singular shooting Jacobian");
      double damp = 1.0;
      bool improved = false;
      for (int tries = 0; tries < 12 && !improved; ++tries, damp *= 0.5) {
        const Eigen::VectorXd xt = x + damp * dx;
        if (!(sh.period(xt) > 0.0)) continue;
        std::vector<PhasePoint> et;
        Eigen::VectorXd rt;
        try {
          rt = sh.residual(xt, &et);
        } catch (const NumericalError&) {
          continue;
        } catch (const DomainError&) {
          continue;
        }
        const double nt = rt.cwiseAbs().maxCoeff();
        if (nt < rnorm) {
          x = xt;
          r = std::move(rt);
          ends = std::move(et);
          rnorm = nt;
          improved = true;
        }
      }
      if (!improved) {
        stalled = true;
        break;
      }
    }
    o.newton_iterations = it;
    assemble_orbit(sys, sh, x, o, opts);
    const bool at_floor = stalled && rnorm < opts.stall_tolerance && o.el_residual < opts.el_tolerance;
    o.refined = rnorm < opts.residual_tolerance || at_floor;
    char buf[160];
    if (at_floor) {
      std::snprintf(buf, sizeof buf, "shooting stalled at roundoff floor %.3g (target %.3g), EL residual %.3g", rnorm,
                    opts.residual_tolerance, o.el_residual);
      o.diagnostic = buf;
    } else if (!o.refined) {
      std::snprintf(buf, sizeof buf, "shooting did not reach residual %.3g (residual %.3g after %d Newton steps)",
                    opts.residual_tolerance, rnorm, it);
      o.diagnostic = buf;
    }
  } catch (const std::exception& e) {
    o.refined = false;
    o.diagnostic = std::string("shooting failed: ") + e.what();
    return o;
  }
  if (o.refined) o.crit_dp_value = crit_dp(sys, o);
  return o;
}

}  // namespace maglab
