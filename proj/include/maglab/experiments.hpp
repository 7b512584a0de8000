#pragma once

// Headline experiments: order of the action's linearization, the conformal
// rigidity mechanics (Hölder chains, orbit averages, marked-action gap), decay
// of 1-form averages along long orbits, and the injectivity-criteria report.

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "maglab/criteria.hpp"
#include "maglab/spectrum.hpp"
#include "maglab/xray.hpp"

namespace maglab {

/// Least-squares slope of y against x; NaN with fewer than two points.
inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return NAN;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : NAN;
}

inline void require_ladder(const std::vector<double>& eps) {
  if (eps.size() < 3) throw InputError("epsilon ladder needs at least 3 values");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw InputError("epsilon ladder values must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw InputError("epsilon ladder must be strictly decreasing");
  }
}

// ---------------------------------------------------------------------------
// Linearization

/// Perturbation direction: metric e^{2 eps f} g0 (so h = 2 f g0) and
/// alpha0 + eps beta.
struct Direction {
  ScalarField f;
  OneFormField beta;
};

struct LinearizationRow {
  double eps = 0.0;
  double remainder = NAN;  // max over words of the Taylor remainder
  std::string worst_word;
  std::string error;
};

struct LinearizationResult {
  std::vector<Word> words;
  std::vector<double> base_action;
  std::vector<double> first_order;  // I_2[h/2, -beta] per word
  std::vector<LinearizationRow> rows;
  std::vector<SpectrumEntry> entries;  // every refined orbit, for certification
  double slope = NAN;
  bool at_floor = false;  // every remainder below floor
  bool slope_in_range = false;
};

inline LinearizationResult linearization_experiment(const MagneticSystem& sys0, const Direction& dir,
                                                    const std::vector<double>& eps, const std::vector<Word>& words,
                                                    const OrbitOptions& opts = {}, int jobs = 1, double floor = 1e-8) {
  require_ladder(eps);
  LinearizationResult r;
  const Spectrum base = marked_spectrum(sys0, words, opts, jobs, true);
  const TensorPair pair{metric_multiple(sys0.metric(), dir.f.scaled(2.0)).scaled(0.5), dir.beta.scaled(-1.0)};
  for (std::size_t i = 0; i < base.entries.size(); ++i) {
    const auto& e = base.entries[i];
    if (!e.error.empty() || !e.refined)
      throw NumericalError("linearization: base orbit of " + e.word.str() + " failed: " + e.error);
    r.words.push_back(e.word);
    r.base_action.push_back(e.action);
    r.first_order.push_back(xray_I2(sys0, pair, base.orbits[i]));
    r.entries.push_back(e);
  }
  std::vector<double> lx, ly;
  r.at_floor = true;
  for (double e : eps) {
    LinearizationRow row;
    row.eps = e;
    const MagneticSystem s = sys0.with_metric(ConformalMetric(sys0.metric().f() + dir.f.scaled(e)), sys0.name() + "+eps")
                                 .with_alpha(sys0.alpha() + dir.beta.scaled(e), sys0.name() + "+eps");
    const Spectrum sp = marked_spectrum(s, r.words, opts, jobs);
    double worst = 0.0;
    for (std::size_t i = 0; i < sp.entries.size(); ++i) {
      const auto& x = sp.entries[i];
      if (!x.error.empty() || !x.refined) {
        row.error = x.word.str() + ": " + x.error;
        break;
      }
      r.entries.push_back(x);
      const double rem = std::abs(x.action - r.base_action[i] - e * r.first_order[i]);
      if (rem >= worst) {
        worst = rem;
        row.worst_word = x.word.str();
      }
    }
    if (row.error.empty()) {
      row.remainder = worst;
      if (worst >= floor) r.at_floor = false;
      if (worst > 0.0) {
        lx.push_back(std::log(e));
        ly.push_back(std::log(worst));
      }
    } else {
      r.at_floor = false;
    }
    r.rows.push_back(row);
  }
  r.slope = least_squares_slope(lx, ly);
  r.slope_in_range = r.slope >= 1.8 && r.slope <= 2.2;
  return r;
}

// ---------------------------------------------------------------------------
// Conformal rigidity

/// The two chains of the conformal argument after normalizing vol(g1) = 1 and
/// vol(g2) <= vol(g1), in dimension n = 2:
///   energy: int e^{2f} <= (int e^{nf})^{2/n} <= vol(g2)^{2/n} <= 1
///   length: int e^{f}  <= (int e^{nf})^{1/n} <= vol(g2)^{1/n} <= 1
/// Integrals are against the normalized vol(g1).
struct HolderChains {
  double volume1 = 0.0;  // before normalization
  double volume2 = 0.0;
  bool swapped = false;  // roles exchanged so that vol(g2) <= vol(g1)
  std::array<double, 4> energy{};
  std::array<double, 4> length{};
  std::array<double, 3> energy_slack{};
  std::array<double, 3> length_slack{};
  double energy_total_slack = 0.0;
  double length_total_slack = 0.0;
  bool holds = false;   // every step non-negative up to rounding
  bool strict = false;  // both chains strict end to end
  bool accuracy_warning = false;
};

inline HolderChains holder_chains(const MagneticSystem& sys1, const ScalarField& f) {
  if (!sys1.surface()) throw InputError("holder_chains: system has no surface");
  constexpr int n = kDimension;
  const FundamentalDomain& fd = sys1.surface()->domain();
  const ScalarField& f1 = sys1.metric().f();
  HolderChains h;
  const QuadratureResult v1 = fd.integrate([&](Point z) { return std::exp(2.0 * f1.value(z)); });
  const QuadratureResult v2 = fd.integrate([&](Point z) { return std::exp(2.0 * (f1.value(z) + f.value(z))); });
  h.volume1 = v1.value;
  h.volume2 = v2.value;
  h.swapped = v2.value > v1.value;
  const double sign = h.swapped ? -1.0 : 1.0;  // the swap replaces f by -f and g1 by g2
  const double ref = h.swapped ? v2.value : v1.value;
  const double rel_vol = (h.swapped ? v1.value : v2.value) / ref;
  auto moment = [&](double k) {
    return fd.integrate([&](Point z) {
      const double fv = f.value(z), base = 2.0 * f1.value(z) + (h.swapped ? 2.0 * fv : 0.0);
      return std::exp(base + k * sign * fv);
    });
  };
  const QuadratureResult m2 = moment(2.0), m1 = moment(1.0), mn = moment(n);
  h.accuracy_warning = v1.accuracy_warning || v2.accuracy_warning || m2.accuracy_warning || m1.accuracy_warning;
  const double e2 = m2.value / ref, e1 = m1.value / ref, en = mn.value / ref;
  h.energy = {e2, std::pow(en, 2.0 / n), std::pow(rel_vol, 2.0 / n), 1.0};
  h.length = {e1, std::pow(en, 1.0 / n), std::pow(rel_vol, 1.0 / n), 1.0};
  constexpr double rounding = 1e-12;
  h.holds = true;
  for (int i = 0; i < 3; ++i) {
    h.energy_slack[i] = h.energy[i + 1] - h.energy[i];
    h.length_slack[i] = h.length[i + 1] - h.length[i];
    if (h.energy_slack[i] < -rounding || h.length_slack[i] < -rounding) h.holds = false;
  }
  h.energy_total_slack = h.energy[3] - h.energy[0];
  h.length_total_slack = h.length[3] - h.length[0];
  h.strict = h.energy_total_slack > rounding && h.length_total_slack > rounding;
  return h;
}

struct OrbitAverageRow {
  std::string word;
  double length = NAN;       // l_{g1}
  double functional = NAN;   // (E_{g2} + l_{g2} / 2) / l_{g1} along the g1 orbit
  std::string error;
};

struct GapRow {
  std::string word;
  double action1 = NAN;
  double action2 = NAN;
  std::string error;
};

struct ConformalResult {
  HolderChains chains;
  double space_average = NAN;  // (int e^{2f} + int e^f) / 2 against normalized vol(g1)
  std::vector<OrbitAverageRow> averages;
  std::vector<GapRow> gaps;
  std::vector<SpectrumEntry> entries;
  double gap = NAN;
  bool complete = true;  // no per-class failures
};

inline ConformalResult conformal_experiment(const MagneticSystem& sys1, const ScalarField& f, const std::vector<Word>& words,
                                            const std::vector<Word>& average_words, const OrbitOptions& opts = {},
                                            int jobs = 1) {
  ConformalResult r;
  r.chains = holder_chains(sys1, f);
  const FundamentalDomain& fd = sys1.surface()->domain();
  const ScalarField& f1 = sys1.metric().f();
  const double vol = fd.integrate([&](Point z) { return std::exp(2.0 * f1.value(z)); }).value;
  r.space_average = 0.5 *
                    fd.integrate([&](Point z) {
                        const double fv = f.value(z);
                        return std::exp(2.0 * f1.value(z)) * (std::exp(2.0 * fv) + std::exp(fv));
                      }).value /
                    vol;

  const Spectrum avg = marked_spectrum(sys1, average_words, opts, jobs, true);
  for (std::size_t i = 0; i < avg.entries.size(); ++i) {
    const auto& e = avg.entries[i];
    OrbitAverageRow row;
    row.word = e.word.str();
    row.error = e.error;
    if (e.error.empty() && e.refined) {
      const ClosedOrbit& o = avg.orbits[i];
      const double integral = detail::orbit_integral(o, [&](const PhasePoint& s) {
        const double fv = f.value(s.z);
        return std::exp(2.0 * fv) + std::exp(fv);  // unit g1-speed
      });
      row.length = o.length;
      row.functional = 0.5 * integral / o.length;
      r.entries.push_back(e);
    } else {
      r.complete = false;
    }
    r.averages.push_back(row);
  }

  const MagneticSystem sys2 = sys1.with_metric(ConformalMetric(f1 + f), sys1.name() + " conformal");
  const Spectrum s1 = marked_spectrum(sys1, words, opts, jobs);
  const Spectrum s2 = marked_spectrum(sys2, words, opts, jobs);
  double gap = 0.0;
  for (std::size_t i = 0; i < s1.entries.size(); ++i) {
    const auto &a = s1.entries[i], &b = s2.entries[i];
    GapRow row;
    row.word = a.word.str();
    if (!a.error.empty() || !b.error.empty() || !a.refined || !b.refined) {
      row.error = !a.error.empty() ? a.error : b.error;
      r.complete = false;
    } else {
      row.action1 = a.action;
      row.action2 = b.action;
      gap = std::max(gap, std::abs(b.action - a.action));
      r.entries.push_back(a);
      r.entries.push_back(b);
    }
    r.gaps.push_back(row);
  }
  r.gap = gap;
  return r;
}

// ---------------------------------------------------------------------------
// 1-form averages

struct AverageRow {
  std::string word;
  double length = NAN;
  double average = NAN;  // (1/l) int_gamma alpha
  std::string error;
};

struct AverageDecay {
  std::vector<AverageRow> rows;
  std::vector<SpectrumEntry> entries;
  double trend = NAN;      // least-squares slope of |average| against length
  bool decreasing = false;
};

inline AverageDecay oneform_average_decay(const MagneticSystem& sys, const std::vector<Word>& words,
                                          const OrbitOptions& opts = {}, int jobs = 1) {
  AverageDecay r;
  const Spectrum sp = marked_spectrum(sys, words, opts, jobs, true);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < sp.entries.size(); ++i) {
    const auto& e = sp.entries[i];
    AverageRow row;
    row.word = e.word.str();
    row.error = e.error;
    if (e.error.empty() && e.refined) {
      row.length = e.length;
      row.average = sp.orbits[i].alpha_integral / e.length;
      x.push_back(row.length);
      y.push_back(std::abs(row.average));
      r.entries.push_back(e);
    }
    r.rows.push_back(row);
  }
  r.trend = least_squares_slope(x, y);
  r.decreasing = std::isfinite(r.trend) && r.trend <= 0.0;
  return r;
}

/// Pseudo-random canonical words of each requested length, deterministic in
/// the seed.
inline std::vector<Word> random_words(const std::vector<int>& lengths, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Word> out;
  for (int n : lengths) out.push_back(random_canonical_word(n, rng));
  return out;
}

// ---------------------------------------------------------------------------
// Criteria

struct MarginRow {
  int grid = 0;
  MarginResult margin;
};

struct DpRow {
  std::string word;
  double value = NAN;
  bool pass = false;
  std::string error;
};

struct CriteriaReport {
  std::vector<MarginRow> margins;
  std::vector<DpRow> dp;
  std::vector<SpectrumEntry> entries;
  bool crit_b = false;
  bool crit_dp = false;
  bool verdict = false;
  std::vector<std::string> conventions;
};

inline CriteriaReport criteria_report(const MagneticSystem& sys, const std::vector<int>& grid_sizes,
                                      const std::vector<Word>& words, const OrbitOptions& opts = {}, int jobs = 1,
                                      int directions = 16) {
  if (!sys.surface()) throw InputError("criteria_report: system has no surface");
  if (grid_sizes.empty()) throw InputError("criteria_report: no grid sizes");
  CriteriaReport r;
  r.crit_b = true;
  for (int n : grid_sizes) {
    MarginRow row{n, crit_b_margin(sys, sys.surface()->domain().lattice(n), directions)};
    r.crit_b = r.crit_b && row.margin.pass;
    r.margins.push_back(row);
  }
  const Spectrum sp = marked_spectrum(sys, words, opts, jobs);
  r.crit_dp = true;
  for (const auto& e : sp.entries) {
    DpRow row{e.word.str(), e.crit_dp, false, e.error};
    if (e.error.empty() && e.refined) {
      row.pass = crit_dp_passes(e.crit_dp);
      r.entries.push_back(e);
    }
    r.crit_dp = r.crit_dp && row.pass;
    r.dp.push_back(row);
  }
  r.verdict = r.crit_b && r.crit_dp;
  r.conventions = {
      "crit_b: max over grid, 2*directions unit v and both unit w orthogonal to v of "
      "sec_v(w) + (n/2 - 1 + 2/(n+2)) g(w, Y v)^2; passes when negative",
      "sec_v(w) = R(w,v,v,w) + g((nabla_w Y) v, w) + |Y w|^2/4 + 3/4 g(w, Y v)^2",
      "crit_dp: T * int_0^T max(0, dp_k) dt along the refined orbit; passes when <= 4",
      "dp_k = max over unit w orthogonal to v of 2 R(w,v,v,w) + g(Y v, w)^2 + (n+3)|Y w|^2 - 2 g((nabla_w Y) v, w)",
  };
  return r;
}

}  // namespace maglab
