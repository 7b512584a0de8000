#pragma once

// Marked magnetic action spectrum: seed on the geodesic axis, minimize the
// discrete action, refine by shooting. Classes run concurrently; results are
// stored by index so the output does not depend on the thread count.

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "maglab/shooting.hpp"
#include "maglab/surface.hpp"

namespace maglab {

/// Runs fn(0..n-1) on up to `jobs` threads. The first exception is rethrown
/// after all workers finish.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct OrbitOptions {
  int points = 1024;
  MinimizeOptions minimize;
  ShootingOptions shooting;
};

/// Seed, minimize and refine one class, for the word exactly as given.
inline ClosedOrbit solve_class(const MagneticSystem& sys, const Word& word, const OrbitOptions& opts = {}) {
  if (!sys.surface()) throw InputError("solve_class: system has no surface");
  const DiscreteLoop seed = initial_loop(sys.surface()->group(), word, opts.points);
  const DiscreteLoop loop = minimize_action(sys, seed, opts.minimize);
  return shoot_refine(sys, loop, opts.shooting);
}

struct SpectrumEntry {
  Word word;
  double action = NAN;
  double length = NAN;
  double period = NAN;
  double el_residual = NAN;
  double crit_dp = NAN;
  double closure_error = NAN;
  double speed_drift = NAN;
  bool refined = false;
  std::string error;
};

struct Spectrum {
  std::string system;
  std::vector<SpectrumEntry> entries;
  std::vector<ClosedOrbit> orbits;  // parallel to entries when kept

  const SpectrumEntry* find(const std::string& word) const {
    for (const auto& e : entries)
      if (e.word.str() == word) return &e;
    return nullptr;
  }
};

inline SpectrumEntry entry_of(const ClosedOrbit& o) {
  SpectrumEntry e;
  e.word = o.word;
  e.action = o.action;
  e.length = o.length;
  e.period = o.period;
  e.el_residual = o.el_residual;
  e.crit_dp = o.crit_dp_value;
  e.closure_error = o.closure_error;
  e.speed_drift = o.speed_drift;
  e.refined = o.refined;
  if (!o.refined) e.error = o.diagnostic;
  return e;
}

/// Canonical, distinct words in first-seen order.
inline std::vector<Word> canonical_classes(const std::vector<Word>& words) {
  std::vector<Word> out;
  for (const Word& w : words) {
    const Word c = cyclic_reduce(w);
    if (std::none_of(out.begin(), out.end(), [&](const Word& o) { return o == c; })) out.push_back(c);
  }
  return out;
}

/// One entry per canonical class. Per-class failures are recorded in the
/// entry and the run continues.
inline Spectrum marked_spectrum(const MagneticSystem& sys, const std::vector<Word>& words, const OrbitOptions& opts = {},
                                int jobs = 1, bool keep_orbits = false) {
  Spectrum s;
  s.system = sys.name();
  const std::vector<Word> classes = canonical_classes(words);
  s.entries.resize(classes.size());
  if (keep_orbits) s.orbits.resize(classes.size());
  parallel_for(classes.size(), jobs, [&](std::size_t i) {
    try {
      ClosedOrbit o = solve_class(sys, classes[i], opts);
      s.entries[i] = entry_of(o);
      if (keep_orbits) s.orbits[i] = std::move(o);
    } catch (const std::exception& e) {
      s.entries[i].word = classes[i];
      s.entries[i].error = e.what();
    }
  });
  return s;
}

namespace detail {

inline double matrix_distance(const MobiusTransform& x, const MobiusTransform& y) {
  const double plus = std::abs(x.a() - y.a()) + std::abs(x.b() - y.b());
  const double minus = std::abs(x.a() + y.a()) + std::abs(x.b() + y.b());
  return std::min(plus, minus);
}

// Conjugate of t whose axis meets the fundamental octagon.
inline MobiusTransform axis_through_domain(const FuchsianGroup& group, const MobiusTransform& t) {
  const MobiusTransform h = group.normalize(axis_of(t).foot).second;
  return h * t * h.inverse();
}

}  // namespace detail

/// Whether two hyperbolic elements are conjugate in the group, by searching
/// for the conjugator among `elements` (which must reach translation length
/// plus twice the circumradius).
inline bool conjugate_in_group(const FuchsianGroup& group, const MobiusTransform& x, const MobiusTransform& y,
                               const std::vector<GroupElement>& elements, double tol = 1e-8) {
  if (std::abs(std::abs(x.trace()) - std::abs(y.trace())) > tol * std::abs(x.trace())) return false;
  const MobiusTransform xs = detail::axis_through_domain(group, x);
  const MobiusTransform ys = detail::axis_through_domain(group, y);
  const double scale = std::abs(ys.a()) + std::abs(ys.b());
  for (const auto& g : elements)
    if (detail::matrix_distance(g.matrix * xs * g.matrix.inverse(), ys) < tol * scale) return true;
  return false;
}

/// Representatives of the n shortest free homotopy classes of the surface,
/// as canonical words. Words conjugate in the surface group count once; the
/// representative is the first in (translation length, word) order.
inline std::vector<Word> shortest_classes(const FuchsianGroup& group, std::size_t n, int max_word_length = 4) {
  std::vector<std::pair<long long, Word>> all;
  for (const Word& w : canonical_words_up_to(max_word_length))
    all.emplace_back(std::llround(translation_length(group.matrix(w)) * 1e9), w);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return word_less(a.second.str(), b.second.str());
  });
  std::vector<GroupElement> elements;
  double reach = -1.0;
  const double circumradius = std::acosh(3.0 + 2.0 * std::numbers::sqrt2);
  std::vector<std::pair<long long, MobiusTransform>> kept;
  std::vector<Word> out;
  for (std::size_t i = 0; i < all.size() && out.size() < n; ++i) {
    const MobiusTransform m = group.matrix(all[i].second);
    const double need = all[i].first * 1e-9 + 2.0 * circumradius + 0.5;
    if (need > reach) {
      reach = need;
      elements = enumerate_group(group, reach);
    }
    bool duplicate = false;
    for (const auto& [len, k] : kept)
      if (len == all[i].first && conjugate_in_group(group, m, k, elements)) {
        duplicate = true;
        break;
      }
    if (duplicate) continue;
    kept.emplace_back(all[i].first, m);
    out.push_back(all[i].second);
  }
  return out;
}

}  // namespace maglab
