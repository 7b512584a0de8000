#pragma once

// The genus-2 surface group acting on the disk: four hyperbolic generators
// pairing opposite sides of the regular octagon with angles pi/4.

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

#include "maglab/mobius.hpp"
#include "maglab/word.hpp"

namespace maglab {

struct GroupElement {
  Word word;
  MobiusTransform matrix;
  double displacement = 0.0;  // d(0, g 0)
};

class FuchsianGroup {
 public:
  FuchsianGroup(std::array<MobiusTransform, 4> generators, Word relator)
      : generators_(generators), relator_(std::move(relator)) {
    systole_ = translation_length(generators_[0]);
    for (int k = 0; k < 4; ++k) {
      letters_[k] = generators_[k];
      letters_[k + 4] = generators_[k].inverse();
      letter_images_[k] = letters_[k].apply_unchecked(0.0);
      letter_images_[k + 4] = letters_[k + 4].apply_unchecked(0.0);
    }
  }

  const std::array<MobiusTransform, 4>& generators() const { return generators_; }
  const Word& relator() const { return relator_; }
  double systole() const { return systole_; }

  /// Matrix of one letter of kAlphabet.
  const MobiusTransform& letter(char c) const { return letters_[kAlphabet.find(c)]; }
  const MobiusTransform& letter(int index) const { return letters_[index]; }

  MobiusTransform matrix(const Word& w) const {
    MobiusTransform m;
    for (char c : w.letters) {
      letter_generator(c);  // validates
      m = m * letter(c);
    }
    return m;
  }

  /// Moves z into the Dirichlet octagon centred at 0: returns (h z, h).
  /// A point is moved only when some neighbouring centre is closer by more
  /// than `buffer` in the sinh^2(d/2) comparison, which makes the map idempotent.
  std::pair<Point, MobiusTransform> normalize(Point z, double buffer = 1e-12) const {
    MobiusTransform h;
    const double rho2 = std::norm(letter_images_[0]);
    for (int guard = 0; guard < 100000; ++guard) {
      // d(z, s0) < d(z, 0)  <=>  |z - s0|^2 / (1 - |s0|^2) < |z|^2
      const double own = std::norm(z);
      int best = -1;
      double best_val = own * (1.0 - buffer);
      for (int k = 0; k < 8; ++k) {
        const double v = std::norm(z - letter_images_[k]) / (1.0 - rho2);
        if (v < best_val) {
          best_val = v;
          best = k;
        }
      }
      if (best < 0) return {z, h};
      const MobiusTransform step = letters_[best].inverse();
      z = step.apply_unchecked(z);
      h = step * h;
    }
    throw NumericalError("normalize: no fundamental-domain translate found");
  }

 private:
  std::array<MobiusTransform, 4> generators_;
  std::array<MobiusTransform, 8> letters_;
  std::array<Point, 8> letter_images_;
  Word relator_;
  double systole_ = 0.0;
};

inline MobiusTransform word_to_matrix(const FuchsianGroup& g, const Word& w) { return g.matrix(w); }

namespace detail {

inline std::array<MobiusTransform, 4> octagon_generators() {
  const double a = 1.0 + std::numbers::sqrt2;
  const double b = std::sqrt(2.0 + 2.0 * std::numbers::sqrt2);
  std::array<MobiusTransform, 4> gens;
  for (int k = 0; k < 4; ++k) gens[k] = MobiusTransform(a, std::polar(b, k * std::numbers::pi / 4.0));
  return gens;
}

}  // namespace detail

/// The octagon group. The relator is the lexicographically first ordering of
/// the eight letters whose product is +-identity.
inline FuchsianGroup standard_group() {
  const auto gens = detail::octagon_generators();
  std::array<MobiusTransform, 8> letters;
  for (int k = 0; k < 4; ++k) {
    letters[k] = gens[k];
    letters[k + 4] = gens[k].inverse();
  }
  std::array<int, 8> perm = {0, 1, 2, 3, 4, 5, 6, 7};
  do {
    if (perm[0] != 0) break;  // a relator can always be rotated to start with 'a'
    MobiusTransform m;
    for (int idx : perm) m = m * letters[idx];
    if (m.distance_to_identity() < 1e-10) {
      Word rel;
      for (int idx : perm) rel.letters.push_back(kAlphabet[idx]);
      return FuchsianGroup(gens, rel);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  throw NumericalError("standard_group: no octagon pairing ordering closes to the identity");
}

struct EnumerationOptions {
  std::size_t cap = 100000;
};

/// All elements g with d(0, g 0) <= radius, each once, ordered by displacement
/// then by word. Breadth-first over reduced words; a branch is pruned once
/// its displacement exceeds radius + circumradius of the octagon, which keeps
/// every tile met by the segment [0, g0].
inline std::vector<GroupElement> enumerate_group(const FuchsianGroup& group, double radius,
                                                 EnumerationOptions opts = {}) {
  if (radius < 0.0) throw InputError("enumerate_group: negative radius");
  const double circumradius = std::acosh(3.0 + 2.0 * std::numbers::sqrt2);
  const double prune = radius + circumradius + 1e-9;

  std::map<std::pair<long long, long long>, std::size_t> seen;
  auto key_of = [](Point p) { return std::pair<long long, long long>{std::llround(p.real() * 1e9), std::llround(p.imag() * 1e9)}; };
  auto find = [&](Point p) -> bool {
    const auto k = key_of(p);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy)
        if (seen.count({k.first + dx, k.second + dy})) return true;
    return false;
  };

  std::vector<GroupElement> all;
  std::deque<std::size_t> queue;
  all.push_back({Word(), MobiusTransform(), 0.0});
  seen[key_of(0.0)] = 0;
  queue.push_back(0);
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (int li = 0; li < 8; ++li) {
      const char c = kAlphabet[li];
      const GroupElement& g = all[cur];
      if (!g.word.empty() && g.word.letters.back() == inverse_letter(c)) continue;
      const MobiusTransform m = g.matrix * group.letter(li);
      const Point p = m.apply_unchecked(0.0);
      if (!(std::norm(p) < 1.0)) continue;
      const double d = hyperbolic_distance(0.0, p);
      if (d > prune || find(p)) continue;
      GroupElement next{g.word, m, d};
      next.word.letters.push_back(c);
      seen[key_of(p)] = all.size();
      all.push_back(std::move(next));
      if (all.size() > opts.cap)
        throw ResourceError("enumerate_group: more than " + std::to_string(opts.cap) + " elements; lower the radius");
      queue.push_back(all.size() - 1);
    }
  }
  std::vector<GroupElement> out;
  for (auto& g : all)
    if (g.displacement <= radius + 1e-12) out.push_back(std::move(g));
  std::stable_sort(out.begin(), out.end(), [](const GroupElement& x, const GroupElement& y) {
    if (std::abs(x.displacement - y.displacement) > 1e-9) return x.displacement < y.displacement;
    return word_less(x.word.letters, y.word.letters);
  });
  return out;
}

}  // namespace maglab
