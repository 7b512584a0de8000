#pragma once

// Words over the surface-group alphabet a,b,c,d with inverses A,B,C,D.
// Free homotopy classes are conjugacy classes; a cyclically reduced word in
// its lexicographically least rotation is the canonical representative.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "maglab/errors.hpp"

namespace maglab {

inline constexpr std::string_view kAlphabet = "abcdABCD";

inline bool is_letter(char c) { return kAlphabet.find(c) != std::string_view::npos; }

inline char inverse_letter(char c) {
  return std::islower(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                                                     : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

/// Generator index 0..3 and whether the letter is the inverse.
inline std::pair<int, bool> letter_generator(char c) {
  const auto pos = kAlphabet.find(c);
  if (pos == std::string_view::npos) throw InputError(std::string("invalid word letter '") + c + "'");
  return {static_cast<int>(pos % 4), pos >= 4};
}

struct Word {
  std::string letters;
  bool canonical = false;

  Word() = default;
  /// Parses a word, ignoring whitespace. Throws InputError on other characters.
  explicit Word(std::string_view text) {
    for (char c : text) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      if (!is_letter(c)) throw InputError(std::string("invalid word letter '") + c + "' in \"" + std::string(text) + "\"");
      letters.push_back(c);
    }
  }

  bool empty() const { return letters.empty(); }
  std::size_t size() const { return letters.size(); }
  const std::string& str() const { return letters; }

  friend bool operator==(const Word& a, const Word& b) { return a.letters == b.letters; }
};

inline Word inverse(const Word& w) {
  Word r;
  r.letters.reserve(w.size());
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) r.letters.push_back(inverse_letter(*it));
  return r;
}

inline Word concat(const Word& a, const Word& b) {
  Word r;
  r.letters = a.letters + b.letters;
  return r;
}

inline Word power(const Word& w, int n) {
  Word r;
  for (int i = 0; i < n; ++i) r.letters += w.letters;
  return r;
}

/// Cancels adjacent inverse pairs.
inline Word free_reduce(const Word& w) {
  Word r;
  for (char c : w.letters) {
    if (!r.letters.empty() && r.letters.back() == inverse_letter(c))
      r.letters.pop_back();
    else
      r.letters.push_back(c);
  }
  return r;
}

/// Letter ranks follow kAlphabet, so lowercase sorts before uppercase.
inline bool word_less(const std::string& a, const std::string& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](char x, char y) { return kAlphabet.find(x) < kAlphabet.find(y); });
}

/// Canonical representative of the conjugacy class in the free group.
inline Word cyclic_reduce(const Word& w) {
  Word r = free_reduce(w);
  std::size_t lo = 0, hi = r.letters.size();
  while (hi - lo >= 2 && r.letters[lo] == inverse_letter(r.letters[hi - 1])) {
    ++lo;
    --hi;
  }
  const std::string core = r.letters.substr(lo, hi - lo);
  std::string best = core;
  for (std::size_t k = 1; k < core.size(); ++k) {
    std::string rot = core.substr(k) + core.substr(0, k);
    if (word_less(rot, best)) best = std::move(rot);
  }
  Word out;
  out.letters = best;
  out.canonical = true;
  return out;
}

/// All canonical words with 1 <= length <= max_length, without duplicates.
inline std::vector<Word> canonical_words_up_to(int max_length) {
  std::vector<Word> out;
  std::vector<std::string> frontier = {""};
  for (int len = 1; len <= max_length; ++len) {
    std::vector<std::string> next;
    for (const auto& s : frontier)
      for (char c : kAlphabet) {
        if (!s.empty() && s.back() == inverse_letter(c)) continue;
        next.push_back(s + c);
      }
    for (const auto& s : next) {
      Word w;
      w.letters = s;
      Word c = cyclic_reduce(w);
      if (c.letters == s) out.push_back(c);
    }
    frontier = std::move(next);
  }
  return out;
}

/// A pseudo-random canonical word of exactly the given length.
inline Word random_canonical_word(int length, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 7);
  for (;;) {
    Word w;
    while (static_cast<int>(w.size()) < length) {
      const char c = kAlphabet[pick(rng)];
      if (!w.letters.empty() && w.letters.back() == inverse_letter(c)) continue;
      w.letters.push_back(c);
    }
    Word c = cyclic_reduce(w);
    if (static_cast<int>(c.size()) == length) return c;
  }
}

}  // namespace maglab
