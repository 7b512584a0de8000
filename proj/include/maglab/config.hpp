#pragma once

// JSON configuration: field specs, solver settings, word lists and experiment
// parameters. Unknown keys are rejected so that typos do not silently fall
// back to defaults.
//
//   bump spec      {"bumps":[{"center":[x,y],"radius":r,"amplitude":a}], "constant":c}
//   1-form spec    {"pairs":[{"u":bump spec,"v":bump spec,"coeff":c}], "exact_part":bump spec}
//   tensor spec    {"sym_products":[{"u":..,"v":..,"coeff":c}], "metric_multiple":bump spec}

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maglab/experiments.hpp"

namespace maglab {

using Json = nlohmann::json;

namespace detail {

inline void allow_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.contains(k)) throw InputError(where + ": unknown key \"" + k + "\"");
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(where + ": bad value for \"" + key + "\"");
  }
}

}  // namespace detail

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline ScalarField parse_scalar(const Json& j, const SurfacePtr& surface, const std::string& where = "scalar") {
  if (j.is_null()) return {};
  if (j.is_number()) return ScalarField::constant(j.get<double>());
  detail::allow_keys(j, {"bumps", "constant"}, where);
  std::vector<Bump> bumps;
  for (const Json& b : j.value("bumps", Json::array())) {
    detail::allow_keys(b, {"center", "radius", "amplitude"}, where + ".bumps");
    const auto c = detail::get_or<std::vector<double>>(b, "center", {0.0, 0.0}, where);
    if (c.size() != 2) throw InputError(where + ": center must be [x, y]");
    bumps.push_back({Point(c[0], c[1]), detail::get_or(b, "radius", 0.5, where), detail::get_or(b, "amplitude", 0.0, where)});
  }
  return ScalarField::from_bumps(surface, bumps, detail::get_or(j, "constant", 0.0, where));
}

inline OneFormField parse_one_form(const Json& j, const SurfacePtr& surface, const std::string& where = "one_form") {
  if (j.is_null()) return {};
  detail::allow_keys(j, {"pairs", "exact_part"}, where);
  std::vector<UdvTerm> terms;
  for (const Json& p : j.value("pairs", Json::array())) {
    detail::allow_keys(p, {"u", "v", "coeff"}, where + ".pairs");
    terms.push_back({detail::get_or(p, "coeff", 1.0, where), parse_scalar(p.value("u", Json()), surface, where + ".u"),
                     parse_scalar(p.value("v", Json()), surface, where + ".v")});
  }
  ScalarField exact = parse_scalar(j.value("exact_part", Json()), surface, where + ".exact_part");
  if (terms.empty() && exact.is_constant()) return {};
  return OneFormField::udv(std::move(terms), std::move(exact));
}

inline SymTensorField parse_tensor(const Json& j, const ConformalMetric& g, const SurfacePtr& surface,
                                   const std::string& where = "p") {
  if (j.is_null()) return {};
  detail::allow_keys(j, {"sym_products", "metric_multiple"}, where);
  SymTensorField t;
  for (const Json& p : j.value("sym_products", Json::array())) {
    detail::allow_keys(p, {"u", "v", "coeff"}, where + ".sym_products");
    t = t + SymTensorField::sym_product(parse_scalar(p.value("u", Json()), surface, where + ".u"),
                                        parse_scalar(p.value("v", Json()), surface, where + ".v"),
                                        detail::get_or(p, "coeff", 1.0, where));
  }
  if (j.contains("metric_multiple")) t = t + metric_multiple(g, parse_scalar(j["metric_multiple"], surface, where));
  return t;
}

/// Either a tensor pair {"p":..,"q":..} or a potential {"potential":{"xi":..,"phi":..}}.
struct PairSpec {
  TensorPair pair;
  bool is_potential = false;
  PotentialPair potential;
};

inline PairSpec parse_pair(const Json& j, const MagneticSystem& sys) {
  detail::allow_keys(j, {"p", "q", "potential"}, "pair");
  PairSpec s;
  if (j.contains("potential")) {
    if (j.contains("p") || j.contains("q")) throw InputError("pair: give either p/q or potential, not both");
    const Json& pj = j["potential"];
    detail::allow_keys(pj, {"xi", "phi"}, "pair.potential");
    s.is_potential = true;
    s.potential = {parse_one_form(pj.value("xi", Json()), sys.surface(), "pair.potential.xi"),
                   parse_scalar(pj.value("phi", Json()), sys.surface(), "pair.potential.phi")};
    s.pair = d_mu(sys, s.potential);
  } else {
    s.pair = {parse_tensor(j.value("p", Json()), sys.metric(), sys.surface()),
              parse_one_form(j.value("q", Json()), sys.surface(), "pair.q")};
  }
  return s;
}

struct LinearizationConfig {
  std::vector<double> eps{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  Json f;     // conformal direction
  Json beta;  // 1-form direction
};

struct ConformalConfig {
  Json f;
  std::vector<int> average_lengths{2, 4, 6, 8};
};

struct Config {
  std::string name = "system";
  Json metric;
  Json one_form;
  DomainOptions domain;
  OrbitOptions orbit;
  std::vector<Word> words;
  int shortest = 0;  // used when no explicit words are given
  std::uint64_t seed = 1;
  LinearizationConfig linearization;
  ConformalConfig conformal;
  std::vector<int> average_lengths{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::vector<int> grids{8, 16};
  int directions = 16;
};

inline Config parse_config(const Json& j) {
  detail::allow_keys(j, {"name", "surface", "quadrature", "metric", "one_form", "integrator", "solver", "words", "shortest",
                         "seed", "experiments"},
                     "config");
  Config c;
  c.name = detail::get_or<std::string>(j, "name", c.name, "config");
  if (j.contains("surface")) {
    detail::allow_keys(j["surface"], {"genus"}, "surface");
    if (detail::get_or(j["surface"], "genus", 2, "surface") != 2) throw InputError("surface: only genus 2 is supported");
  }
  if (j.contains("quadrature")) {
    const Json& q = j["quadrature"];
    detail::allow_keys(q, {"gauss_points", "level", "tolerance"}, "quadrature");
    c.domain.gauss_points = detail::get_or(q, "gauss_points", c.domain.gauss_points, "quadrature");
    c.domain.level = detail::get_or(q, "level", c.domain.level, "quadrature");
    c.domain.tolerance = detail::get_or(q, "tolerance", c.domain.tolerance, "quadrature");
  }
  c.metric = j.value("metric", Json());
  c.one_form = j.value("one_form", Json());
  if (j.contains("integrator")) {
    const Json& i = j["integrator"];
    detail::allow_keys(i, {"total_steps", "segment_time"}, "integrator");
    c.orbit.shooting.total_steps = detail::get_or(i, "total_steps", c.orbit.shooting.total_steps, "integrator");
    c.orbit.shooting.segment_time = detail::get_or(i, "segment_time", c.orbit.shooting.segment_time, "integrator");
  }
  if (j.contains("solver")) {
    const Json& s = j["solver"];
    detail::allow_keys(s, {"M", "grad_tol", "max_iterations", "residual_tol", "max_newton"}, "solver");
    c.orbit.points = detail::get_or(s, "M", c.orbit.points, "solver");
    c.orbit.minimize.gradient_tolerance = detail::get_or(s, "grad_tol", c.orbit.minimize.gradient_tolerance, "solver");
    c.orbit.minimize.max_iterations = detail::get_or(s, "max_iterations", c.orbit.minimize.max_iterations, "solver");
    c.orbit.shooting.residual_tolerance = detail::get_or(s, "residual_tol", c.orbit.shooting.residual_tolerance, "solver");
    c.orbit.shooting.max_newton = detail::get_or(s, "max_newton", c.orbit.shooting.max_newton, "solver");
  }
  if (c.orbit.points < kMinLoopPoints) throw InputError("solver: M must be at least " + std::to_string(kMinLoopPoints));
  if (c.orbit.shooting.total_steps < 2) throw InputError("integrator: total_steps must be at least 2");
  for (const auto& w : detail::get_or<std::vector<std::string>>(j, "words", {}, "config")) c.words.emplace_back(w);
  c.shortest = detail::get_or(j, "shortest", 0, "config");
  c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed, "config");
  if (j.contains("experiments")) {
    const Json& e = j["experiments"];
    detail::allow_keys(e, {"linearization", "conformal", "averages", "criteria"}, "experiments");
    if (e.contains("linearization")) {
      const Json& l = e["linearization"];
      detail::allow_keys(l, {"eps", "f", "beta"}, "experiments.linearization");
      c.linearization.eps = detail::get_or(l, "eps", c.linearization.eps, "experiments.linearization");
      c.linearization.f = l.value("f", Json());
      c.linearization.beta = l.value("beta", Json());
    }
    if (e.contains("conformal")) {
      const Json& k = e["conformal"];
      detail::allow_keys(k, {"f", "average_lengths"}, "experiments.conformal");
      c.conformal.f = k.value("f", Json());
      c.conformal.average_lengths =
          detail::get_or(k, "average_lengths", c.conformal.average_lengths, "experiments.conformal");
    }
    if (e.contains("averages")) {
      detail::allow_keys(e["averages"], {"lengths"}, "experiments.averages");
      c.average_lengths = detail::get_or(e["averages"], "lengths", c.average_lengths, "experiments.averages");
    }
    if (e.contains("criteria")) {
      detail::allow_keys(e["criteria"], {"grids", "directions"}, "experiments.criteria");
      c.grids = detail::get_or(e["criteria"], "grids", c.grids, "experiments.criteria");
      c.directions = detail::get_or(e["criteria"], "directions", c.directions, "experiments.criteria");
    }
  }
  return c;
}

inline MagneticSystem make_system(const Config& c, const SurfacePtr& surface) {
  return MagneticSystem(surface, ConformalMetric(parse_scalar(c.metric, surface, "metric")),
                        parse_one_form(c.one_form, surface, "one_form"), c.name);
}

/// One word per line; blank lines and text after '#' are ignored.
inline std::vector<Word> read_words(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<Word> out;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string w;
    while (ss >> w) out.emplace_back(w);
  }
  return out;
}

/// Explicit words when given, otherwise the `shortest` shortest classes.
inline std::vector<Word> config_words(const Config& c, const FuchsianGroup& group) {
  if (!c.words.empty()) return c.words;
  if (c.shortest > 0) return shortest_classes(group, static_cast<std::size_t>(c.shortest));
  throw InputError("no words: give \"words\", \"shortest\" or --words");
}

}  // namespace maglab
