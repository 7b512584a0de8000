#pragma once

// Report assembly and deterministic serialization. Numbers are written with
// 17 significant digits, keys in insertion order, non-finite values as null;
// no timestamps or host data, so identical inputs give identical bytes.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "maglab/config.hpp"

namespace maglab {

using OrderedJson = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

namespace detail {

inline std::string format_number(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_json(std::ostream& os, const OrderedJson& j, int indent) {
  const std::string pad(2 * (indent + 1), ' '), close(2 * indent, ' ');
  switch (j.type()) {
    case OrderedJson::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << pad << OrderedJson(k).dump() << ": ";
        write_json(os, v, indent + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case OrderedJson::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write_json(os, j[i], indent + 1);
      }
      os << "\n" << close << "]";
      return;
    }
    case OrderedJson::value_t::number_float:
      os << format_number(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

inline OrderedJson number(double x) { return std::isfinite(x) ? OrderedJson(x) : OrderedJson(); }

inline OrderedJson ordered(const Json& j) { return OrderedJson::parse(j.dump()); }

}  // namespace detail

inline std::string to_text(const OrderedJson& j) {
  std::ostringstream os;
  detail::write_json(os, j, 0);
  os << "\n";
  return os.str();
}

/// Settings needed to reproduce a run.
inline OrderedJson metadata(const Config& c) {
  OrderedJson m;
  m["version"] = kVersion;
  m["system"] = c.name;
  m["metric"] = detail::ordered(c.metric);
  m["one_form"] = detail::ordered(c.one_form);
  m["solver"] = {{"M", c.orbit.points},
                 {"grad_tol", c.orbit.minimize.gradient_tolerance},
                 {"max_iterations", c.orbit.minimize.max_iterations},
                 {"residual_tol", c.orbit.shooting.residual_tolerance},
                 {"max_newton", c.orbit.shooting.max_newton}};
  m["integrator"] = {{"method", "RK4"},
                     {"total_steps", c.orbit.shooting.total_steps},
                     {"segment_time", c.orbit.shooting.segment_time}};
  m["quadrature"] = {{"gauss_points", c.domain.gauss_points}, {"level", c.domain.level}};
  m["class_enumeration"] = "translation length, surface-group conjugacy; conjugator search radius l + 2 circumradius + 0.5";
  m["seed"] = c.seed;
  return m;
}

inline OrderedJson to_json(const SpectrumEntry& e) {
  OrderedJson j;
  j["word"] = e.word.str();
  j["action"] = detail::number(e.action);
  j["length"] = detail::number(e.length);
  j["period"] = detail::number(e.period);
  j["el_residual"] = detail::number(e.el_residual);
  j["crit_dp"] = detail::number(e.crit_dp);
  j["closure_error"] = detail::number(e.closure_error);
  j["speed_drift"] = detail::number(e.speed_drift);
  j["refined"] = e.refined;
  if (!e.error.empty()) j["error"] = e.error;
  return j;
}

inline OrderedJson to_json(const Spectrum& s) {
  OrderedJson j;
  j["system"] = s.system;
  j["entries"] = OrderedJson::array();
  for (const auto& e : s.entries) j["entries"].push_back(to_json(e));
  return j;
}

inline OrderedJson to_json(const ClosedOrbit& o, std::size_t max_samples = 200) {
  OrderedJson j = to_json(entry_of(o));
  j["newton_iterations"] = o.newton_iterations;
  j["energy"] = detail::number(o.energy);
  j["alpha_integral"] = detail::number(o.alpha_integral);
  j["initial"] = {detail::number(o.initial.z.real()), detail::number(o.initial.z.imag()), detail::number(o.initial.v.x()),
                  detail::number(o.initial.v.y())};
  OrderedJson samples = OrderedJson::array();
  const std::size_t n = o.samples.size(), stride = n > max_samples ? (n + max_samples - 1) / max_samples : 1;
  for (std::size_t i = 0; i < n; i += stride) {
    const auto& s = o.samples[i];
    samples.push_back({detail::number(s.t), detail::number(s.state.z.real()), detail::number(s.state.z.imag()),
                       detail::number(s.state.v.x()), detail::number(s.state.v.y())});
  }
  j["samples"] = samples;
  return j;
}

inline OrderedJson to_json(const LinearizationResult& r) {
  OrderedJson j;
  j["words"] = OrderedJson::array();
  for (std::size_t i = 0; i < r.words.size(); ++i)
    j["words"].push_back({{"word", r.words[i].str()},
                          {"base_action", detail::number(r.base_action[i])},
                          {"first_order", detail::number(r.first_order[i])}});
  j["rows"] = OrderedJson::array();
  for (const auto& row : r.rows) {
    OrderedJson x{{"eps", detail::number(row.eps)}, {"remainder", detail::number(row.remainder)}, {"worst_word", row.worst_word}};
    if (!row.error.empty()) x["error"] = row.error;
    j["rows"].push_back(x);
  }
  j["slope"] = detail::number(r.slope);
  j["slope_in_range"] = r.slope_in_range;
  j["at_floor"] = r.at_floor;
  return j;
}

inline OrderedJson to_json(const HolderChains& h) {
  auto arr = [](const auto& a) {
    OrderedJson x = OrderedJson::array();
    for (double v : a) x.push_back(detail::number(v));
    return x;
  };
  return {{"volume1", detail::number(h.volume1)},
          {"volume2", detail::number(h.volume2)},
          {"swapped", h.swapped},
          {"energy_chain", arr(h.energy)},
          {"energy_slack", arr(h.energy_slack)},
          {"length_chain", arr(h.length)},
          {"length_slack", arr(h.length_slack)},
          {"energy_total_slack", detail::number(h.energy_total_slack)},
          {"length_total_slack", detail::number(h.length_total_slack)},
          {"holds", h.holds},
          {"strict", h.strict},
          {"accuracy_warning", h.accuracy_warning}};
}

inline OrderedJson to_json(const ConformalResult& r) {
  OrderedJson j;
  j["holder_chains"] = to_json(r.chains);
  j["space_average"] = detail::number(r.space_average);
  j["orbit_averages"] = OrderedJson::array();
  for (const auto& a : r.averages) {
    OrderedJson x{{"word", a.word}, {"length", detail::number(a.length)}, {"functional", detail::number(a.functional)}};
    if (!a.error.empty()) x["error"] = a.error;
    j["orbit_averages"].push_back(x);
  }
  j["actions"] = OrderedJson::array();
  for (const auto& g : r.gaps) {
    OrderedJson x{{"word", g.word}, {"action1", detail::number(g.action1)}, {"action2", detail::number(g.action2)}};
    if (!g.error.empty()) x["error"] = g.error;
    j["actions"].push_back(x);
  }
  j["gap"] = detail::number(r.gap);
  j["complete"] = r.complete;
  return j;
}

inline OrderedJson to_json(const AverageDecay& r) {
  OrderedJson j;
  j["rows"] = OrderedJson::array();
  for (const auto& row : r.rows) {
    OrderedJson x{{"word", row.word}, {"length", detail::number(row.length)}, {"average", detail::number(row.average)}};
    if (!row.error.empty()) x["error"] = row.error;
    j["rows"].push_back(x);
  }
  j["trend"] = detail::number(r.trend);
  j["decreasing"] = r.decreasing;
  return j;
}

inline OrderedJson to_json(const CriteriaReport& r) {
  OrderedJson j;
  j["crit_b"] = OrderedJson::array();
  for (const auto& m : r.margins)
    j["crit_b"].push_back({{"grid", m.grid},
                           {"margin", detail::number(m.margin.worst)},
                           {"worst_point", {detail::number(m.margin.worst_point.real()), detail::number(m.margin.worst_point.imag())}},
                           {"evaluations", m.margin.evaluations},
                           {"pass", m.margin.pass}});
  j["crit_dp"] = OrderedJson::array();
  for (const auto& d : r.dp) {
    OrderedJson x{{"word", d.word}, {"value", detail::number(d.value)}, {"pass", d.pass}};
    if (!d.error.empty()) x["error"] = d.error;
    j["crit_dp"].push_back(x);
  }
  j["verdict"] = std::string("s-injectivity criteria satisfied: ") + (r.verdict ? "yes" : "no");
  j["conventions"] = r.conventions;
  return j;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string csv_number(double x) { return std::isfinite(x) ? detail::format_number(x) : ""; }

inline std::string to_csv(const Spectrum& s) {
  std::string out = "word,action,length,period,el_residual,crit_dp,closure_error,speed_drift,refined,error\n";
  for (const auto& e : s.entries)
    out += e.word.str() + "," + csv_number(e.action) + "," + csv_number(e.length) + "," + csv_number(e.period) + "," +
           csv_number(e.el_residual) + "," + csv_number(e.crit_dp) + "," + csv_number(e.closure_error) + "," +
           csv_number(e.speed_drift) + "," + (e.refined ? "1" : "0") + "," + csv_field(e.error) + "\n";
  return out;
}

inline std::string to_csv(const LinearizationResult& r) {
  std::string out = "eps,remainder,worst_word,error\n";
  for (const auto& row : r.rows)
    out += csv_number(row.eps) + "," + csv_number(row.remainder) + "," + row.worst_word + "," + csv_field(row.error) + "\n";
  return out;
}

inline std::string to_csv(const ConformalResult& r) {
  std::string out = "word,action1,action2,difference\n";
  for (const auto& g : r.gaps)
    out += g.word + "," + csv_number(g.action1) + "," + csv_number(g.action2) + "," + csv_number(g.action2 - g.action1) + "\n";
  return out;
}

inline std::string to_csv(const AverageDecay& r) {
  std::string out = "word,length,average,error\n";
  for (const auto& row : r.rows)
    out += row.word + "," + csv_number(row.length) + "," + csv_number(row.average) + "," + csv_field(row.error) + "\n";
  return out;
}

inline std::string to_csv(const CriteriaReport& r) {
  std::string out = "kind,key,value,pass\n";
  for (const auto& m : r.margins)
    out += "crit_b,grid " + std::to_string(m.grid) + "," + csv_number(m.margin.worst) + "," + (m.margin.pass ? "1" : "0") + "\n";
  for (const auto& d : r.dp) out += "crit_dp," + d.word + "," + csv_number(d.value) + "," + (d.pass ? "1" : "0") + "\n";
  return out;
}

}  // namespace maglab
