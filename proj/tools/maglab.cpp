// maglab: command-line front end.
//
//   maglab orbit      --config sys.json --word abAB
//   maglab spectrum   --config sys.json [--words words.txt] [--out s.json] [--format csv]
//   maglab xray       --config sys.json --pair pair.json [--words words.txt]
//   maglab criteria   --config sys.json [--words words.txt]
//   maglab experiment {linearization|conformal|averages} --config sys.json
//
// Exit status: 0 success, 1 input error, 2 numerical failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "maglab/maglab.hpp"

using namespace maglab;

namespace {

enum Exit { kOk = 0, kInput = 1, kNumerical = 2 };

struct Common {
  std::string config;
  std::string words;
  std::string out;
  std::string format = "json";
  int jobs = 1;
  bool verbose = false;
};

int default_jobs() {
  if (const char* env = std::getenv("MAGLAB_JOBS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "maglab: ignoring MAGLAB_JOBS=" << env << "\n";
  }
  return 1;
}

void add_common(CLI::App* cmd, Common& c, bool with_words = true) {
  cmd->add_option("--config", c.config, "system configuration (JSON)")->required();
  if (with_words) cmd->add_option("--words", c.words, "word list, one per line (overrides the config)");
  cmd->add_option("--out", c.out, "output file (default: stdout)");
  cmd->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--jobs", c.jobs, "concurrent classes (default: MAGLAB_JOBS or 1)")->check(CLI::PositiveNumber);
  cmd->add_flag("--verbose", c.verbose, "progress on stderr");
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw InputError("cannot write " + c.out);
  f << text;
}

void emit(const Common& c, const OrderedJson& j, const std::string& csv) { emit(c, c.format == "csv" ? csv : to_text(j)); }

struct Context {
  Config config;
  SurfacePtr surface;
  MagneticSystem system;
};

Context load(const Common& c) {
  Config cfg = parse_config(load_json(c.config));
  if (!c.words.empty()) cfg.words = read_words(c.words);
  SurfacePtr surface = make_surface(cfg.domain);
  MagneticSystem sys = make_system(cfg, surface);
  return {std::move(cfg), surface, std::move(sys)};
}

void log(const Common& c, const std::string& msg) {
  if (c.verbose) std::cerr << "maglab: " << msg << "\n";
}

bool all_refined(const std::vector<SpectrumEntry>& entries) {
  for (const auto& e : entries)
    if (!e.error.empty() || !e.refined) return false;
  return true;
}

int run_orbit(const Common& c, const std::string& word) {
  const Context ctx = load(c);
  log(c, "solving " + word);
  const ClosedOrbit o = solve_class(ctx.system, Word(word), ctx.config.orbit);
  OrderedJson j{{"metadata", metadata(ctx.config)}, {"orbit", to_json(o)}};
  Spectrum s;
  s.system = ctx.system.name();
  s.entries.push_back(entry_of(o));
  emit(c, j, to_csv(s));
  return o.refined ? kOk : kNumerical;
}

int run_spectrum(const Common& c) {
  const Context ctx = load(c);
  const auto words = config_words(ctx.config, ctx.surface->group());
  log(c, std::to_string(words.size()) + " words, " + std::to_string(c.jobs) + " jobs");
  const Spectrum s = marked_spectrum(ctx.system, words, ctx.config.orbit, c.jobs);
  OrderedJson j = to_json(s);
  j["metadata"] = metadata(ctx.config);
  emit(c, j, to_csv(s));
  return all_refined(s.entries) ? kOk : kNumerical;
}

int run_xray(const Common& c, const std::string& pair_path) {
  const Context ctx = load(c);
  const PairSpec pair = parse_pair(load_json(pair_path), ctx.system);
  const auto words = config_words(ctx.config, ctx.surface->group());
  const Spectrum s = marked_spectrum(ctx.system, words, ctx.config.orbit, c.jobs, true);
  double scale = NAN;
  if (pair.is_potential) scale = c1_norm(ctx.system, pair.potential.xi) + c1_norm(ctx.system, pair.potential.phi);
  OrderedJson rows = OrderedJson::array();
  std::string csv = "word,I2,relative_to_c1\n";
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    const auto& e = s.entries[i];
    OrderedJson row{{"word", e.word.str()}};
    double value = NAN;
    if (e.error.empty() && e.refined) value = xray_I2(ctx.system, pair.pair, s.orbits[i]);
    row["I2"] = detail::number(value);
    if (pair.is_potential) row["relative_to_c1"] = detail::number(std::abs(value) / scale);
    if (!e.error.empty()) row["error"] = e.error;
    rows.push_back(row);
    csv += e.word.str() + "," + csv_number(value) + "," + csv_number(std::abs(value) / scale) + "\n";
  }
  OrderedJson j{{"metadata", metadata(ctx.config)}, {"potential", pair.is_potential}, {"rows", rows}};
  if (pair.is_potential) j["c1_scale"] = detail::number(scale);
  emit(c, j, csv);
  return all_refined(s.entries) ? kOk : kNumerical;
}

int run_criteria(const Common& c) {
  const Context ctx = load(c);
  const auto words = config_words(ctx.config, ctx.surface->group());
  const CriteriaReport r = criteria_report(ctx.system, ctx.config.grids, words, ctx.config.orbit, c.jobs, ctx.config.directions);
  OrderedJson j = to_json(r);
  j["metadata"] = metadata(ctx.config);
  emit(c, j, to_csv(r));
  return all_refined(r.entries) && r.entries.size() == r.dp.size() ? kOk : kNumerical;
}

int run_linearization(const Common& c) {
  const Context ctx = load(c);
  const auto words = config_words(ctx.config, ctx.surface->group());
  const LinearizationConfig& lc = ctx.config.linearization;
  std::vector<std::pair<std::string, Direction>> dirs;
  const ScalarField f = parse_scalar(lc.f, ctx.surface, "experiments.linearization.f");
  const OneFormField beta = parse_one_form(lc.beta, ctx.surface, "experiments.linearization.beta");
  if (!f.is_constant() || f.constant_term() != 0.0) dirs.push_back({"conformal", {f, {}}});
  if (!beta.is_zero()) dirs.push_back({"one_form", {{}, beta}});
  if (dirs.empty()) throw InputError("experiments.linearization: give a direction f and/or beta");
  OrderedJson j{{"metadata", metadata(ctx.config)}, {"experiment", "linearization"}};
  j["eps"] = lc.eps;
  std::string csv = "direction,eps,remainder,worst_word,error\n";
  bool ok = true;
  for (const auto& [name, d] : dirs) {
    log(c, "direction " + name);
    const LinearizationResult r = linearization_experiment(ctx.system, d, lc.eps, words, ctx.config.orbit, c.jobs);
    j[name] = to_json(r);
    for (const auto& row : r.rows) {
      csv += name + "," + csv_number(row.eps) + "," + csv_number(row.remainder) + "," + row.worst_word + "," +
             csv_field(row.error) + "\n";
      ok = ok && row.error.empty();
    }
  }
  emit(c, j, csv);
  return ok ? kOk : kNumerical;
}

int run_conformal(const Common& c) {
  const Context ctx = load(c);
  const auto words = config_words(ctx.config, ctx.surface->group());
  const ScalarField f = parse_scalar(ctx.config.conformal.f, ctx.surface, "experiments.conformal.f");
  const auto avg = random_words(ctx.config.conformal.average_lengths, ctx.config.seed);
  const ConformalResult r = conformal_experiment(ctx.system, f, words, avg, ctx.config.orbit, c.jobs);
  OrderedJson j{{"metadata", metadata(ctx.config)}, {"experiment", "conformal"}, {"result", to_json(r)}};
  emit(c, j, to_csv(r));
  return r.complete ? kOk : kNumerical;
}

int run_averages(const Common& c) {
  const Context ctx = load(c);
  const auto words = random_words(ctx.config.average_lengths, ctx.config.seed);
  const AverageDecay r = oneform_average_decay(ctx.system, words, ctx.config.orbit, c.jobs);
  OrderedJson j{{"metadata", metadata(ctx.config)}, {"experiment", "averages"}, {"result", to_json(r)}};
  emit(c, j, to_csv(r));
  return r.rows.size() == r.entries.size() ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maglab: magnetic action spectra, X-ray transforms and rigidity experiments on the genus-2 Bolza surface"};
  app.require_subcommand(1);
  Common common;
  common.jobs = default_jobs();

  std::string word, pair_path, which;
  auto* orbit = app.add_subcommand("orbit", "refine the closed magnetic geodesic of one class");
  add_common(orbit, common, false);
  orbit->add_option("--word", word, "class representative")->required();
  auto* spectrum = app.add_subcommand("spectrum", "marked action spectrum over a word list");
  add_common(spectrum, common);
  auto* xray = app.add_subcommand("xray", "X-ray transform of a tensor pair or potential over a word list");
  add_common(xray, common);
  xray->add_option("--pair", pair_path, "pair JSON")->required();
  auto* criteria = app.add_subcommand("criteria", "injectivity criteria report");
  add_common(criteria, common);
  auto* experiment = app.add_subcommand("experiment", "headline experiments");
  add_common(experiment, common);
  experiment->add_option("name", which, "linearization, conformal or averages")
      ->required()
      ->check(CLI::IsMember({"linearization", "conformal", "averages"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const auto used = app.get_subcommands();
    std::cerr << "maglab: " << e.what() << "\n\n" << (used.empty() ? app.help() : used.front()->help());
    return kInput;
  }

  try {
    if (*orbit) return run_orbit(common, word);
    if (*spectrum) return run_spectrum(common);
    if (*xray) return run_xray(common, pair_path);
    if (*criteria) return run_criteria(common);
    if (which == "linearization") return run_linearization(common);
    if (which == "conformal") return run_conformal(common);
    return run_averages(common);
  } catch (const InputError& e) {
    std::cerr << "maglab: " << e.what() << "\n";
    return kInput;
  } catch (const DomainError& e) {
    std::cerr << "maglab: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "maglab: " << e.what() << "\n";
    return kNumerical;
  }
}
