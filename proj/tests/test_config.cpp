#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "maglab/maglab.hpp"

using namespace maglab;

namespace {

const SurfacePtr& surface() {
  static const SurfacePtr s = make_surface();
  return s;
}

std::string temp_file(const std::string& name, const std::string& text) {
  const std::string path = testing::TempDir() + name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const Config c = parse_config(Json::parse(R"({
    "name": "demo", "surface": {"genus": 2},
    "solver": {"M": 64, "residual_tol": 1e-11},
    "integrator": {"total_steps": 5000},
    "words": ["ab", "abAB"], "seed": 9,
    "experiments": {"criteria": {"grids": [4]}, "linearization": {"eps": [0.1, 0.01, 0.001]}}
  })"));
  EXPECT_EQ(c.name, "demo");
  EXPECT_EQ(c.orbit.points, 64);
  EXPECT_EQ(c.orbit.shooting.residual_tolerance, 1e-11);
  EXPECT_EQ(c.orbit.shooting.total_steps, 5000);
  ASSERT_EQ(c.words.size(), 2u);
  EXPECT_EQ(c.words[1].str(), "abAB");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.grids, std::vector<int>{4});
  EXPECT_EQ(c.linearization.eps.size(), 3u);
  EXPECT_EQ(c.directions, 16);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config(Json::parse(R"({"metrik": {}})")), InputError);
  EXPECT_THROW(parse_config(Json::parse(R"({"surface": {"genus": 3}})")), InputError);
  EXPECT_THROW(parse_config(Json::parse(R"({"solver": {"M": 2}})")), InputError);
  EXPECT_THROW(parse_config(Json::parse(R"({"solver": {"M": "many"}})")), InputError);
  EXPECT_THROW(parse_config(Json::parse(R"({"experiments": {"criteria": {"grid": [4]}}})")), InputError);
  EXPECT_THROW(parse_scalar(Json::parse(R"({"bumps": [{"center": [0.1]}]})"), surface()), InputError);
  EXPECT_THROW(load_json("/nonexistent/config.json"), InputError);
  EXPECT_THROW(load_json(temp_file("broken.json", "{\"name\": ")), InputError);
  EXPECT_THROW(config_words(Config{}, surface()->group()), InputError);
}

TEST(Config, FieldSpecsBuildFields) {
  const ScalarField f = parse_scalar(
      Json::parse(R"({"bumps": [{"center": [0.2, 0.1], "radius": 1.0, "amplitude": 0.05}], "constant": 0.5})"), surface());
  const ScalarField g = ScalarField::from_bumps(surface(), {{Point(0.2, 0.1), 1.0, 0.05}}, 0.5);
  for (Point z : {Point(0.0, 0.0), Point(0.3, -0.2)}) EXPECT_EQ(f.value(z), g.value(z));
  EXPECT_EQ(parse_scalar(Json(0.25), surface()).value(Point(0.1, 0.1)), 0.25);
  EXPECT_TRUE(parse_one_form(Json(), surface()).is_zero());
  const OneFormField a = parse_one_form(Json::parse(R"({"pairs": [{"u": 0.5, "v": {"bumps": []}}]})"), surface());
  EXPECT_EQ(a.value(Point(0.2, 0.2)).norm(), 0.0);  // u dv with constant v
}

TEST(Config, PotentialPairIsMappedThroughDMu) {
  const MagneticSystem sys(surface(), ConformalMetric(), OneFormField(), "hyperbolic");
  const PairSpec p = parse_pair(load_json(MAGLAB_CONFIG_DIR "/pair_potential.json"), sys);
  EXPECT_TRUE(p.is_potential);
  const Point z(0.1, -0.2);
  EXPECT_EQ(p.pair.q.value(z), d_mu(sys, p.potential).q.value(z));
  EXPECT_THROW(parse_pair(Json::parse(R"({"p": null, "potential": {}})"), sys), InputError);
}

TEST(Config, ShippedConfigsParse) {
  for (const char* name : {"hyperbolic.json", "sample.json"}) {
    const Config c = parse_config(load_json(std::string(MAGLAB_CONFIG_DIR "/") + name));
    EXPECT_NO_THROW(make_system(c, surface())) << name;
    EXPECT_FALSE(config_words(c, surface()->group()).empty()) << name;
  }
}

TEST(ReadWords, CommentsAndBlankLines) {
  const auto w = read_words(temp_file("words.txt", "# header\na\n\n  ab  # trailing\nabAB aB\n"));
  ASSERT_EQ(w.size(), 4u);
  EXPECT_EQ(w[0].str(), "a");
  EXPECT_EQ(w[3].str(), "aB");
  EXPECT_THROW(read_words("/nonexistent/words.txt"), InputError);
}

TEST(Report, NumbersRoundTripAndNonFiniteIsNull) {
  OrderedJson j{{"x", 0.1}, {"nan", detail::number(NAN)}, {"inf", detail::number(INFINITY)}, {"n", 3}};
  const std::string text = to_text(j);
  EXPECT_EQ(text, "{\n  \"x\": 0.10000000000000001,\n  \"nan\": null,\n  \"inf\": null,\n  \"n\": 3\n}\n");
  EXPECT_EQ(Json::parse(text)["x"].get<double>(), 0.1);
  EXPECT_EQ(detail::format_number(NAN), "null");
  EXPECT_EQ(csv_number(NAN), "");
  EXPECT_EQ(csv_field("a,\"b\""), "\"a,\"\"b\"\"\"");
}

TEST(Report, KeyOrderIsInsertionOrder) {
  OrderedJson j;
  j["zeta"] = 1;
  j["alpha"] = 2;
  EXPECT_LT(to_text(j).find("zeta"), to_text(j).find("alpha"));
}

TEST(Report, SpectrumJsonAndCsvAgree) {
  const MagneticSystem sys(surface(), ConformalMetric(), OneFormField(), "hyperbolic");
  const Spectrum s = marked_spectrum(sys, {Word("a"), Word("ab")});
  const OrderedJson j = to_json(s);
  ASSERT_EQ(j["entries"].size(), 2u);
  EXPECT_EQ(j["system"], "hyperbolic");
  EXPECT_EQ(j["entries"][1]["word"], "ab");
  const std::string csv = to_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "word,action,length,period,el_residual,crit_dp,closure_error,speed_drift,refined,error");
  EXPECT_NE(csv.find("\nab," + detail::format_number(s.entries[1].action) + ","), std::string::npos);
  EXPECT_EQ(to_text(j), to_text(to_json(marked_spectrum(sys, {Word("a"), Word("ab")}, {}, 2))));
}

TEST(Report, MetadataRecordsSettings) {
  Config c;
  c.seed = 42;
  const OrderedJson m = metadata(c);
  EXPECT_EQ(m["version"], kVersion);
  EXPECT_EQ(m["seed"], 42);
  EXPECT_EQ(m["integrator"]["method"], "RK4");
  EXPECT_EQ(m["solver"]["M"], c.orbit.points);
}
