#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "maglab/spectrum.hpp"

using namespace maglab;

namespace {

const SurfacePtr& surface() {
  static const SurfacePtr s = make_surface();
  return s;
}

const FuchsianGroup& group() { return surface()->group(); }

ScalarField bumps(std::vector<Bump> b) { return ScalarField::from_bumps(surface(), b); }

MagneticSystem free_system() { return MagneticSystem(surface(), ConformalMetric(), OneFormField(), "hyperbolic"); }

OneFormField sample_form(double scale = 1.0) {
  const auto u = bumps({{Point(0.1, -0.2), 1.0, 0.12}, {Point(-0.5, 0.4), 0.9, 0.08}});
  const auto v = bumps({{Point(-0.3, 0.1), 1.0, 0.1}, {Point(0.5, 0.5), 0.8, -0.12}});
  return OneFormField::udv({{scale, u, v}});
}

MagneticSystem sample_system() {
  const auto f = bumps({{Point(0.2, 0.1), 0.9, 0.05}, {Point(-0.4, -0.3), 0.8, -0.04}});
  return MagneticSystem(surface(), ConformalMetric(f), sample_form(), "sample");
}

ScalarField gauge_potential() { return bumps({{Point(0.3, -0.3), 1.0, 0.4}, {Point(-0.2, 0.5), 0.9, -0.3}}); }

double ell(const char* w) { return translation_length(group().matrix(Word(w))); }

}  // namespace

TEST(InitialLoop, PointsLieOnTheAxis) {
  const auto loop = initial_loop(group(), Word("a"), 64);
  const double l = ell("a");
  EXPECT_NEAR(loop.period, l, 1e-12);
  for (Point z : loop.points) EXPECT_NEAR(hyperbolic_distance(z, loop.deck(z)), l, 1e-10);
}

TEST(InitialLoop, ClosureIsOneSpacingFromLastPoint) {
  for (const char* w : {"a", "abAB", "acB"}) {
    const auto loop = initial_loop(group(), Word(w), 128);
    EXPECT_NEAR(hyperbolic_distance(loop.points.back(), loop.closure()), ell(w) / 128, 1e-10);
    EXPECT_NEAR(hyperbolic_distance(loop.points[3], loop.points[4]), ell(w) / 128, 1e-10);
  }
}

TEST(InitialLoop, Errors) {
  EXPECT_THROW(initial_loop(group(), Word("aA"), 64), InputError);
  EXPECT_THROW(initial_loop(group(), Word(""), 64), InputError);
  EXPECT_THROW(initial_loop(group(), Word("ab"), 8), InputError);
}

TEST(DiscreteAction, SeedMatchesTraceLength) {
  const auto sys = free_system();
  const double l = ell("ab");
  const double e512 = discrete_action(sys, initial_loop(group(), Word("ab"), 512)) - l;
  const double e1024 = discrete_action(sys, initial_loop(group(), Word("ab"), 1024)) - l;
  EXPECT_LT(std::abs(e512), 1e-4);
  const double ratio = e512 / e1024;
  EXPECT_GT(ratio, 3.8);
  EXPECT_LT(ratio, 4.2);
}

TEST(DiscreteAction, ExactFormChangesNothing) {
  const auto sys = sample_system();
  const auto gauged = sys.with_alpha(sys.alpha() + OneFormField::exact(gauge_potential()), "gauged");
  auto loop = initial_loop(group(), Word("abAB"), 256);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1e-3);
  for (auto& z : loop.points) z += Complex(n(rng), n(rng));
  EXPECT_NEAR(discrete_action(sys, loop), discrete_action(gauged, loop), 1e-10);
}

TEST(DiscreteAction, GradientMatchesFiniteDifferences) {
  const auto sys = sample_system();
  const auto loop = initial_loop(group(), Word("ab"), 64);
  const auto d = action_derivatives(sys, loop);
  const double h = 1e-6;
  double scale = d.gradient.cwiseAbs().maxCoeff();
  for (int k : {0, 1, 2, 3, 40, 41, 126, 127}) {
    auto lp = loop, lm = loop;
    const Complex dz = k % 2 ? Complex(0.0, h) : Complex(h, 0.0);
    lp.points[k / 2] += dz;
    lm.points[k / 2] -= dz;
    const double fd = (discrete_action(sys, lp) - discrete_action(sys, lm)) / (2.0 * h);
    EXPECT_NEAR(d.gradient[k], fd, 1e-6 * scale) << "coordinate " << k;
  }
}

TEST(DiscreteAction, HessianMatchesGradientDifferences) {
  const auto sys = sample_system();
  const auto loop = initial_loop(group(), Word("ab"), 32);
  const auto d = action_derivatives(sys, loop);
  const Eigen::MatrixXd dense(d.hessian);
  const double h = 1e-6;
  const double scale = dense.cwiseAbs().maxCoeff();
  for (int k : {0, 1, 2, 30, 62, 63}) {
    auto lp = loop, lm = loop;
    const Complex dz = k % 2 ? Complex(0.0, h) : Complex(h, 0.0);
    lp.points[k / 2] += dz;
    lm.points[k / 2] -= dz;
    const Eigen::VectorXd col = (action_derivatives(sys, lp, false).gradient - action_derivatives(sys, lm, false).gradient) / (2.0 * h);
    EXPECT_LT((dense.col(k) - col).cwiseAbs().maxCoeff(), 1e-6 * scale) << "column " << k;
  }
  EXPECT_LT((dense - dense.transpose()).cwiseAbs().maxCoeff(), 1e-12 * scale);
}

TEST(MinimizeAction, HyperbolicMinimizerStaysOnAxis) {
  const auto sys = free_system();
  MinimizeStats st;
  const auto loop = minimize_action(sys, initial_loop(group(), Word("a"), 1024), {}, &st);
  const double l = ell("a");
  EXPECT_LT(st.gradient_norm, 1e-8);
  EXPECT_NEAR(st.action, l, 1e-6);
  EXPECT_NEAR(loop.period, l, 1e-6);
  for (Point z : loop.points) EXPECT_NEAR(hyperbolic_distance(z, loop.deck(z)), l, 1e-9);
}

TEST(MinimizeAction, ConvergesForMagneticSystem) {
  const auto sys = sample_system();
  MinimizeStats st;
  const auto seed = initial_loop(group(), Word("ab"), 512);
  const auto loop = minimize_action(sys, seed, {}, &st);
  EXPECT_LT(st.gradient_norm, 1e-8);
  EXPECT_LT(st.iterations, 50);
  EXPECT_LT(discrete_action(sys, loop), discrete_action(sys, seed));
}

TEST(MinimizeAction, StagnationIsReported) {
  // A descent budget of one rejected trial cannot make progress from a far seed.
  const auto sys = sample_system();
  MinimizeOptions opts;
  opts.stagnation_limit = 1;
  auto seed = initial_loop(group(), Word("ab"), 64);
  for (auto& z : seed.points) z *= 0.2;
  EXPECT_THROW(minimize_action(sys, seed, opts), NumericalError);
}

TEST(ShootRefine, HyperbolicPeriodIsTraceLength) {
  const auto sys = free_system();
  for (const char* w : {"a", "ab", "abAB"}) {
    const auto o = solve_class(sys, Word(w));
    ASSERT_TRUE(o.refined) << o.diagnostic;
    EXPECT_NEAR(o.period, ell(w), 1e-9) << w;
    EXPECT_NEAR(o.action, ell(w), 1e-9) << w;
    EXPECT_LT(o.el_residual, 1e-6);
    EXPECT_LT(o.speed_drift, 1e-8);
    EXPECT_LT(o.closure_error, 1e-8);
    EXPECT_EQ(o.crit_dp_value, 0.0);
  }
}

TEST(ShootRefine, MagneticOrbitInvariants) {
  const auto sys = sample_system();
  const auto o = solve_class(sys, Word("ab"));
  ASSERT_TRUE(o.refined) << o.diagnostic;
  EXPECT_LT(o.el_residual, 1e-6);
  EXPECT_LT(o.speed_drift, 1e-8);
  EXPECT_LT(o.closure_error, 1e-8);
  EXPECT_NEAR(o.action, o.length - o.alpha_integral, 1e-8);
  EXPECT_NEAR(o.length, o.period, 1e-8);
  for (const auto& s : o.samples) ASSERT_NEAR(sys.metric().norm(s.state.z, s.state.v), 1.0, 1e-8);
  // The closing condition, checked directly at the ends of the dense samples.
  const PhasePoint end = o.samples.back().state;
  const PhasePoint image = push_forward(o.deck, o.initial);
  EXPECT_LT(hyperbolic_distance(end.z, image.z), 1e-8);
  EXPECT_LT(std::exp(sys.metric().sigma_value(end.z)) * (end.v - image.v).norm(), 1e-8);
}

TEST(ShootRefine, PerturbedSeedReachesSameOrbit) {
  const auto sys = sample_system();
  const auto loop = minimize_action(sys, initial_loop(group(), Word("ab")));
  const auto a = shoot_refine(sys, loop);
  auto jittered = loop;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1e-3);
  for (auto& z : jittered.points) z += Complex(n(rng), n(rng)) * std::exp(-sys.metric().sigma_value(z));
  const auto b = shoot_refine(sys, jittered);
  ASSERT_TRUE(a.refined && b.refined);
  EXPECT_NEAR(a.period, b.period, 1e-8);
  EXPECT_NEAR(a.action, b.action, 1e-8);
  // b's start lies on a's orbit: its distance to the sampled curve is within sampling error.
  double best = INFINITY;
  for (const auto& s : a.samples) best = std::min(best, hyperbolic_distance(s.state.z, b.initial.z));
  EXPECT_LT(best, a.step);
}

TEST(ShootRefine, FailureReturnsUnrefinedOrbit) {
  const auto sys = sample_system();
  ShootingOptions opts;
  opts.max_newton = 0;
  auto loop = minimize_action(sys, initial_loop(group(), Word("ab")));
  const auto o = shoot_refine(sys, loop, opts);
  EXPECT_FALSE(o.refined);
  EXPECT_FALSE(o.diagnostic.empty());
  EXPECT_THROW(crit_dp(sys, o), InputError);
}

TEST(ShootRefine, StallAtRoundoffFloor) {
  // An unreachable residual target: Newton stalls at the floating-point floor.
  const auto sys = sample_system();
  const auto loop = minimize_action(sys, initial_loop(group(), Word("ab")));
  ShootingOptions opts;
  opts.residual_tolerance = 1e-18;
  const auto accepted = shoot_refine(sys, loop, opts);
  EXPECT_TRUE(accepted.refined);
  EXPECT_NE(accepted.diagnostic.find("roundoff floor"), std::string::npos) << accepted.diagnostic;
  EXPECT_TRUE(entry_of(accepted).error.empty());
  opts.stall_tolerance = 1e-18;
  const auto rejected = shoot_refine(sys, loop, opts);
  EXPECT_FALSE(rejected.refined);
  EXPECT_FALSE(entry_of(rejected).error.empty());
}

TEST(CritDp, PositiveCurvatureQuantityFailsTheBound) {
  // Constant b = 2 on the hyperbolic plane: k = -2 + 6 b^2 = 22 along the circle.
  const auto sys = MagneticSystem::with_constant_field(ConformalMetric(), 2.0);
  const double period = 2.0 * std::numbers::pi / std::sqrt(3.0);
  const auto r = flow(sys, PhasePoint::from_angle(sys.metric(), 0.0, 0.0), period, {.h = 1e-3, .dense = true});
  ClosedOrbit o;
  o.system_uid = sys.uid();
  o.refined = true;
  o.period = period;
  o.step = period / r.steps;
  o.samples = r.samples;
  const double v = crit_dp(sys, o);
  EXPECT_NEAR(v, 22.0 * period * period, 1e-9);
  EXPECT_FALSE(crit_dp_passes(v));
  EXPECT_TRUE(crit_dp_passes(0.0));
}

TEST(Spectrum, ShortestClassesRespectSurfaceConjugacy) {
  // The Bolza surface has 12 systolic geodesics, so 24 oriented classes at the systole.
  const auto ws = shortest_classes(group(), 30);
  int at_systole = 0;
  for (const auto& w : ws)
    if (std::abs(translation_length(group().matrix(w)) - group().systole()) < 1e-9) ++at_systole;
  EXPECT_EQ(at_systole, 24);
  const auto elements = enumerate_group(group(), 9.0);
  EXPECT_TRUE(conjugate_in_group(group(), group().matrix(Word("ab")), group().matrix(Word("ba")), elements));
  EXPECT_TRUE(conjugate_in_group(group(), group().matrix(Word("ab")), group().matrix(Word("cabC")), elements));
  EXPECT_FALSE(conjugate_in_group(group(), group().matrix(Word("a")), group().matrix(Word("A")), elements));
}

TEST(Spectrum, GeodesicLimitMatchesTraceFormula) {
  const auto sys = free_system();
  const auto s = marked_spectrum(sys, shortest_classes(group(), 20));
  ASSERT_EQ(s.entries.size(), 20u);
  for (const auto& e : s.entries) {
    ASSERT_TRUE(e.refined) << e.word.str() << ": " << e.error;
    EXPECT_NEAR(e.action, translation_length(group().matrix(e.word)), 1e-6) << e.word.str();
  }
}

TEST(Spectrum, WordsAreCanonicalAndDistinct) {
  const auto s = marked_spectrum(free_system(), {Word("ba"), Word("ab"), Word("aA"), Word("Bab")});
  ASSERT_EQ(s.entries.size(), 3u);
  EXPECT_EQ(s.entries[0].word.str(), "ab");
  EXPECT_EQ(s.entries[1].word.str(), "");
  EXPECT_FALSE(s.entries[1].error.empty());
  EXPECT_EQ(s.entries[2].word.str(), "a");
  EXPECT_TRUE(s.entries[2].refined);
}

TEST(Spectrum, GaugeInvariance) {
  const auto sys = sample_system();
  const auto gauged = sys.with_alpha(sys.alpha() + OneFormField::exact(gauge_potential()), "gauged");
  const std::vector<Word> ws = {Word("a"), Word("ab"), Word("aC")};
  const auto s1 = marked_spectrum(sys, ws);
  const auto s2 = marked_spectrum(gauged, ws);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    ASSERT_TRUE(s1.entries[i].refined && s2.entries[i].refined);
    EXPECT_NEAR(s1.entries[i].action, s2.entries[i].action, 1e-8);
  }
}

TEST(Spectrum, ReversedClassWithNegatedForm) {
  const auto sys = sample_system();
  const auto neg = sys.with_alpha(sys.alpha().scaled(-1.0), "negated");
  const auto a = solve_class(sys, Word("ab"));
  const auto b = solve_class(neg, cyclic_reduce(inverse(Word("ab"))));
  ASSERT_TRUE(a.refined && b.refined);
  EXPECT_NEAR(a.action, b.action, 1e-8);
}

TEST(Spectrum, ConjugateRepresentativesAgree) {
  const auto sys = sample_system();
  const auto a = solve_class(sys, Word("ab"));
  for (const char* w : {"ba", "cabC"}) {
    const auto b = solve_class(sys, Word(w));
    ASSERT_TRUE(b.refined) << b.diagnostic;
    EXPECT_NEAR(a.action, b.action, 1e-9) << w;
    EXPECT_NEAR(a.period, b.period, 1e-9) << w;
  }
}

TEST(Spectrum, ParallelRunIsIdentical) {
  const auto sys = sample_system();
  const std::vector<Word> ws = {Word("a"), Word("b"), Word("ab")};
  const auto s1 = marked_spectrum(sys, ws, {}, 1);
  const auto s3 = marked_spectrum(sys, ws, {}, 3);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    EXPECT_EQ(s1.entries[i].word.str(), s3.entries[i].word.str());
    EXPECT_EQ(s1.entries[i].action, s3.entries[i].action);
  }
}

TEST(Spectrum, IteratedClass) {
  for (const auto& sys : {free_system(), sample_system()}) {
    const auto one = solve_class(sys, Word("a"));
    const auto two = solve_class(sys, Word("aa"));
    ASSERT_TRUE(one.refined && two.refined);
    EXPECT_LE(two.action, 2.0 * one.action + 1e-8);
    if (sys.alpha().is_zero()) {
      EXPECT_NEAR(two.action, 2.0 * one.action, 1e-8);
    }
  }
}

TEST(Spectrum, MinimizerSurvivesPerturbationProbe) {
  // Discrete loops sampled from the refined orbit, perturbed across the orbit.
  const auto sys = sample_system();
  const auto o = solve_class(sys, Word("ab"));
  ASSERT_TRUE(o.refined);
  DiscreteLoop loop;
  loop.word = o.word;
  loop.deck = o.deck;
  loop.period = o.period;
  for (std::size_t i = 0; i + 1 < o.samples.size(); ++i) loop.points.push_back(o.samples[i].state.z);
  const int m = loop.size();
  const double base = discrete_action(sys, loop);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int mode = 1 + trial % 4;
    const double ca = u(rng), sa = u(rng);
    DiscreteLoop p = loop;
    for (int i = 0; i < m; ++i) {
      const double s = 2.0 * std::numbers::pi * mode * i / m;
      const Point n = to_complex(rotate_quarter(o.samples[i].state.v));
      p.points[i] += 1e-3 * (ca * std::cos(s) + sa * std::sin(s) - ca) * n;
    }
    EXPECT_GT(discrete_action(sys, p), base - 1e-8) << "trial " << trial;
  }
}
