#include <doctest.h>

#include <cmath>
#include <vector>

#include "kreinscale/bessel.hpp"
#include "kreinscale/error.hpp"
#include "kreinscale/levy.hpp"
#include "kreinscale/simulate.hpp"

using namespace krein;

namespace {

JumpMeasureSpec twelve_jump() { return JumpMeasureSpec::piecewise_power(1.0, 1.25, 1.0, 2.0); }

bool within(const SampleStats& s, double target, double k = 3.0) { return std::abs(s.mean - target) <= k * s.se; }

}  // namespace

TEST_CASE("scheme names") {
  for (auto s : {T0Scheme::automatic, T0Scheme::exact, T0Scheme::euler, T0Scheme::birth_death})
    CHECK(t0_scheme_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(t0_scheme_from_string("milstein"), ParameterError);
  SimConfig c;
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.eps_jump = -1.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.replicates = 0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("replicate streams") {
  auto a = replicate_stream(7, 3), b = replicate_stream(7, 3), c = replicate_stream(7, 4), d = replicate_stream(8, 3);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

TEST_CASE("T0 exact sampler matches the Green function") {
  SimConfig cfg;
  cfg.replicates = 10000;
  cfg.seed = 11;
  for (double theta : {0.4, 0.5, 0.6}) {
    CAPTURE(theta);
    const auto m = StringSpec::power(theta, 1.0);
    const T0Sampler s(m, cfg);
    CHECK(s.scheme() == T0Scheme::exact);
    for (double x : {1.0, 4.0}) {
      CAPTURE(x);
      // int_0^x y^-theta dy
      const double green = std::pow(x, 1.0 - theta) / (1.0 - theta);
      CHECK(s.green_mean(x) == doctest::Approx(green).epsilon(1e-12));
      CHECK(within(summarize(sample_T0_batch(m, x, cfg)), green));
    }
  }
  // theta = 0.5: 2 sqrt(x)
  const auto m = StringSpec::power(0.5, 1.0);
  CHECK(T0Sampler(m, cfg).green_mean(4.0) == doctest::Approx(4.0));
  // rescaled specs use the same law
  const auto ms = m.scaled(3.0, 2.0);
  CHECK(within(summarize(sample_T0_batch(ms, 1.0, cfg)), T0Sampler(ms, cfg).green_mean(1.0)));
}

TEST_CASE("T0 Euler scheme") {
  SimConfig cfg;
  cfg.replicates = 10000;
  cfg.scheme = T0Scheme::euler;
  cfg.dt = 4e-3;
  for (double theta : {0.4, 0.5, 0.6}) {
    CAPTURE(theta);
    const auto m = StringSpec::power(theta, 1.0);
    CHECK(within(summarize(sample_T0_batch(m, 1.0, cfg)), 1.0 / (1.0 - theta)));
  }
  const auto m = StringSpec::power(0.5, 1.0);
  CHECK(within(summarize(sample_T0_batch(m, 4.0, cfg)), 4.0));

  // halving dt moves the mean by less than the statistical error
  const auto a = summarize(sample_T0_batch(m, 1.0, cfg));
  cfg.dt = 2e-3;
  const auto b = summarize(sample_T0_batch(m, 1.0, cfg));
  CHECK(std::abs(a.mean - b.mean) < 3.0 * std::hypot(a.se, b.se));

  cfg.bridge_correction = true;
  CHECK(within(summarize(sample_T0_batch(m, 1.0, cfg)), 2.0));

  // started below dt the path is absorbed at once
  cfg.bridge_correction = false;
  cfg.dt = 1e-3;
  cfg.replicates = 101;
  CHECK(summarize(sample_T0_batch(m, 1e-6, cfg)).median < 10 * cfg.dt);
  cfg.scheme = T0Scheme::exact;
  CHECK(summarize(sample_T0_batch(m, 1e-6, cfg)).median < 10 * cfg.dt);

  cfg.scheme = T0Scheme::euler;
  cfg.max_steps = 10;
  CHECK_THROWS_AS(sample_T0(m, 1.0, cfg), BudgetError);
}

TEST_CASE("T0 Euler on a log-perturbed Bessel string") {
  const auto m = natural_scale_string(BesselDriftSpec::from_alpha(2.0, 2.0));
  SimConfig cfg;
  cfg.replicates = 4000;
  cfg.dt = 2e-3;
  const T0Sampler s(m, cfg);
  CHECK(s.scheme() == T0Scheme::euler);
  for (double x : {0.5, 3.0}) {
    CAPTURE(x);
    CHECK(within(summarize(sample_T0_batch(m, x, cfg)), s.green_mean(x)));
  }
  // the unperturbed string has the exact law
  const auto m1 = natural_scale_string(BesselDriftSpec::from_alpha(3.5));
  CHECK(T0Sampler(m1, cfg).scheme() == T0Scheme::exact);
  cfg.scheme = T0Scheme::euler;
  cfg.replicates = 4000;
  CHECK(within(summarize(sample_T0_batch(m1, 2.0, cfg)), T0Sampler(m1, cfg).green_mean(2.0)));
}

TEST_CASE("T0 birth-death chain") {
  const auto m = StringSpec::tabulated({0.5, 1.0, 1.5, 2.5}, {-4.0, -3.0, -1.5, -1.0});
  SimConfig cfg;
  cfg.replicates = 20000;
  const T0Sampler s(m, cfg);
  CHECK(s.scheme() == T0Scheme::birth_death);
  // int_0^x (m(inf) - m(y)) dy
  CHECK(s.green_mean(1.0) == doctest::Approx(0.5 * 3.0 + 0.5 * 3.0).epsilon(1e-12));
  for (double x : {0.25, 1.0, 1.2, 2.5, 4.0}) {
    CAPTURE(x);
    CHECK(within(summarize(sample_T0_batch(m, x, cfg)), s.green_mean(x)));
  }
  cfg.scheme = T0Scheme::euler;
  CHECK_THROWS_AS(T0Sampler(m, cfg), SchemeUnavailableError);
  cfg.scheme = T0Scheme::birth_death;
  CHECK_THROWS_AS(T0Sampler(StringSpec::power(0.5), cfg), SchemeUnavailableError);
  cfg.scheme = T0Scheme::exact;
  CHECK_THROWS_AS(T0Sampler(m, cfg), SchemeUnavailableError);
  CHECK_THROWS_AS(T0Sampler(StringSpec::lebesgue(1.0), SimConfig{}), PreconditionError);
}

TEST_CASE("eta: compensated subordinator") {
  const auto m = StringSpec::power(0.5, 1.0);
  const auto j = twelve_jump();
  SimConfig cfg;
  cfg.eps_jump = 1e-3;
  cfg.horizon = 1e3;
  cfg.replicates = 100;

  // b_eps = int_0^eps 2 sqrt(x) x^-5/4 dx = 8 eps^(1/4)
  CHECK(small_jump_drift(m, j, 1e-3) == doctest::Approx(8.0 * std::pow(1e-3, 0.25)).epsilon(1e-9));

  const auto path = sample_eta(m, j, cfg, 3);
  CHECK(path.drift == doctest::Approx(8.0 * std::pow(1e-3, 0.25)).epsilon(1e-9));
  double prev = 0.0;
  for (std::size_t i = 0; i < path.u.size(); ++i) {
    CHECK(path.u[i] >= prev);
    CHECK(path.x[i] >= cfg.eps_jump);
    CHECK(path.T0[i] > 0.0);
    prev = path.u[i];
  }
  CHECK(path.eta(0.0) == 0.0);
  CHECK(path.eta(500.0) <= path.eta(1000.0));

  const auto ex = eta_experiment(m, j, cfg);
  CHECK(ex.b == doctest::Approx(12.0).epsilon(1e-10));
  CHECK(within(ex.stats, 12.0));
  for (double n : ex.points) CHECK(std::abs(n - ex.expected_points) < 4.0 * std::sqrt(ex.expected_points));

  // a coarser truncation has the same mean
  cfg.eps_jump = 1e-2;
  const auto coarse = eta_experiment(m, j, cfg);
  CHECK(coarse.drift > ex.drift);
  CHECK(std::abs(coarse.stats.mean - ex.stats.mean) < 3.0 * std::hypot(coarse.stats.se, ex.stats.se));
}

TEST_CASE("occupation times") {
  const auto m = StringSpec::power(0.5, 1.0);
  const auto j = twelve_jump();
  SimConfig cfg;
  cfg.horizon = 1e4;
  cfg.replicates = 100;
  cfg.eps_jump = 1e-2;

  const auto sym = occupation_experiment({m, j, m, j}, cfg);
  CHECK(sym.p == doctest::Approx(0.5));
  CHECK(within(sym.stats, 0.5));
  for (double f : sym.fraction) {
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }

  const auto third = occupation_experiment({m, j, m, j.scaled(2.0, 1.0)}, cfg);
  CHECK(third.p == doctest::Approx(1.0 / 3.0));
  CHECK(within(third.stats, 1.0 / 3.0));

  const auto none = JumpMeasureSpec::piecewise_power(0.0, 1.25, 0.0, 2.0);
  const auto r = sample_occupation({m, j, m, none}, 0.01, cfg);
  CHECK(r.A == r.t);
  CHECK(sample_occupation({m, none, m, j}, 5.0, cfg).A == 0.0);
}

TEST_CASE("fluctuation experiment") {
  const auto fam = bessel_family({});
  SimConfig cfg;
  cfg.replicates = 200;
  cfg.eps_jump = 1e-2;
  const auto tab = fluctuation_experiment(fam, 1e3, {2.0, 1.0}, cfg);
  REQUIRE(tab.t.size() == 2);
  CHECK(tab.t[0] == 1.0);
  CHECK(tab.Z.size() == 200);
  CHECK(tab.local_time[1] == doctest::Approx(2.0 * tab.local_time[0]));
  CHECK(tab.b == doctest::Approx(25.2).epsilon(1e-10));
  for (const auto& s : tab.stats) CHECK(within(s, 0.0, 4.0));
  REQUIRE(tab.var_ratio.size() == 1);
  CHECK(tab.var_ratio[0].se > 0.0);
  CHECK(tab.ks[0] > 0.0);
  CHECK(tab.ks[0] < 1.0);
  CHECK_THROWS_AS(fluctuation_experiment(fam, 1e3, {}, cfg), ParameterError);
}

TEST_CASE("results do not depend on the worker count") {
  const auto m = StringSpec::power(0.5, 1.0);
  SimConfig cfg;
  cfg.replicates = 64;
  cfg.horizon = 50.0;
  const auto a = sample_T0_batch(m, 1.0, cfg);
  cfg.workers = 4;
  const auto b = sample_T0_batch(m, 1.0, cfg);
  CHECK(a == b);
  const auto e4 = eta_experiment(m, twelve_jump(), cfg);
  cfg.workers = 1;
  const auto e1 = eta_experiment(m, twelve_jump(), cfg);
  CHECK(e1.slope == e4.slope);
  CHECK(e1.stats.mean == e4.stats.mean);
}
