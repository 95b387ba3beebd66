#include <doctest.h>

#include <cmath>
#include <vector>

#include "kreinscale/bessel.hpp"
#include "kreinscale/error.hpp"
#include "kreinscale/measure.hpp"

using namespace krein;

TEST_CASE("drift W") {
  BesselDriftSpec d;
  d.delta = -0.8;
  CHECK(drift_W(d, 2.0) == doctest::Approx(std::pow(2.0, -1.8)).epsilon(1e-14));
  CHECK(drift_W(d, 7.0) == doctest::Approx(std::pow(7.0, -1.8)).epsilon(1e-14));
  d.s = 2.0;
  const double e2 = std::exp(2.0);
  CHECK(drift_W(d, e2) == doctest::Approx(2.0 * std::exp(-3.6)).epsilon(1e-14));
  // below x0 the perturbation is off
  CHECK(drift_W(d, 2.0) == doctest::Approx(std::pow(2.0, -1.8)).epsilon(1e-14));
  CHECK_THROWS_AS(drift_W(d, 0.0), DomainError);
  d.delta = 0.5;
  CHECK_THROWS_AS(drift_W(d, 2.0), ParameterError);
}

TEST_CASE("alpha of the induced string") {
  BesselDriftSpec d;
  d.delta = -2.0;
  CHECK(d.alpha() == 2.0);
  d.delta = -0.8;
  CHECK(d.alpha() == doctest::Approx(1.4));
  const auto b = BesselDriftSpec::from_alpha(3.5);
  CHECK(b.delta == -5.0);
  CHECK(b.alpha() == 3.5);
  CHECK_THROWS_AS(BesselDriftSpec::from_alpha(0.9), ParameterError);
}

TEST_CASE("natural scale string: unperturbed family is a power string") {
  for (double alpha : {2.0, 3.5}) {
    const auto m = natural_scale_string(BesselDriftSpec::from_alpha(alpha));
    const auto p = StringSpec::power(1.0 - 1.0 / alpha, 1.0 / (alpha - 1.0));
    for (double x : {1e-8, 1e-2, 1.0, 30.0, 1e9}) {
      CHECK(m(x) == doctest::Approx(p(x)).epsilon(1e-13));
      CHECK(m.density(x) == doctest::Approx(p.density(x)).epsilon(1e-13));
    }
    CHECK(*m.m_infinity() == 0.0);
  }
  // K is the constant w^(1/alpha) (2 alpha)^(1/alpha - 1) when uncalibrated
  BesselDriftSpec d;
  d.delta = -0.8;
  const auto K = bessel_K(d);
  const double al = 1.4;
  CHECK(K(1e6) == doctest::Approx(std::pow(2.0 * al, 1.0 / al - 1.0)).epsilon(1e-14));
  const auto m = natural_scale_string(d);
  const double x = 1e5;
  CHECK(-m(x) * (al - 1.0) * std::pow(x, 1.0 - 1.0 / al) == doctest::Approx(K(x)).epsilon(1e-12));
}

TEST_CASE("natural scale string: log-perturbed families") {
  for (double s : {0.5, 2.0}) {
    CAPTURE(s);
    const auto d = BesselDriftSpec::from_alpha(3.5, s);
    const BesselString bs(d);

    double prev = 0.0;
    for (double y = 1e-3; y < 1e40; y *= 4.3) {
      const double sy = bs.scale(y);
      CHECK(sy > prev);
      prev = sy;
      CHECK(bs.scale_inverse(sy) == doctest::Approx(y).epsilon(1e-10));
    }
    // s~' = 1/W and m' = 2 W(s~^-1)^2
    const double y = 40.0, h = 1e-5;
    CHECK((bs.scale(y * (1 + h)) - bs.scale(y * (1 - h))) / (2 * h * y) ==
          doctest::Approx(1.0 / drift_W(d, y)).epsilon(1e-8));
    const double x = bs.scale(y);
    CHECK(bs.density(x) == doctest::Approx(2.0 * std::pow(drift_W(d, y), 2)).epsilon(1e-12));

    // m(x, inf) (alpha-1) x^(1-1/alpha) / K(x) -> 1, slowly
    const auto m = natural_scale_string(d);
    const auto K = bessel_K(d);
    double dev = 1e9;
    for (int k = 2; k <= 38; k += 6) {
      const double xx = std::pow(10.0, k);
      const double r = -m(xx) * 2.5 * std::pow(xx, 1.0 - 1.0 / 3.5) / K(xx);
      CHECK(std::abs(r - 1.0) < dev);
      dev = std::abs(r - 1.0);
    }
    CHECK(dev < 0.07);
  }
}

TEST_CASE("de Bruijn step behind K") {
  // n(x) = l(x^(1/(2 alpha)))^-1 has conjugate close to (2 alpha)^(1-s) l(x)
  const double al = 3.5;
  for (double s : {0.5, 2.0}) {
    const SlowlyVarying n([=](double x) { return std::pow(std::log(x) / (2 * al), 1 - s); }, "n", std::exp(2 * al));
    for (double x : {1e8, 1e16, 1e32}) {
      const double r = de_bruijn_conjugate(n, x) / (std::pow(2 * al, 1 - s) * std::pow(std::log(x), s - 1));
      CHECK(r == doctest::Approx(1.0).epsilon(0.06));
    }
  }
}

TEST_CASE("example jump measure") {
  const double al = 3.5;
  {
    const auto j = example_jump_measure(al, 0.25, 1.0);
    // t = 1: the tail is exactly x^(-2/alpha) beyond 1
    for (double x : {1.0, 3.0, 1e10, 1e100}) CHECK(j.tail(x) == doctest::Approx(std::pow(x, -2.0 / al)).epsilon(1e-12));
    CHECK(j.density(0.01) == doctest::Approx(2.0 / al * std::pow(0.01, -1.25)).epsilon(1e-14));
    CHECK(std::isinf(j.tail(0.0)));
    CHECK(j.infinite_near_zero());
  }
  {
    const auto j = example_jump_measure(al, 0.25, 2.0);
    // high-precision quadrature of the min-form density
    CHECK(j.tail(0.5) == doctest::Approx(2.10345579689859146).epsilon(1e-12));
    CHECK(j.breakpoints().size() == 3);
    double dev = 1e9;
    for (int k = 2; k <= 38; k += 6) {
      const double x = std::pow(10.0, k);
      const double r = j.tail(x) * std::pow(x, 2.0 / al) / bessel_L(2.0)(x);
      CHECK(std::abs(r - 1.0) < dev);
      dev = std::abs(r - 1.0);
    }
    CHECK(dev < 0.03);
  }
  {
    const auto j = example_jump_measure(2.0, 0.4, 2.0);
    CHECK(bessel_L(2.0)(1e6) == doctest::Approx(std::log(1e6)));
    const double x = 1e30;
    CHECK(j.tail(x) * x / std::log(x) == doctest::Approx(1.0).epsilon(0.03));
  }
  CHECK_THROWS_AS(example_jump_measure(3.5, 0.3, 1.0), ParameterError);
  CHECK_THROWS_AS(example_jump_measure(3.5, 0.0, 1.0), ParameterError);
}

TEST_CASE("N asymptotic constant") {
  CHECK(N_asymptotic_constant(3.5, 1.0, 1.0) == doctest::Approx(3.5 / (2.5 * 1.5)).epsilon(1e-14));
  CHECK(N_asymptotic_constant(2.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
  const double e = 2.0 / 3.5 + 1.0;
  CHECK(N_asymptotic_constant(3.5, 2.0, 1.0) == doctest::Approx(3.5 / (2.5 * 1.5 * e)).epsilon(1e-14));
  CHECK_THROWS_AS(N_asymptotic_constant(4.0, 1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(N_asymptotic_constant(2.0, -1.0, 0.5), ParameterError);
  CHECK_THROWS_AS(N_asymptotic_constant(1.5, 1.0, 1.0), ParameterError);
}

TEST_CASE("N approaches its asymptote") {
  struct Case {
    double s, t;
  };
  for (const Case c : {Case{1.0, 1.0}, Case{1.0, 2.0}, Case{2.0, 1.0}}) {
    CAPTURE(c.s);
    CAPTURE(c.t);
    const auto m = natural_scale_string(BesselDriftSpec::from_alpha(3.5, c.s));
    const auto j = example_jump_measure(3.5, 0.25, c.t);
    const double C = N_asymptotic_constant(3.5, c.s, c.t), e = N_log_exponent(3.5, c.s, c.t);
    double dev = 1e9;
    for (int k = 4; k <= 8; ++k) {
      const double g = std::pow(10.0, k);
      const double r = N_of_gamma(m, j, g) / (C * std::pow(std::log(g), e));
      CHECK(std::abs(r - 1.0) < dev);
      dev = std::abs(r - 1.0);
    }
  }
}

TEST_CASE("bessel uv") {
  const auto uv = bessel_uv(3.5, 2.0, 1.5);
  const double C = N_asymptotic_constant(3.5, 2.0, 1.5);
  const double L = std::log(1e7);
  CHECK(uv.u(1e7) == doctest::Approx(std::pow(C, 0.25) * std::pow(L, 1.0 / 3.5 + 0.25)).epsilon(1e-13));
  CHECK(uv.v(1e7) == doctest::Approx(std::sqrt(C) * L).epsilon(1e-13));
  for (double r : uv.ratio) CHECK(r == doctest::Approx(1.0).epsilon(1e-12));

  const auto K = bessel_K(BesselDriftSpec::from_alpha(3.5, 2.0));
  const auto Lf = bessel_L(1.5);
  double pk = 1e9, pl = 1e9;
  for (double g : uv.grid) {
    CHECK(K(g) / uv.u(g) < pk);
    CHECK(Lf(g) / uv.v(g) < pl);
    pk = K(g) / uv.u(g);
    pl = Lf(g) / uv.v(g);
  }

  const auto two = bessel_uv(2.0, 1.0, 1.0, {0.5, 0.25});
  CHECK(two.u(1e7) == doctest::Approx(0.5 * std::sqrt(L)).epsilon(1e-13));
  CHECK(two.v(1e7) == doctest::Approx(2.0 * L).epsilon(1e-13));
  CHECK_THROWS_AS(bessel_uv(3.5, 1.0, 1.0, {1.5, {}}), ParameterError);
}

TEST_CASE("bessel family") {
  const auto fam = bessel_family({});
  double prev = 1e9;
  for (int k = 2; k <= 8; ++k) {
    const double v = fluct_exponent(fam, std::pow(10.0, k), 1.0);
    CHECK(std::abs(v + 1.0) < prev);
    prev = std::abs(v + 1.0);
  }
  const double t3 = tail_estimate(fam, 1e3), t4 = tail_estimate(fam, 1e4), t5 = tail_estimate(fam, 1e5);
  CHECK(t4 < t3);
  CHECK(t5 < t4);
}
