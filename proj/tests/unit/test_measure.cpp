#include <doctest.h>

#include <cmath>
#include <vector>

#include "kreinscale/error.hpp"
#include "kreinscale/measure.hpp"

using namespace krein;

namespace {

// Independent nested midpoint sums on a log mesh for N(gamma) with a power string.
double brute_force_N(double theta, double gamma, const JumpMeasureSpec& j, int n) {
  const double lo = 1e-14;
  std::vector<double> e(n + 1), mid(n);
  for (int i = 0; i <= n; ++i) e[i] = lo * std::pow(gamma / lo, static_cast<double>(i) / n);
  for (int i = 0; i < n; ++i) mid[i] = std::sqrt(e[i] * e[i + 1]);
  const auto m = [&](double x) { return -std::pow(x, -theta); };
  std::vector<double> T(n), P(n), R(n);
  double acc = 0.0;  // integral of m(w,inf) = w^-theta from 0
  for (int i = 0; i < n; ++i) {
    const double before = acc;
    acc += std::pow(mid[i], -theta) * (e[i + 1] - e[i]);
    T[i] = 0.5 * (before + acc);
  }
  acc = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const double dm = m(e[i + 1]) - m(e[i]);
    P[i] = acc + 0.5 * T[i] * dm;
    acc += T[i] * dm;
  }
  acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double before = acc;
    acc += P[i] * (e[i + 1] - e[i]);
    R[i] = 0.5 * (before + acc);
  }
  double N = 0.0;
  for (int i = 0; i < n; ++i) N += R[i] * (j.tail(e[i]) - j.tail(e[i + 1]));
  return N;
}

}  // namespace

TEST_CASE("measure: eval_m examples") {
  const auto p = StringSpec::power(0.5);
  CHECK(eval_m(p, 1.0) == doctest::Approx(-1.0));
  CHECK(eval_m(p, 4.0) == doctest::Approx(-0.5));
  const auto t = StringSpec::tabulated({1.0, 2.0}, {-1.0, -0.5});
  CHECK(eval_m(t, 1.5) == doctest::Approx(-1.0));
  CHECK(eval_m(t, 2.0) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(eval_m(p, 0.0), DomainError);
  CHECK_THROWS_AS(eval_m(p, -1.0), DomainError);
  CHECK_THROWS_AS(StringSpec::power(1.2), ParameterError);
  CHECK_THROWS_AS(StringSpec::tabulated({1.0, 2.0}, {0.0, -1.0}), ParameterError);
}

TEST_CASE("measure: eval_m is monotone") {
  for (const auto& s : {StringSpec::power(0.6), StringSpec::lebesgue(2.0),
                        StringSpec::tabulated({0.5, 1.0, 3.0}, {-2.0, -1.0, -0.1})}) {
    double prev = -INFINITY;
    for (double x = 1e-3; x < 1e3; x *= 1.37) {
      const double v = eval_m(s, x);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("measure: scaled spec reconstructs a m(b x)") {
  const auto p = StringSpec::power(0.5);
  const auto s = p.scaled(3.0, 5.0);
  CHECK(s.value(2.0) == doctest::Approx(3.0 * p.value(10.0)));
  CHECK(s.density(2.0) == doctest::Approx(15.0 * p.density(10.0)));
  CHECK(*s.integral(2.0) == doctest::Approx(3.0 / 5.0 * *p.integral(10.0)));
}

TEST_CASE("measure: stieltjes_integral examples") {
  const auto p = StringSpec::power(0.5);
  CHECK(stieltjes_integral([](double y) { return y; }, 0.0, 1.0, p) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(stieltjes_integral([](double) { return 1.0; }, 1.0, 4.0, p) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(stieltjes_integral([](double) { return 0.0; }, 0.0, 1.0, p) == 0.0);
  // f = y^-0.25 against y^-1.5 dy/2 over (1, inf): 0.5/0.75
  CHECK(stieltjes_integral([](double y) { return std::pow(y, -0.25); }, 1.0, INFINITY, p) ==
        doctest::Approx(0.5 / 0.75).epsilon(1e-9));
  const auto t = StringSpec::tabulated({1.0, 2.0, 3.0}, {-1.0, -0.5, 0.0});
  CHECK(stieltjes_integral([](double y) { return y; }, 0.0, 2.5, t) == doctest::Approx(1.0));
  CHECK(stieltjes_integral([](double y) { return y; }, 2.0, 3.0, t) == doctest::Approx(1.5));
  CHECK_THROWS_AS(stieltjes_integral([](double) { return 1.0; }, 0.0, 1.0, p), DivergenceError);
}

TEST_CASE("measure: G_m examples") {
  const auto p = StringSpec::power(0.5);
  CHECK(G_m(p, 1.0) == doctest::Approx(-2.0));
  CHECK(G_m(p, 0.0) == 0.0);
  CHECK(G_m(p, 4.0) == doctest::Approx(-4.0));
  // quadrature path on an equivalent custom string
  const auto c = StringSpec::custom([](double x) { return -std::pow(x, -0.5); },
                                    [](double x) { return 0.5 * std::pow(x, -1.5); }, {0.0});
  CHECK(G_m(c, 1.0) == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(G_m(c, 4.0) == doctest::Approx(-4.0).epsilon(1e-10));
  const auto bad = StringSpec::custom([](double x) { return -1.0 / x; }, [](double x) { return 1.0 / (x * x); }, {0.0});
  CHECK_THROWS_AS(G_m(bad, 1.0), DivergenceError);
}

TEST_CASE("measure: G_k examples and closed forms") {
  const auto p = StringSpec::power(0.5);
  CHECK(G_k(p, 1, 1.0) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(G_k(p, 1, 4.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
  CHECK(G_k(p, 3, 0.0) == 0.0);
  // G^2 = (2/3) x^1.5 - x log x for theta = 1/2
  for (double x : {0.25, 1.0, 3.0}) {
    CHECK(G_k(p, 2, x) == doctest::Approx(2.0 / 3.0 * std::pow(x, 1.5) - x * std::log(x)).epsilon(1e-9));
  }
  // Lebesgue: G^1 = rho (x^2/2 - x)
  CHECK(G_k(StringSpec::lebesgue(1.0), 1, 2.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
  CHECK(G_k(StringSpec::lebesgue(1.0), 1, 0.5) == doctest::Approx(-0.375).epsilon(1e-10));
}

TEST_CASE("measure: d(m) classification") {
  CHECK(d_of_m(StringSpec::power(0.4), 6).d == 1);
  CHECK(d_of_m(StringSpec::power(0.5), 6).d == 2);
  CHECK(d_of_m(StringSpec::power(0.6), 6).d == 2);
  CHECK(d_of_m(StringSpec::power(0.75), 6).d == 4);
  CHECK(d_of_m(StringSpec::power(5.0 / 7.0), 6).d == 3);
  CHECK(d_of_m(StringSpec::lebesgue(1.0), 6).d == 0);
  CHECK_FALSE(d_of_m(StringSpec::power(0.9), 3).d.has_value());
}

TEST_CASE("measure: sign, concavity, domination and ratio vanishing of G^k") {
  for (double theta : {0.4, 0.6, 0.75}) {
    const auto m = StringSpec::power(theta);
    QuadratureOptions q;
    SampledString s(m, string_grid(m, 1.0, q));
    const auto seq = compute_G_sequence(s, 5, m.value(1.0));
    const double mass = stieltjes_integral([](double y) { return y; }, 0.0, 1.0, m);
    const int d = *d_of_m(m, 6).d;
    for (int k = 1; k <= 4; ++k) {
      const double sign = k % 2 == 0 ? 1.0 : -1.0;
      double prev_ratio = INFINITY;
      for (double x = 1e-6; x <= 1.0; x *= 3.1) {
        const double gk = sign * s.grid.interpolate(seq.G[k], x);
        const double gk1 = -sign * s.grid.interpolate(seq.G[k + 1], x);
        CHECK(gk >= 0.0);
        CHECK(gk / x <= prev_ratio * (1 + 1e-10));
        prev_ratio = gk / x;
        CHECK(gk1 <= gk * mass * (1 + 1e-9));
      }
      if (k <= d) {
        double prev = INFINITY;
        for (int r = 2; r <= 8; ++r) {
          const double x = std::pow(10.0, -r);
          const double ratio = std::abs(s.grid.interpolate(seq.G[k + 1], x) / s.grid.interpolate(seq.G[k], x));
          CHECK(ratio < prev);
          prev = ratio;
        }
      }
    }
  }
}

TEST_CASE("measure: condition C examples") {
  const auto m = StringSpec::power(0.5);
  const auto heavy = JumpMeasureSpec::piecewise_power(1.0, 1.5, 0.0, 2.0);
  const auto good = JumpMeasureSpec::piecewise_power(1.0, 1.25, 1.0, 2.0);
  const auto finite = JumpMeasureSpec::piecewise_power(1.0, 0.5, 1.0, 2.0);
  const auto c1 = check_condition_C(m, heavy);
  CHECK_FALSE(c1.holds);
  CHECK(std::isinf(c1.g_moment));
  const auto c2 = check_condition_C(m, good);
  CHECK(c2.holds);
  CHECK(c2.tail_mass == doctest::Approx(1.0));
  CHECK(c2.first_moment == doctest::Approx(4.0 / 3.0).epsilon(1e-8));
  CHECK(c2.g_moment == doctest::Approx(8.0).epsilon(1e-8));
  CHECK_FALSE(check_condition_C(m, finite).holds);
}

TEST_CASE("measure: N(gamma) against brute-force nested sums") {
  const auto m = StringSpec::power(0.5);
  const auto j = JumpMeasureSpec::piecewise_power(1.0, 1.25, 1.0, 2.0);
  const double N2 = N_of_gamma(m, j, 2.0);
  CHECK(N2 == doctest::Approx(brute_force_N(0.5, 2.0, j, 40000)).epsilon(0.01));
  CHECK(N_of_gamma(m, j, 1e-12) < 1e-6);
  CHECK(N_of_gamma(m, j, 4.0) > N2);
  CHECK_THROWS_AS(N_of_gamma(StringSpec::lebesgue(1.0), j, 2.0), DivergenceError);
}

TEST_CASE("measure: F and M quantities") {
  const auto m = StringSpec::power(0.5);
  CHECK(F_M_quantities(m, 1.0, 3.5).F == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(F_M_quantities(m, 4.0, 3.5).F == doctest::Approx(2.0).epsilon(1e-9));
  const auto fm = F_M_quantities(m, 1e4, 3.5);
  CHECK(fm.M_is_asymptotic);
  CHECK(fm.M == doctest::Approx(std::pow(1e4, -1.0 / 7.0)));
}
