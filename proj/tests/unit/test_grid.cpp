#include <doctest.h>

#include <cmath>

#include "kreinscale/error.hpp"
#include "kreinscale/grid.hpp"

using namespace krein;

TEST_CASE("grid: edges respect breakpoints and panel density") {
  GridOptions o;
  o.x_lo = 1e-10;
  o.x_hi = 1e10;
  o.breakpoints = {3.0, 7.5};
  QuadratureGrid g(o);
  CHECK(g.edge_index(3.0) >= 0);
  CHECK(g.edge_index(7.5) >= 0);
  CHECK(g.panels() >= 40);
  const auto x = g.x();
  for (std::size_t i = 1; i < x.size(); ++i) CHECK(x[i] >= x[i - 1]);
}

TEST_CASE("grid: cumulative integral of a power matches closed form") {
  GridOptions o;
  o.x_lo = 1e-30;
  o.x_hi = 1e6;
  QuadratureGrid g(o);
  auto h = g.sample([](double x) { return std::pow(x, 0.5) * x; });
  std::vector<double> out(g.size());
  const double tail = g.lower_tail(h).value;
  g.cumulative(h, out, tail);
  for (double x : {1e-5, 0.3, 2.0, 1e5}) {
    CHECK(g.interpolate(out, x) == doctest::Approx(std::pow(x, 1.5) / 1.5).epsilon(1e-12));
  }
}

TEST_CASE("grid: atoms on edges give right-continuous steps") {
  QuadratureGrid g(std::vector<double>{0.5, 1.0, 2.0, 4.0}, 8);
  std::vector<double> h(g.size(), 0.0);
  std::vector<double> jumps = {0.0, 1.0, 2.0, 0.0};
  std::vector<double> out(g.size());
  const double total = g.cumulative(h, out, 0.0, jumps);
  CHECK(total == doctest::Approx(3.0));
  CHECK(g.interpolate(out, 0.9) == doctest::Approx(0.0));
  CHECK(g.interpolate(out, 1.0) == doctest::Approx(1.0));
  CHECK(g.interpolate(out, 2.0) == doctest::Approx(3.0));
  std::vector<double> rev(g.size());
  g.reverse_cumulative(h, rev, jumps);
  CHECK(g.interpolate(rev, 0.7) == doctest::Approx(3.0));
  CHECK(g.interpolate(rev, 1.0) == doctest::Approx(2.0));
  CHECK(g.interpolate(rev, 3.0) == doctest::Approx(0.0));
  std::vector<double> anc(g.size());
  g.anchored_cumulative(h, anc, 1, jumps);
  CHECK(g.interpolate(anc, 0.7) == doctest::Approx(-1.0));
  CHECK(g.interpolate(anc, 1.5) == doctest::Approx(0.0));
  CHECK(g.interpolate(anc, 2.5) == doctest::Approx(2.0));
}

TEST_CASE("grid: tail extrapolation and divergence flags") {
  GridOptions o;
  o.x_lo = 1e-20;
  o.x_hi = 1e20;
  QuadratureGrid g(o);
  auto h = g.sample([](double x) { return std::pow(x, -0.5) * x; });
  CHECK_FALSE(g.lower_tail(h).divergent);
  CHECK(g.upper_tail(h).divergent);
  auto h2 = g.sample([](double x) { return std::pow(x, -1.5) * x; });
  CHECK(g.lower_tail(h2).divergent);
  CHECK(integrate_dx([](double x) { return std::exp(-x); }, 0.0, INFINITY) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(integrate_dx([](double x) { return 1.0 / x; }, 0.0, 1.0), DivergenceError);
}

TEST_CASE("grid: refinement splits panels") {
  QuadratureGrid g(std::vector<double>{1.0, 10.0}, 12);
  CHECK(g.refined().panels() == 2);
  CHECK(g.subdivided([](double, double) { return 5; }).panels() == 5);
  CHECK_THROWS_AS(QuadratureGrid(std::vector<double>{1.0, 1.0}, 12), ParameterError);
}
