#include <doctest.h>

#include <cmath>
#include <string>

#include "kreinscale/error.hpp"
#include "kreinscale/spec_io.hpp"

using namespace krein;

namespace {

// message of the SpecError thrown by fn, or "" if nothing was thrown
template <class F>
std::string spec_error(F&& fn) {
  try {
    fn();
  } catch (const SpecError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("spec parsing and typed access") {
  const auto f = SpecFile::parse(R"(# comment
[string]
family = power
theta = 0.5
c = 2

; another comment
[sim]
seed = 18446744073709551615
replicates = 40
bridge_correction = yes
scheme = euler
)",
                                 "a.ini");
  CHECK(f.sections() == std::vector<std::string>{"string", "sim"});
  CHECK(f.number("string", "theta", 0) == 0.5);
  CHECK(f.number("string", "missing", 7) == 7);
  CHECK(f.text("string", "family", "") == "power");
  CHECK(f.integer("sim", "replicates", 0) == 40);
  CHECK(f.flag("sim", "bridge_correction", false));

  const auto sim = sim_from_spec(f);
  CHECK(sim.seed == 18446744073709551615ULL);
  CHECK(sim.scheme == T0Scheme::euler);
  const auto m = string_from_spec(f);
  CHECK(m.value(4.0) == doctest::Approx(-2 * std::pow(4.0, -0.5)));
  CHECK_NOTHROW(f.check_all_used({"string", "sim"}));
}

TEST_CASE("spec errors carry file and line") {
  // no '=' on line 3
  auto msg = spec_error([] { SpecFile::parse("[string]\nfamily = power\ntheta 0.5\n", "bad.ini"); });
  CHECK(msg.rfind("bad.ini:3:", 0) == 0);

  // duplicate key
  msg = spec_error([] { SpecFile::parse("[a]\nx = 1\nx = 2\n", "dup.ini"); });
  CHECK(msg.rfind("dup.ini:3:", 0) == 0);

  msg = spec_error([] { SpecFile::parse("x = 1\n", "top.ini"); });
  CHECK(msg.rfind("top.ini:1:", 0) == 0);

  const auto f = SpecFile::parse("[string]\nfamily = power\ntheta = half\n\n[extra]\nk = 1\n", "t.ini");
  msg = spec_error([&] { string_from_spec(f); });
  CHECK(msg.rfind("t.ini:3:", 0) == 0);
  CHECK(msg.find("theta") != std::string::npos);

  const auto g = SpecFile::parse("[string]\nfamily = power\ntheta = 0.5\ntheat = 0.5\n", "u.ini");
  string_from_spec(g);
  msg = spec_error([&] { g.check_all_used({"string"}); });
  CHECK(msg.rfind("u.ini:4:", 0) == 0);
  CHECK(msg.find("theat") != std::string::npos);

  const auto h = SpecFile::parse("[string]\nfamily = power\ntheta = 0.5\n[oops]\n", "s.ini");
  string_from_spec(h);
  msg = spec_error([&] { h.check_all_used({"string"}); });
  CHECK(msg.rfind("s.ini:4:", 0) == 0);

  // out-of-range parameter is reported at the family line
  const auto p = SpecFile::parse("[string]\nfamily = power\ntheta = 1.5\n", "p.ini");
  msg = spec_error([&] { string_from_spec(p); });
  CHECK(msg.rfind("p.ini:2:", 0) == 0);

  const auto s = SpecFile::parse("[sim]\nseed = -1\n", "seed.ini");
  CHECK(spec_error([&] { sim_from_spec(s); }).rfind("seed.ini:2:", 0) == 0);
  const auto miss = SpecFile::parse("[jump]\nfamily = power\nc = 1\n", "j.ini");
  CHECK(spec_error([&] { jump_from_spec(miss); }).find("p: required") != std::string::npos);
  CHECK(spec_error([&] { string_from_spec(miss); }).find("section is missing") != std::string::npos);
  CHECK_THROWS_AS(SpecFile::load("/nonexistent/spec.ini"), SpecError);
  // SpecError is a ParameterError, so callers that map validation errors catch it
  CHECK_THROWS_AS(string_from_spec(p), ParameterError);
}

TEST_CASE("spec builders") {
  const auto f = SpecFile::parse(R"([string]
family = tabulated
x = 0.5, 1, 1.5, 2.5
m = -4, -3, -1.5, -1

[jump]
family = piecewise-power
c1 = 1
p1 = 1.5
c2 = 1
p2 = 2.5
value_scale = 2

[bessel]
alpha = 3.5
s = 2

[quad]
nodes_per_panel = 24
)");
  const auto m = string_from_spec(f);
  CHECK(m.value(1.2) == -3.0);
  const auto j = jump_from_spec(f);
  const auto j0 = JumpMeasureSpec::piecewise_power(1, 1.5, 1, 2.5);
  CHECK(j.tail(3.0) == doctest::Approx(2 * j0.tail(3.0)));
  const auto d = bessel_drift_from_spec(f);
  CHECK(d.alpha() == doctest::Approx(3.5));
  CHECK(d.s == 2.0);
  CHECK(quad_from_spec(f).nodes_per_panel == 24);
  CHECK_NOTHROW(f.check_all_used({"string", "jump", "bessel", "quad"}));

  const auto both = SpecFile::parse("[bessel]\nalpha = 3\ndelta = -4\n", "b.ini");
  CHECK(spec_error([&] { bessel_drift_from_spec(both); }).rfind("b.ini:3:", 0) == 0);

  const auto fam = family_from_spec(SpecFile::parse("[family]\nkind = bessel\nalpha = 2\na = 0.4\n"));
  CHECK(fam.alpha() == 2.0);
  const auto custom = family_from_spec(SpecFile::parse(R"([family]
kind = custom
alpha = 1.5
v_power = 0.5
[string]
family = power
theta = 0.4
[jump]
family = power
c = 1
p = 1.75
)"));
  CHECK(custom.v()(std::exp(4.0)) == doctest::Approx(2.0));
  CHECK(custom.u()(1e6) == 1.0);
}

TEST_CASE("spec canonical form, overrides and round trip") {
  auto f = SpecFile::parse("[sim]\nworkers = 4\nseed = 1\n[string]\nfamily = lebesgue\nrho = 2\n");
  auto g = SpecFile::parse("[string]\nrho   =   2\nfamily=lebesgue\n[sim]\nseed = 1\nworkers = 1\n");
  CHECK(f.canonical({"workers"}) == g.canonical({"workers"}));
  CHECK(f.canonical() != g.canonical());
  CHECK(fnv1a64(f.canonical({"workers"})) == fnv1a64(g.canonical({"workers"})));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);

  f.set("sim", "seed", "9");
  f.set("quad", "rel_tol", "1e-6");
  CHECK(f.integer("sim", "seed", 0) == 9);
  CHECK(f.has_section("quad"));
  CHECK(quad_from_spec(f).rel_tol == 1e-6);

  const auto bs = natural_scale_string(BesselDriftSpec::from_alpha(3.5));
  const std::vector<double> x{0.1, 1.0, 10.0, 100.0};
  const auto t = SpecFile::parse(tabulated_section(bs, x));
  const auto m = string_from_spec(t);
  for (double xi : x) CHECK(m.value(xi) == bs.value(xi));
}
