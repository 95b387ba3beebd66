#include "kreinscale/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "kreinscale/error.hpp"
#include "kreinscale/grid.hpp"

namespace krein {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "?";
}

namespace {

Verdict combine(const std::vector<Verdict>& vs) {
  bool indet = false;
  for (auto v : vs) {
    if (v == Verdict::fail) return Verdict::fail;
    if (v == Verdict::indeterminate) indet = true;
  }
  return indet ? Verdict::indeterminate : Verdict::pass;
}

SweepSection finish(std::string name, std::vector<Functional> fs) {
  SweepSection s;
  s.name = std::move(name);
  std::vector<Verdict> vs;
  for (const auto& f : fs) vs.push_back(f.verdict);
  s.verdict = combine(vs);
  s.functionals = std::move(fs);
  return s;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void check_grid(const std::vector<double>& g) {
  if (g.empty()) throw ParameterError("verify: empty gamma grid");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > 1.0)) throw ParameterError(fmt::format("verify: gamma must exceed 1 (got {})", g[i]));
    if (i > 0 && !(g[i] > g[i - 1])) throw ParameterError("verify: gamma grid must be strictly ascending");
  }
}

// value at the requested resolution and at twice the panel density; the difference is the error
template <class Eval>
std::pair<double, double> two_level(const Eval& eval, const QuadratureOptions& q) {
  QuadratureOptions fine = q;
  fine.panels_per_decade *= 2;
  const double a = eval(q), b = eval(fine);
  return {b, std::abs(a - b)};
}

template <class Eval>
std::pair<double, double> two_order(const Eval& eval) {
  const double a = eval(20), b = eval(32);
  return {b, std::abs(a - b)};
}

Verdict apply(const Functional& f, bool rule_ok) {
  if (!resolved(f)) return Verdict::indeterminate;
  return rule_ok ? Verdict::pass : Verdict::fail;
}

Verdict trend_verdict(const std::vector<double>& gamma, const Functional& f, const std::vector<double>& v) {
  if (gamma.size() < 5) return Verdict::indeterminate;
  return apply(f, trend_down(gamma, v));
}

std::vector<double> below_one(std::vector<double> b) {
  std::erase_if(b, [](double x) { return !(x > 0.0 && x < 1.0); });
  return b;
}

}  // namespace

Verdict SweepReport::verdict() const {
  std::vector<Verdict> vs;
  for (const auto& s : sections) vs.push_back(s.verdict);
  return combine(vs);
}

std::vector<double> default_gamma_grid() {
  std::vector<double> g;
  for (int i = 0; i < 6; ++i) g.push_back(std::pow(10.0, 2.0 + 6.0 * i / 5.0));
  return g;
}

bool trend_down(const std::vector<double>& gamma, const std::vector<double>& value) {
  if (gamma.size() < 5 || gamma.size() != value.size()) return false;
  // the drop has to clear rounding
  if (!(std::abs(value.back()) < (1.0 - 1e-9) * std::abs(value.front()))) return false;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (value[i] == 0.0) continue;
    lx.push_back(std::log(gamma[i]));
    ly.push_back(std::log(std::abs(value[i])));
  }
  // exact zeros at the end count as vanishing
  if (lx.size() < 2) return value.back() == 0.0;
  return slope(lx, ly) < 0.0;
}

double log_growth(const std::vector<double>& gamma, const std::vector<double>& value) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    lx.push_back(std::log(std::log(gamma[i])));
    ly.push_back(std::log(std::abs(value[i])));
  }
  return slope(lx, ly);
}

bool resolved(const Functional& f, double rel) {
  for (std::size_t i = 0; i < f.value.size(); ++i) {
    const double e = i < f.error.size() ? f.error[i] : 0.0;
    if (!std::isfinite(f.value[i]) || !(e <= rel * std::abs(f.value[i]))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

SweepSection check_G_convergence(const ScalingFamily& fam, int d, const std::vector<double>& gamma_grid,
                                 const VerifyOptions& opt) {
  check_grid(gamma_grid);
  if (d < 1) throw ParameterError("G convergence: d must be >= 1");
  // d(m_gamma) = d(m): the rescaling does not change the exponents at 0
  const auto dm = d_of_m(fam.m(), d, opt.quad);
  if (!dm.d) throw PreconditionError(fmt::format("G convergence: d = {} is below d(m)", d));

  Functional f;
  f.name = fmt::format("(-1)^{} int_0^1 G^{} dm_gamma", d, d);
  for (double g : gamma_grid) {
    const auto m = fam.m_gamma(g);
    const auto [v, e] = two_level(
        [&](const QuadratureOptions& q) {
          SampledString s(m, string_grid(m, 1.0, q));
          const auto seq = compute_G_sequence(s, d, m.value(1.0));
          std::vector<double> h(seq.G[static_cast<std::size_t>(d)]);
          if (d % 2 == 1) for (double& x : h) x = -x;
          std::vector<double> out(h.size());
          const double total = s.cumulative(h, out);
          const auto t = s.lower_tail(h);
          if (t.divergent) throw PreconditionError("G convergence: integral diverges at 0");
          return total + t.value;
        },
        opt.quad);
    f.value.push_back(v);
    f.error.push_back(e);
  }
  const bool strong = std::abs(f.value.back()) < 0.1 * std::abs(f.value.front());
  f.rule = fmt::format("trend down; last/first = {:.4g}{}", f.value.back() / f.value.front(),
                       strong ? " (< 0.1)" : " (not below 0.1)");
  f.verdict = trend_verdict(gamma_grid, f, f.value);
  return finish("G-convergence", {f});
}

SweepSection check_kappa_delta(const ScalingFamily& fam, const std::vector<double>& gamma_grid,
                               const std::vector<TestFunction>& test_functions, const VerifyOptions& opt) {
  check_grid(gamma_grid);
  std::vector<TestFunction> tf = test_functions;
  if (tf.empty()) {
    tf.push_back({"1", [](double) { return 1.0; }});
    tf.push_back({"x", [](double x) { return x; }});
  }
  std::vector<Functional> fs(tf.size());
  for (std::size_t k = 0; k < tf.size(); ++k) fs[k].name = fmt::format("int_0^1 f G^2 dj_gamma, f = {}", tf[k].name);

  for (double g : gamma_grid) {
    const auto m = fam.m_gamma(g);
    const auto j = fam.j_gamma(g);
    for (std::size_t k = 0; k < tf.size(); ++k) {
      const auto [v, e] = two_level(
          [&](const QuadratureOptions& q) {
            SampledString s(m, string_grid(m, 1.0, q, below_one(j.breakpoints())));
            const auto seq = compute_G_sequence(s, 2, m.value(1.0));
            const auto x = s.grid.x();
            std::vector<double> h(x.size());
            for (std::size_t i = 0; i < h.size(); ++i) {
              const double xi = s.grid.probe(i);
              h[i] = tf[k].f(x[i]) * seq.G[2][i] * j.density(xi) * x[i];
            }
            const auto t = s.grid.lower_tail(h);
            if (t.divergent) throw DivergenceError("kappa delta: integral diverges at 0");
            return s.grid.integral(h) + t.value;
          },
          opt.quad);
      fs[k].value.push_back(v);
      fs[k].error.push_back(e);
    }
  }
  for (std::size_t k = 0; k < tf.size(); ++k) {
    auto& f = fs[k];
    const double f0 = tf[k].f(0.0);
    if (f0 == 0.0) {
      f.rule = "f(0) = 0: trend down to 0";
      f.verdict = trend_verdict(gamma_grid, f, f.value);
      continue;
    }
    // target kappa f(0) with kappa = 1
    std::vector<double> dev;
    for (double v : f.value) dev.push_back(v - f0);
    if (f0 == 1.0) {
      for (double g : gamma_grid) {
        const double gs = fam.space_scale(g);
        const double uu = fam.u()(gs);
        f.reference.push_back(N_of_gamma(fam.m(), fam.j(), gs, opt.quad) / (uu * uu * fam.v()(gs)));
      }
    }
    f.rule = fmt::format("f(0) = {}: |value - f(0)| trends down", f0);
    f.verdict = trend_verdict(gamma_grid, f, dev);
  }
  return finish("kappa-delta", std::move(fs));
}

SweepSection check_minor_conditions(const ScalingFamily& fam, const std::vector<double>& gamma_grid,
                                    const VerifyOptions& opt) {
  check_grid(gamma_grid);
  Functional moment, tail, cross;
  moment.name = "int_0^1 x dj_gamma";
  tail.name = "j_gamma(1, inf)";
  cross.name = "int_1^inf |G_m_gamma| dj_gamma";
  const auto m_inf = fam.m().m_infinity();
  if (!m_inf) throw PreconditionError("minor conditions: m(inf) is infinite");
  const double al = fam.alpha();
  for (double g : gamma_grid) {
    const auto m = fam.m_gamma(g);
    const auto j = fam.j_gamma(g);
    const double mi = *m.m_infinity();
    auto bj = j.breakpoints();
    {
      const auto [v, e] = two_order([&](int n) {
        return integrate_dx([&](double x) { return x * j.density(x); }, 0.0, 1.0, below_one(bj), n);
      });
      moment.value.push_back(v);
      moment.error.push_back(e);
    }
    tail.value.push_back(j.tail(1.0));
    tail.error.push_back(0.0);
    {
      // Fubini: int_1^inf j(dx) int_0^x m(y,inf) dy = int_0^inf m(y,inf) j(max(1,y), inf) dy
      auto bps = m.breakpoints();
      bps.insert(bps.end(), bj.begin(), bj.end());
      bps.push_back(1.0);
      const auto [v, e] = two_order([&](int n) {
        return integrate_dx([&](double y) { return (mi - m.value(y)) * j.tail(std::max(1.0, y)); }, 0.0, INFINITY,
                            bps, n);
      });
      cross.value.push_back(v);
      cross.error.push_back(e);
      const double gs = fam.space_scale(g);
      cross.reference.push_back(2.0 * al * fam.string_scale(g) * (*m_inf - fam.m().value(gs)) * fam.jump_scale(g) *
                                fam.j().tail(gs));
    }
  }
  const double hi = *std::max_element(moment.value.begin(), moment.value.end());
  const double lo = *std::min_element(moment.value.begin(), moment.value.end());
  moment.rule = fmt::format("bounded: max/min = {:.4g} < 10", hi / lo);
  moment.verdict = apply(moment, lo > 0 && hi / lo < 10.0);
  tail.rule = "trend down to 0";
  tail.verdict = trend_verdict(gamma_grid, tail, tail.value);
  cross.rule = "trend down to 0";
  cross.verdict = trend_verdict(gamma_grid, cross, cross.value);
  return finish("minor-conditions", {moment, tail, cross});
}

SweepSection check_integer_alpha(const ScalingFamily& fam, int d, const std::vector<double>& gamma_grid,
                                 const SlowlyVarying& K, const SlowlyVarying& L, const VerifyOptions& opt) {
  check_grid(gamma_grid);
  const double al = fam.alpha();
  if (al != std::floor(al)) throw ParameterError(fmt::format("integer-alpha checks need an integer alpha (got {})", al));
  if (d < 1) throw ParameterError("integer-alpha checks: d must be >= 1");
  Functional iv, v5;
  iv.name = fmt::format("K^{} int_1^gamma K^alpha/x dx / u^{}", d - al + 1, d + 1);
  v5.name = "v^-1 int_1^gamma L/x dx";
  for (double g : gamma_grid) {
    {
      const auto [I, e] = two_order([&](int n) {
        return integrate_dx([&](double x) { return std::pow(K(x), al) / x; }, 1.0, g, {}, n);
      });
      const double pre = std::pow(K(g), d - al + 1) / std::pow(fam.u()(g), d + 1);
      iv.value.push_back(pre * I);
      iv.error.push_back(pre * e);
    }
    if (al == 2.0) {
      const auto [I, e] = two_order([&](int n) { return integrate_dx([&](double x) { return L(x) / x; }, 1.0, g, {}, n); });
      v5.value.push_back(I / fam.v()(g));
      v5.error.push_back(e / fam.v()(g));
    }
  }
  iv.rule = "trend down to 0";
  iv.verdict = trend_verdict(gamma_grid, iv, iv.value);
  std::vector<Functional> fs{iv};
  if (al == 2.0) {
    const double p = log_growth(gamma_grid, v5.value);
    v5.rule = fmt::format("bounded: growth like (log gamma)^{:.3g}, below (log gamma)^{}", p, opt.bounded_log_power);
    v5.verdict = gamma_grid.size() < 3 ? Verdict::indeterminate : apply(v5, p < opt.bounded_log_power);
    fs.push_back(v5);
  }
  return finish("integer-alpha", std::move(fs));
}

SweepSection laplace_limit_report(const ScalingFamily& fam, const std::vector<double>& lambda_grid,
                                  const std::vector<double>& gamma_grid, SweepReport* table,
                                  const VerifyOptions& opt) {
  check_grid(gamma_grid);
  if (lambda_grid.empty()) throw ParameterError("laplace limit: empty lambda grid");
  std::vector<Functional> fs(lambda_grid.size());
  std::vector<std::vector<double>> kh(gamma_grid.size(), std::vector<double>(lambda_grid.size()));
  for (std::size_t l = 0; l < lambda_grid.size(); ++l) fs[l].name = fmt::format("kappa_hat(lambda = {})", lambda_grid[l]);
  for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
    for (std::size_t l = 0; l < lambda_grid.size(); ++l) {
      const auto r = fluct_exponent_report(fam, gamma_grid[i], lambda_grid[l], opt.eigen);
      kh[i][l] = r.kappa_hat;
      fs[l].value.push_back(r.kappa_hat);
      fs[l].error.push_back(r.rel_gap * std::abs(r.kappa_hat));
    }
  }
  Functional spread;
  spread.name = "max - min of kappa_hat over lambda";
  for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
    const auto [lo, hi] = std::minmax_element(kh[i].begin(), kh[i].end());
    spread.value.push_back(*hi - *lo);
    double e = 0.0;
    for (const auto& f : fs) e = std::max(e, f.error[i]);
    spread.error.push_back(2.0 * e);
  }
  for (auto& f : fs) {
    std::vector<double> dev;
    for (double v : f.value) dev.push_back(v - 1.0);
    f.rule = "|kappa_hat - 1| trends down";
    f.verdict = trend_verdict(gamma_grid, f, dev);
  }
  spread.rule = "trend down";
  if (lambda_grid.size() > 1) {
    spread.verdict = trend_verdict(gamma_grid, spread, spread.value);
    fs.push_back(spread);
  }
  if (table) {
    table->lambda = lambda_grid;
    table->kappa_hat = kh;
  }
  return finish("laplace-limit", std::move(fs));
}

SweepReport run_sweep(const ScalingFamily& fam, const SweepRequest& req, const VerifyOptions& opt) {
  check_grid(req.gamma);
  SweepReport rep;
  rep.gamma = req.gamma;
  if (req.G_convergence) rep.sections.push_back(check_G_convergence(fam, req.d, req.gamma, opt));
  if (req.kappa_delta) rep.sections.push_back(check_kappa_delta(fam, req.gamma, {}, opt));
  if (req.minor) rep.sections.push_back(check_minor_conditions(fam, req.gamma, opt));
  if (req.K && req.L && fam.alpha() == std::floor(fam.alpha()))
    rep.sections.push_back(check_integer_alpha(fam, req.d, req.gamma, *req.K, *req.L, opt));
  if (req.laplace) rep.sections.push_back(laplace_limit_report(fam, req.lambda, req.gamma, &rep, opt));
  return rep;
}

}  // namespace krein
