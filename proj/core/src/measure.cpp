#include "kreinscale/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "kreinscale/error.hpp"

namespace krein {

namespace {

constexpr int kDyads = 300;

QuadratureOptions with_lo(QuadratureOptions q, double lo) {
  q.x_lo = lo;
  return q;
}

std::vector<double> dyadic_points() {
  std::vector<double> v;
  for (int j = 0; j <= kDyads; ++j) v.push_back(std::ldexp(1.0, -j));
  return v;
}

// Sums per-panel integrals of h (plus edge jumps) into dyads (2^-j-1, 2^-j], j < kDyads.
std::vector<double> dyadic_partials(const QuadratureGrid& g, std::span<const double> h,
                                    std::span<const double> jumps) {
  std::vector<double> out(kDyads, 0.0);
  const auto e = g.edges();
  for (int p = 0; p < g.panels(); ++p) {
    const double mid = std::sqrt(e[p] * e[p + 1]);
    const int j = static_cast<int>(std::floor(-std::log2(mid)));
    if (j < 0 || j >= kDyads) continue;
    out[j] += g.panel_integral(h, p) + (jumps.empty() ? 0.0 : jumps[p + 1]);
  }
  for (double& v : out) v = std::abs(v);
  return out;
}

}  // namespace

QuadratureGrid string_grid(const StringSpec& m, double x_hi, const QuadratureOptions& q,
                           std::vector<double> extra) {
  GridOptions o;
  o.x_lo = q.x_lo;
  o.x_hi = x_hi;
  o.panels_per_decade = q.panels_per_decade;
  o.nodes_per_panel = q.nodes_per_panel;
  o.breakpoints = m.breakpoints();
  for (const auto& a : m.atoms()) o.breakpoints.push_back(a.x);
  o.breakpoints.insert(o.breakpoints.end(), extra.begin(), extra.end());
  o.breakpoints.push_back(1.0);
  return QuadratureGrid(o);
}

SampledString::SampledString(const StringSpec& spec, QuadratureGrid g) : grid(std::move(g)) {
  const auto xs = grid.x();
  m.resize(xs.size());
  dm_dt.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    m[i] = spec.value(xs[i]);
    dm_dt[i] = spec.density(grid.probe(i)) * xs[i];
  }
  const int P = grid.panels();
  const int n = grid.nodes_per_panel();
  for (const auto& a : spec.atoms()) {
    if (!(a.x > grid.x_lo() && a.x <= grid.x_hi())) continue;
    const int e = grid.edge_index(a.x);
    if (e < 0) throw Error(fmt::format("atom at {} is not a grid edge", a.x));
    if (atoms.empty()) atoms.assign(static_cast<std::size_t>(P) + 1, 0.0);
    atoms[e] += a.mass;
  }
  if (!atoms.empty()) {
    for (int p = 0; p < P; ++p) m[grid.first_node(p) + n - 1] -= atoms[p + 1];
  }
}

std::vector<double> SampledString::edge_jumps(std::span<const double> f) const {
  if (atoms.empty()) return {};
  const int P = grid.panels();
  const int n = grid.nodes_per_panel();
  std::vector<double> j(atoms.size(), 0.0);
  for (int e = 0; e <= P; ++e) {
    if (atoms[e] == 0.0) continue;
    const double fe = e < P ? f[grid.first_node(e)] : f[grid.first_node(P - 1) + n - 1];
    j[e] = atoms[e] * fe;
  }
  return j;
}

std::vector<double> SampledString::integrand(std::span<const double> f) const {
  std::vector<double> h(f.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = f[i] * dm_dt[i];
  return h;
}

double SampledString::cumulative(std::span<const double> f, std::span<double> out, double start) const {
  const auto h = integrand(f);
  const auto j = edge_jumps(f);
  return grid.cumulative(h, out, start, j);
}

double SampledString::reverse_cumulative(std::span<const double> f, std::span<double> out) const {
  const auto h = integrand(f);
  const auto j = edge_jumps(f);
  return grid.reverse_cumulative(h, out, j);
}

void SampledString::anchored_cumulative(std::span<const double> f, std::span<double> out, int anchor) const {
  const auto h = integrand(f);
  const auto j = edge_jumps(f);
  grid.anchored_cumulative(h, out, anchor, j);
}

TailEstimate SampledString::lower_tail(std::span<const double> f) const {
  std::vector<double> h(grid.size(), 0.0);
  const int n = grid.nodes_per_panel();
  for (int i = 0; i < n; ++i) h[i] = f[i] * dm_dt[i];
  return grid.lower_tail(h);
}

double refine_until_stable(const std::function<QuadEstimate(const QuadratureOptions&)>& eval,
                           const QuadratureOptions& q) {
  QuadratureOptions cur = q;
  double prev = eval(cur).value;
  for (int r = 0; r < q.max_refinements; ++r) {
    cur.panels_per_decade *= 2;
    const auto e = eval(cur);
    if (!std::isfinite(e.value)) throw ConvergenceError("quadrature produced a non-finite value");
    if (std::abs(e.value - prev) <= q.rel_tol * std::max(std::abs(e.value), e.scale)) return e.value;
    prev = e.value;
  }
  throw ConvergenceError(fmt::format("quadrature did not stabilize to relative {} after {} refinements",
                                     q.rel_tol, q.max_refinements));
}

double stieltjes_integral(const std::function<double(double)>& f, double a, double b,
                          const StringSpec& m, const QuadratureOptions& q) {
  if (!(a >= 0.0) || !(b > a)) throw ParameterError("stieltjes_integral: need 0 <= a < b");
  const auto eval = [&](const QuadratureOptions& cur) {
    const double lo = a > 0.0 ? a : cur.x_lo;
    const double hi = std::isfinite(b) ? b : std::max(1e100, lo * 1e10);
    SampledString s(m, string_grid(m, hi, with_lo(cur, lo), {a, b}));
    const auto fv = s.grid.sample(f);
    const auto h = s.integrand(fv);
    const auto jumps = s.edge_jumps(fv);
    double total = s.grid.integral(h);
    double scale = 0.0;
    {
      std::vector<double> ah(h.size());
      for (std::size_t i = 0; i < h.size(); ++i) ah[i] = std::abs(h[i]);
      scale = s.grid.integral(ah);
    }
    for (std::size_t e = 1; e < jumps.size(); ++e) {
      total += jumps[e];
      scale += std::abs(jumps[e]);
    }
    if (a == 0.0) {
      const auto t = s.grid.lower_tail(h);
      if (t.divergent) throw DivergenceError("stieltjes_integral: integrand not integrable at 0");
      total += t.value;
    }
    if (!std::isfinite(b)) {
      const auto t = s.grid.upper_tail(h);
      if (t.divergent) throw DivergenceError("stieltjes_integral: integrand not integrable at infinity");
      total += t.value;
    }
    return QuadEstimate{total, scale};
  };
  return refine_until_stable(eval, q);
}

double G_m(const StringSpec& m, double x, const QuadratureOptions& q) {
  if (!(x >= 0.0)) throw DomainError(fmt::format("G_m needs x >= 0 (got {})", x));
  if (x == 0.0) return 0.0;
  if (const auto v = m.integral(x)) return *v;
  const auto eval = [&](const QuadratureOptions& cur) {
    const QuadratureGrid g = string_grid(m, x, with_lo(cur, std::min(cur.x_lo, x * 1e-20)), {x});
    std::vector<double> h(g.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = m.value(g.x()[i]) * g.x()[i];
    const auto t = g.lower_tail(h);
    if (t.divergent) throw DivergenceError("G_m: m is not integrable at 0");
    std::vector<double> ah(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) ah[i] = std::abs(h[i]);
    return QuadEstimate{g.integral(h) + t.value, g.integral(ah)};
  };
  return refine_until_stable(eval, q);
}

GSequence compute_G_sequence(const SampledString& s, int kmax, double m_at_one) {
  const int anchor = s.grid.edge_index(1.0);
  if (anchor < 0) throw ParameterError("G sequence: grid must have an edge at x = 1");
  const std::size_t N = s.grid.size();
  GSequence out;
  out.kmax = kmax;
  out.G.assign(static_cast<std::size_t>(kmax) + 1, {});
  out.dG.assign(static_cast<std::size_t>(kmax) + 1, {});
  std::vector<double> h(N);
  const auto x = s.grid.x();
  for (int k = 1; k <= kmax; ++k) {
    std::vector<double> d(N);
    if (k == 1) {
      for (std::size_t i = 0; i < N; ++i) d[i] = s.m[i] - m_at_one;
    } else {
      s.anchored_cumulative(out.G[k - 1], d, anchor);
    }
    for (std::size_t i = 0; i < N; ++i) h[i] = d[i] * x[i];
    const auto t = s.grid.lower_tail(h);
    if (t.divergent) throw DivergenceError(fmt::format("G^{} is not finite near 0", k));
    std::vector<double> G(N);
    s.grid.cumulative(h, G, t.value);
    out.G[k] = std::move(G);
    out.dG[k] = std::move(d);
  }
  return out;
}

double G_k(const StringSpec& m, int k, double x, const QuadratureOptions& q) {
  if (k < 1) throw ParameterError("G_k: k must be >= 1");
  if (!(x >= 0.0)) throw DomainError(fmt::format("G_k needs x >= 0 (got {})", x));
  if (x == 0.0) return 0.0;
  const double m1 = m.value(1.0);
  const auto eval = [&](const QuadratureOptions& cur) {
    SampledString s(m, string_grid(m, std::max(x, 1.0), with_lo(cur, std::min(cur.x_lo, x * 1e-20)), {x}));
    const auto seq = compute_G_sequence(s, k, m1);
    double scale = 0.0;
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
      if (s.grid.x()[i] <= x) scale = std::max(scale, std::abs(seq.G[k][i]));
    }
    return QuadEstimate{s.grid.interpolate(seq.G[k], x), scale};
  };
  return refine_until_stable(eval, q);
}

DyadicVerdict classify_dyadic(std::span<const double> partials) {
  DyadicVerdict v;
  for (double p : partials) v.partial_sum += p;
  const std::size_t J = partials.size();
  if (J < 11) throw ParameterError("classify_dyadic: need at least 11 dyads");
  const double last = partials[J - 1];
  const double earlier = partials[J - 11];
  if (last == 0.0) {
    v.kind = DyadicVerdict::Kind::converges;
    return v;
  }
  if (earlier == 0.0) {
    v.kind = DyadicVerdict::Kind::indeterminate;
    v.tail_bound = std::numeric_limits<double>::infinity();
    return v;
  }
  v.ratio = std::pow(last / earlier, 0.1);
  if (v.ratio >= 1.0 - 1e-3) {
    v.kind = DyadicVerdict::Kind::diverges;
    v.tail_bound = std::numeric_limits<double>::infinity();
    return v;
  }
  v.tail_bound = last * v.ratio / (1.0 - v.ratio);
  v.kind = v.tail_bound <= 1e-10 * v.partial_sum ? DyadicVerdict::Kind::converges
                                                  : DyadicVerdict::Kind::indeterminate;
  return v;
}

SingularityIndex d_of_m(const StringSpec& m, int d_max, const QuadratureOptions& q) {
  if (d_max < 1) throw ParameterError("d_of_m: d_max must be >= 1");
  SingularityIndex out;
  if (!m.singular_at_zero()) {
    out.d = 0;
    return out;
  }
  QuadratureOptions cur = q;
  cur.x_lo = std::min(q.x_lo, std::ldexp(1.0, -kDyads - 2));
  SampledString s(m, string_grid(m, 1.0, cur, dyadic_points()));
  const auto seq = compute_G_sequence(s, d_max, m.value(1.0));
  for (int k = 1; k <= d_max; ++k) {
    std::vector<double> f(seq.G[k]);
    if (k % 2 == 1) for (double& v : f) v = -v;
    const auto h = s.integrand(f);
    const auto jumps = s.edge_jumps(f);
    const auto parts = dyadic_partials(s.grid, h, jumps);
    const auto verdict = classify_dyadic(parts);
    switch (verdict.kind) {
      case DyadicVerdict::Kind::converges:
        out.integrals.push_back(verdict.partial_sum + verdict.tail_bound);
        out.d = k;
        return out;
      case DyadicVerdict::Kind::diverges:
        out.integrals.push_back(std::numeric_limits<double>::infinity());
        break;
      case DyadicVerdict::Kind::indeterminate:
        throw IndeterminateError(
            fmt::format("d(m): dyadic partial integrals for k = {} neither converge nor diverge "
                        "(ratio {:.6f})", k, verdict.ratio),
            verdict.partial_sum, verdict.partial_sum + verdict.tail_bound);
    }
  }
  return out;
}

ConditionC check_condition_C(const StringSpec& m, const JumpMeasureSpec& j, const QuadratureOptions& q) {
  ConditionC out;
  out.infinite_near_zero = j.infinite_near_zero();
  out.tail_mass = j.tail(1.0);

  QuadratureOptions cur = q;
  cur.x_lo = std::min(q.x_lo, std::ldexp(1.0, -kDyads - 2));
  auto bps = dyadic_points();
  for (double b : j.breakpoints()) bps.push_back(b);
  const QuadratureGrid g = string_grid(m, 1.0, cur, bps);
  const auto x = g.x();
  const std::size_t N = g.size();

  std::vector<double> Gm(N);
  {
    std::vector<double> h(N);
    for (std::size_t i = 0; i < N; ++i) h[i] = m.value(x[i]) * x[i];
    const auto t = g.lower_tail(h);
    if (t.divergent) throw DivergenceError("condition C: m is not integrable at 0");
    g.cumulative(h, Gm, t.value);
  }

  const auto moment = [&](const std::function<double(std::size_t)>& f, const char* what) {
    std::vector<double> h(N);
    for (std::size_t i = 0; i < N; ++i) h[i] = f(i) * j.density(g.probe(i)) * x[i];
    const auto verdict = classify_dyadic(dyadic_partials(g, h, {}));
    switch (verdict.kind) {
      case DyadicVerdict::Kind::converges:
        return verdict.partial_sum + verdict.tail_bound;
      case DyadicVerdict::Kind::diverges:
        return std::numeric_limits<double>::infinity();
      default:
        throw IndeterminateError(fmt::format("condition C: {} is indeterminate", what),
                                 verdict.partial_sum, verdict.partial_sum + verdict.tail_bound);
    }
  };
  out.first_moment = moment([&](std::size_t i) { return x[i]; }, "first moment of j");
  out.g_moment = moment([&](std::size_t i) { return std::abs(Gm[i]); }, "integral of |G_m| dj");
  out.holds = out.infinite_near_zero && std::isfinite(out.tail_mass) && std::isfinite(out.first_moment) &&
              std::isfinite(out.g_moment);
  return out;
}

double N_of_gamma(const StringSpec& m, const JumpMeasureSpec& j, double gamma, const QuadratureOptions& q) {
  if (!(gamma > 0.0)) throw DomainError("N_of_gamma: gamma must be positive");
  const auto m_inf = m.m_infinity();
  if (!m_inf) throw DivergenceError("N_of_gamma: m(w, inf) is infinite");
  const auto eval = [&](const QuadratureOptions& cur) {
    auto bps = j.breakpoints();
    SampledString s(m, string_grid(m, gamma, with_lo(cur, std::min(cur.x_lo, gamma * 1e-30)), bps));
    const auto x = s.grid.x();
    const std::size_t N = s.grid.size();
    std::vector<double> h(N), T(N), P(N), R(N);
    for (std::size_t i = 0; i < N; ++i) h[i] = (*m_inf - s.m[i]) * x[i];
    auto t = s.grid.lower_tail(h);
    if (t.divergent) throw DivergenceError("N_of_gamma: m(w, inf) not integrable at 0");
    s.grid.cumulative(h, T, t.value);
    s.reverse_cumulative(T, P);
    for (std::size_t i = 0; i < N; ++i) h[i] = P[i] * x[i];
    t = s.grid.lower_tail(h);
    if (t.divergent) throw DivergenceError("N_of_gamma: inner integral diverges at 0");
    s.grid.cumulative(h, R, t.value);
    for (std::size_t i = 0; i < N; ++i) h[i] = R[i] * j.density(s.grid.probe(i)) * x[i];
    t = s.grid.lower_tail(h);
    if (t.divergent) throw DivergenceError("N_of_gamma: outer integral diverges at 0");
    const double v = s.grid.integral(h) + t.value;
    return QuadEstimate{v, std::abs(v)};
  };
  return refine_until_stable(eval, q);
}

FMQuantities F_M_quantities(const StringSpec& m, double gamma, double alpha,
                            const std::function<double(double)>& K, const QuadratureOptions& q) {
  if (!(gamma >= 1.0)) throw DomainError("F_M_quantities: gamma must be >= 1");
  if (!(alpha > 1.0)) throw ParameterError("F_M_quantities: alpha must exceed 1");
  FMQuantities out;
  out.F = stieltjes_integral([](double y) { return y; }, 0.0, gamma, m, q);
  out.order = static_cast<int>(std::floor(alpha)) - 1;
  const double k = K ? K(gamma) : 1.0;
  out.M = std::pow(gamma, (out.order + 1 - alpha) / alpha) * std::pow(k, out.order + 1);
  return out;
}

}  // namespace krein
