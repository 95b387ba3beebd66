#include "kreinscale/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kreinscale/error.hpp"

namespace krein {

namespace {

std::vector<double> merge_edges(std::vector<double> uniform_t, std::vector<double> forced_t,
                                double t_lo, double t_hi) {
  const double width = (t_hi - t_lo) / std::max<std::size_t>(1, uniform_t.size() - 1);
  std::vector<double> forced;
  for (double b : forced_t) {
    if (b > t_lo + 1e-12 * (1 + std::abs(t_lo)) && b < t_hi - 1e-12 * (1 + std::abs(t_hi))) {
      forced.push_back(b);
    }
  }
  std::sort(forced.begin(), forced.end());
  std::vector<double> all;
  all.push_back(t_lo);
  for (std::size_t i = 1; i + 1 < uniform_t.size(); ++i) {
    const double u = uniform_t[i];
    const bool close = std::any_of(forced.begin(), forced.end(),
                                   [&](double b) { return std::abs(b - u) < 0.05 * width; });
    if (!close) all.push_back(u);
  }
  all.insert(all.end(), forced.begin(), forced.end());
  all.push_back(t_hi);
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double v : all) {
    if (out.empty() || v - out.back() > 1e-12 * (1 + std::abs(v))) out.push_back(v);
  }
  return out;
}

}  // namespace

QuadratureGrid::QuadratureGrid(const GridOptions& o) : n_(o.nodes_per_panel) {
  if (!(o.x_lo > 0) || !(o.x_hi > o.x_lo) || !std::isfinite(o.x_hi)) {
    throw ParameterError("grid: need 0 < x_lo < x_hi < inf");
  }
  if (o.panels_per_decade < 1) throw ParameterError("grid: panels_per_decade must be >= 1");
  const double t_lo = std::log(o.x_lo);
  const double t_hi = std::log(o.x_hi);
  const double decades = std::log10(o.x_hi / o.x_lo);
  const int count = std::max(1, static_cast<int>(std::ceil(decades * o.panels_per_decade)));
  std::vector<double> uniform(count + 1);
  for (int i = 0; i <= count; ++i) uniform[i] = t_lo + (t_hi - t_lo) * i / count;
  std::vector<double> forced;
  for (double b : o.breakpoints) {
    if (b > 0 && std::isfinite(b)) forced.push_back(std::log(b));
  }
  const auto t_edges = merge_edges(uniform, forced, t_lo, t_hi);
  edges_.resize(t_edges.size());
  for (std::size_t i = 0; i < t_edges.size(); ++i) edges_[i] = std::exp(t_edges[i]);
  edges_.front() = o.x_lo;
  edges_.back() = o.x_hi;
  for (double b : o.breakpoints) {
    // keep forced edges bit-exact so atoms land on them
    for (double& e : edges_) {
      if (b > 0 && std::isfinite(b) && std::abs(e - b) <= 1e-11 * b) e = b;
    }
  }
  build();
}

QuadratureGrid::QuadratureGrid(std::vector<double> edges, int nodes_per_panel)
    : n_(nodes_per_panel), edges_(std::move(edges)) {
  if (edges_.size() < 2) throw ParameterError("grid: need at least one panel");
  for (std::size_t i = 0; i + 1 < edges_.size(); ++i) {
    if (!(edges_[i] > 0) || !(edges_[i + 1] > edges_[i])) {
      throw ParameterError("grid: edges must be positive and strictly increasing");
    }
  }
  build();
}

void QuadratureGrid::build() {
  if (n_ < 3 || n_ > 128) throw ParameterError("grid: nodes_per_panel must be in [3, 128]");
  const int n = n_;
  const int N = n - 1;
  const double pi = std::numbers::pi;

  ref_nodes_.resize(n);
  for (int i = 0; i < n; ++i) ref_nodes_[i] = -std::cos(pi * i / N);
  ref_nodes_.front() = -1.0;
  ref_nodes_.back() = 1.0;
  if (N % 2 == 0) ref_nodes_[N / 2] = 0.0;

  // Chebyshev coefficients from node values (DCT-I), nodes ascending.
  std::vector<double> coef(static_cast<std::size_t>(n) * n);
  for (int j = 0; j <= N; ++j) {
    for (int k = 0; k <= N; ++k) {
      double v = 2.0 / N * ((k == 0 || k == N) ? 0.5 : 1.0) * std::cos(pi * j * k / N);
      if (j == 0 || j == N) v *= 0.5;
      coef[static_cast<std::size_t>(j) * n + (N - k)] = v;
    }
  }

  cum_matrix_.assign(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> b(n + 1);
  for (int i = 0; i < n; ++i) {
    std::fill(b.begin(), b.end(), 0.0);
    for (int j = 0; j <= N; ++j) {
      const double a = coef[static_cast<std::size_t>(j) * n + i];
      if (j == 0) {
        b[1] += a;
      } else {
        b[j + 1] += a / (2.0 * (j + 1));
        if (j >= 2) b[j - 1] -= a / (2.0 * (j - 1));
      }
    }
    double at_minus_one = 0.0;
    for (int k = 0; k <= n; ++k) at_minus_one += (k % 2 == 0 ? 1.0 : -1.0) * b[k];
    for (int r = 0; r < n; ++r) {
      const double theta = pi - pi * r / N;
      double s = 0.0;
      for (int k = 0; k <= n; ++k) s += b[k] * std::cos(k * theta);
      cum_matrix_[static_cast<std::size_t>(r) * n + i] = s - at_minus_one;
    }
    cum_matrix_[static_cast<std::size_t>(0) * n + i] = 0.0;
  }
  cc_weights_.resize(n);
  for (int i = 0; i < n; ++i) cc_weights_[i] = cum_matrix_[static_cast<std::size_t>(N) * n + i];

  bary_.resize(n);
  for (int i = 0; i < n; ++i) bary_[i] = (i % 2 == 0 ? 1.0 : -1.0);
  bary_.front() *= 0.5;
  bary_.back() *= 0.5;

  const int P = panels();
  x_.resize(static_cast<std::size_t>(P) * n);
  t_.resize(x_.size());
  for (int p = 0; p < P; ++p) {
    const double ta = std::log(edges_[p]);
    const double tb = std::log(edges_[p + 1]);
    for (int i = 0; i < n; ++i) {
      const std::size_t k = first_node(p) + i;
      t_[k] = ta + 0.5 * (ref_nodes_[i] + 1.0) * (tb - ta);
      x_[k] = std::exp(t_[k]);
    }
    x_[first_node(p)] = edges_[p];
    x_[first_node(p) + N] = edges_[p + 1];
  }
}

int QuadratureGrid::panel_of(double x) const {
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  const int idx = static_cast<int>(it - edges_.begin()) - 1;
  return std::clamp(idx, 0, panels() - 1);
}

int QuadratureGrid::edge_index(double x) const {
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), x * (1 - 1e-13));
  if (it != edges_.end() && std::abs(*it - x) <= 1e-13 * std::abs(x)) {
    return static_cast<int>(it - edges_.begin());
  }
  return -1;
}

std::vector<double> QuadratureGrid::sample(const std::function<double(double)>& f) const {
  std::vector<double> out(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) out[i] = f(x_[i]);
  return out;
}

double QuadratureGrid::probe(std::size_t i) const noexcept {
  constexpr double nudge = 8.0 * std::numeric_limits<double>::epsilon();
  const std::size_t k = i % static_cast<std::size_t>(n_);
  if (k == 0) return x_[i] * (1.0 + nudge);
  if (k + 1 == static_cast<std::size_t>(n_)) return x_[i] * (1.0 - nudge);
  return x_[i];
}

double QuadratureGrid::cumulative(std::span<const double> h, std::span<double> out, double start,
                                  std::span<const double> edge_jumps, int first_panel) const {
  const int n = n_;
  const int P = panels();
  double running = start;
  for (int p = first_panel; p < P; ++p) {
    const std::size_t off = first_node(p);
    const double hw = 0.5 * (t_[off + n - 1] - t_[off]);
    const double base = running + (edge_jumps.empty() ? 0.0 : edge_jumps[p]);
    for (int r = 0; r < n; ++r) {
      const double* row = &cum_matrix_[static_cast<std::size_t>(r) * n];
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += row[i] * h[off + i];
      out[off + r] = base + hw * s;
    }
    running = out[off + n - 1];
  }
  return running + (edge_jumps.empty() ? 0.0 : edge_jumps[P]);
}

double QuadratureGrid::reverse_cumulative(std::span<const double> h, std::span<double> out,
                                          std::span<const double> edge_jumps) const {
  const int n = n_;
  const int P = panels();
  double running = edge_jumps.empty() ? 0.0 : edge_jumps[P];
  for (int p = P - 1; p >= 0; --p) {
    const std::size_t off = first_node(p);
    const double hw = 0.5 * (t_[off + n - 1] - t_[off]);
    for (int r = 0; r < n; ++r) {
      const double* row = &cum_matrix_[static_cast<std::size_t>(r) * n];
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += (cc_weights_[i] - row[i]) * h[off + i];
      out[off + r] = running + hw * s;
    }
    running = out[off] + (edge_jumps.empty() ? 0.0 : edge_jumps[p]);
  }
  return running;
}

void QuadratureGrid::anchored_cumulative(std::span<const double> h, std::span<double> out,
                                         int anchor, std::span<const double> edge_jumps) const {
  const int n = n_;
  if (anchor < 0 || anchor > panels()) throw ParameterError("grid: anchor edge out of range");
  if (anchor < panels()) {
    const double start = edge_jumps.empty() ? 0.0 : -edge_jumps[anchor];
    cumulative(h, out, start, edge_jumps, anchor);
  }
  double running = edge_jumps.empty() ? 0.0 : -edge_jumps[anchor];
  for (int p = anchor - 1; p >= 0; --p) {
    const std::size_t off = first_node(p);
    const double hw = 0.5 * (t_[off + n - 1] - t_[off]);
    for (int r = 0; r < n; ++r) {
      const double* row = &cum_matrix_[static_cast<std::size_t>(r) * n];
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += (cc_weights_[i] - row[i]) * h[off + i];
      out[off + r] = running - hw * s;
    }
    running = out[off] - (edge_jumps.empty() ? 0.0 : edge_jumps[p]);
  }
}

double QuadratureGrid::panel_integral(std::span<const double> h, int p) const {
  const std::size_t off = first_node(p);
  const double hw = 0.5 * (t_[off + n_ - 1] - t_[off]);
  double s = 0.0;
  for (int i = 0; i < n_; ++i) s += cc_weights_[i] * h[off + i];
  return hw * s;
}

double QuadratureGrid::integral(std::span<const double> h) const {
  double s = 0.0;
  for (int p = 0; p < panels(); ++p) s += panel_integral(h, p);
  return s;
}

double QuadratureGrid::interpolate(std::span<const double> values, double x) const {
  const int p = panel_of(x);
  const std::size_t off = first_node(p);
  const double ta = t_[off];
  const double tb = t_[off + n_ - 1];
  const double xi = 2.0 * (std::log(x) - ta) / (tb - ta) - 1.0;
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double d = xi - ref_nodes_[i];
    if (d == 0.0) return values[off + i];
    const double w = bary_[i] / d;
    num += w * values[off + i];
    den += w;
  }
  return num / den;
}

TailEstimate QuadratureGrid::lower_tail(std::span<const double> h) const {
  TailEstimate est;
  const double h0 = h[0];
  const double h1 = h[n_ - 1];
  if (h0 == 0.0) return est;
  if (!(h0 * h1 > 0)) {
    est.exponent = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  est.exponent = std::log(h1 / h0) / (t_[n_ - 1] - t_[0]);
  if (est.exponent <= 1e-6) {
    est.divergent = true;
    est.value = std::copysign(std::numeric_limits<double>::infinity(), h0);
  } else {
    est.value = h0 / est.exponent;
  }
  return est;
}

TailEstimate QuadratureGrid::upper_tail(std::span<const double> h) const {
  TailEstimate est;
  const std::size_t off = first_node(panels() - 1);
  const double h0 = h[off];
  const double h1 = h[off + n_ - 1];
  if (h1 == 0.0) return est;
  if (!(h0 * h1 > 0)) {
    est.exponent = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  est.exponent = std::log(h1 / h0) / (t_[off + n_ - 1] - t_[off]);
  if (est.exponent >= -1e-6) {
    est.divergent = true;
    est.value = std::copysign(std::numeric_limits<double>::infinity(), h1);
  } else {
    est.value = h1 / -est.exponent;
  }
  return est;
}

QuadratureGrid QuadratureGrid::refined() const {
  return subdivided([](double, double) { return 2; });
}

QuadratureGrid QuadratureGrid::subdivided(const std::function<int(double, double)>& pieces) const {
  std::vector<double> e;
  e.push_back(edges_.front());
  for (int p = 0; p < panels(); ++p) {
    const double ta = std::log(edges_[p]);
    const double tb = std::log(edges_[p + 1]);
    const int k = std::max(1, pieces(ta, tb));
    for (int j = 1; j < k; ++j) e.push_back(std::exp(ta + (tb - ta) * j / k));
    e.push_back(edges_[p + 1]);
  }
  return QuadratureGrid(std::move(e), n_);
}

QuadratureGrid QuadratureGrid::truncated_above(double x) const {
  std::vector<double> e;
  for (double v : edges_) {
    if (v <= x * (1 + 1e-13)) e.push_back(v);
  }
  if (e.size() < 2) throw ParameterError("grid: truncation leaves no panel");
  return QuadratureGrid(std::move(e), n_);
}

}  // namespace krein

namespace krein {

double integrate_dx(const std::function<double(double)>& f, double a, double b,
                    std::vector<double> breakpoints, int nodes_per_panel) {
  if (!(b > a) || a < 0) throw ParameterError("integrate_dx: need 0 <= a < b");
  GridOptions o;
  o.x_lo = a > 0 ? a : 1e-100;
  o.x_hi = std::isfinite(b) ? b : std::max(1e100, o.x_lo * 1e10);
  o.panels_per_decade = 2;
  o.nodes_per_panel = nodes_per_panel;
  o.breakpoints = std::move(breakpoints);
  if (o.x_hi <= o.x_lo) o.x_hi = o.x_lo * 10;
  QuadratureGrid g(o);
  std::vector<double> h(g.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = f(g.probe(i)) * g.x()[i];
  double s = g.integral(h);
  if (a == 0) {
    const auto t = g.lower_tail(h);
    if (t.divergent) throw DivergenceError("integrate_dx: integrand not integrable at 0");
    s += t.value;
  }
  if (!std::isfinite(b)) {
    const auto t = g.upper_tail(h);
    if (t.divergent) throw DivergenceError("integrate_dx: integrand not integrable at infinity");
    s += t.value;
  }
  return s;
}

}  // namespace krein
