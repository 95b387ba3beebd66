#include "kreinscale/levy.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "kreinscale/error.hpp"

namespace krein {

namespace {

std::vector<double> joint_breakpoints(const StringSpec& m, const JumpMeasureSpec& j) {
  std::vector<double> b = m.breakpoints();
  for (double x : j.breakpoints()) b.push_back(x);
  return b;
}

double require_m_infinity(const StringSpec& m, const char* who) {
  const auto mi = m.m_infinity();
  if (!mi) throw DivergenceError(fmt::format("{}: m(inf) is infinite, so m(y, inf) is not integrable", who));
  return *mi;
}

EigenOptions with_jump_edges(EigenOptions opt, const JumpMeasureSpec& j) {
  for (double x : j.breakpoints()) opt.breakpoints.push_back(x);
  return opt;
}

// Integral of f dj over the profile grid plus the extrapolated part near 0.
double against_jumps(const EigenProfile& p, const std::vector<double>& f, const JumpMeasureSpec& j,
                     const char* who) {
  const auto& grid = p.grid();
  const auto x = grid.x();
  std::vector<double> h(x.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = f[i] * j.density(grid.probe(i)) * x[i];
  const auto lt = grid.lower_tail(h);
  if (lt.divergent) throw DivergenceError(fmt::format("{}: integrand not j-integrable at 0 (condition C fails)", who));
  return grid.integral(h) + lt.value;
}

}  // namespace

double b_mean(const StringSpec& m, const JumpMeasureSpec& j, const QuadratureOptions& q) {
  const double mi = require_m_infinity(m, "b_mean");
  // integration by parts: int j(dx) int_0^x m(y,inf) dy = int m(y,inf) j(y,inf) dy
  return integrate_dx([&](double y) { return (mi - m.value(y)) * j.tail(y); }, 0.0, INFINITY,
                      joint_breakpoints(m, j), q.nodes_per_panel);
}

double chi(const StringSpec& m, const JumpMeasureSpec& j, double lambda, const EigenOptions& opt) {
  if (!(lambda >= 0)) throw ParameterError("chi: lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  const EigenProfile p(m, lambda, with_jump_edges(opt, j));
  double I = against_jumps(p, p.one_minus_g_nodes(), j, "chi");
  const double xf = p.x_far();
  I += j.tail(xf) * (1.0 - 0.5 * p.g_nodes().back());
  return I;
}

double compensated_chi(const StringSpec& m, const JumpMeasureSpec& j, double lambda, const EigenOptions& opt) {
  if (!(lambda >= 0)) throw ParameterError("compensated_chi: lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  const double mi = require_m_infinity(m, "compensated_chi");
  const EigenProfile p(m, lambda, with_jump_edges(opt, j));
  const auto f = p.fluctuation_nodes();
  double I = against_jumps(p, f, j, "compensated_chi");
  const double xf = p.x_far();
  const double J = j.tail(xf);
  const double G_far = p.G_m_nodes().back();
  const double beyond = integrate_dx([&](double y) { return (m.value(y) - mi) * j.tail(y); }, xf, INFINITY,
                                     joint_breakpoints(m, j), opt.quad.nodes_per_panel);
  I += J * (1.0 - 0.5 * p.g_nodes().back()) + lambda * (G_far * J + beyond);
  return I;
}

ScalingFamily::ScalingFamily(StringSpec m, JumpMeasureSpec j, double alpha, SlowlyVarying u, SlowlyVarying v)
    : m_(std::move(m)), j_(std::move(j)), alpha_(alpha), u_(std::move(u)), v_(std::move(v)) {
  if (!(alpha > 1)) throw ParameterError("scaling family: alpha must exceed 1");
}

double ScalingFamily::space_scale(double gamma) const {
  if (!(gamma > 0)) throw DomainError("scaling family: gamma must be positive");
  return std::pow(gamma, 0.5 * alpha_);
}

double ScalingFamily::string_scale(double gamma) const {
  return std::pow(gamma, 0.5 * (alpha_ - 1.0)) / u_(space_scale(gamma));
}

double ScalingFamily::jump_scale(double gamma) const { return gamma / v_(space_scale(gamma)); }

StringSpec ScalingFamily::m_gamma(double gamma) const {
  return m_.scaled(string_scale(gamma), space_scale(gamma));
}

JumpMeasureSpec ScalingFamily::j_gamma(double gamma) const {
  return j_.scaled(jump_scale(gamma), space_scale(gamma));
}

double ScalingFamily::b_gamma(double gamma, const QuadratureOptions& q) const {
  return b_mean(m_gamma(gamma), j_gamma(gamma), q);
}

double fluct_exponent(const ScalingFamily& fam, double gamma, double lambda, const EigenOptions& opt) {
  if (!(lambda >= 0)) throw ParameterError("fluct_exponent: lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  return compensated_chi(fam.m_gamma(gamma), fam.j_gamma(gamma), lambda, opt);
}

FluctReport fluct_exponent_report(const ScalingFamily& fam, double gamma, double lambda, const EigenOptions& opt) {
  FluctReport r;
  if (!(lambda > 0)) throw ParameterError("fluct_exponent_report: lambda must be > 0");
  EigenOptions o = opt;
  if (!o.d) {
    const auto idx = d_of_m(fam.m(), 12, o.quad);
    if (!idx.d) throw PreconditionError("fluct_exponent: d(m) exceeds 12");
    o.d = std::max(1, *idx.d);
  }
  r.value = fluct_exponent(fam, gamma, lambda, o);
  const double mu = lambda * fam.string_scale(gamma) / fam.space_scale(gamma);
  const double C = fam.jump_scale(gamma);
  const double base_chi = chi(fam.m(), fam.j(), mu, o);
  const double base_b = b_mean(fam.m(), fam.j(), o.quad);
  r.chi = C * base_chi;
  r.b_gamma = fam.b_gamma(gamma, o.quad);
  r.route_b = C * (base_chi - mu * base_b);
  r.kappa_hat = -r.value / (lambda * lambda);
  r.rel_gap = std::abs(r.value - r.route_b) / std::max(std::abs(r.value), 1e-300);
  return r;
}

UVPair construct_uv(const std::function<double(double)>& N, const SlowlyVarying& K, const SlowlyVarying& L,
                    double p, std::vector<double> grid) {
  if (!(p > 0 && p < 1)) throw ParameterError("construct_uv: p must lie in (0, 1)");
  if (grid.empty()) {
    for (int e = 2; e <= 12; ++e) grid.push_back(std::pow(10.0, e));
  }
  const auto S = [N, K, L](double g) { return N(g) / (K(g) * K(g) * L(g)); };
  const double x0 = std::max(K.x0(), L.x0());
  SlowlyVarying u([S, K, p](double g) { return std::pow(S(g), 0.5 * p) * K(g); },
                  fmt::format("S^{}*({})", 0.5 * p, K.describe()), x0);
  SlowlyVarying v([S, L, p](double g) { return std::pow(S(g), 1.0 - p) * L(g); },
                  fmt::format("S^{}*({})", 1.0 - p, L.describe()), x0);
  UVPair out{u, v, grid, {}};
  double prev_ku = INFINITY, prev_lv = INFINITY;
  for (double g : grid) {
    const double uu = u(g);
    const double vv = v(g);
    const double r = uu * uu * vv / N(g);
    out.ratio.push_back(r);
    if (g >= 1e6 && !(r >= 0.5 && r <= 2.0)) {
      throw VerificationError(fmt::format("construct_uv: u^2 v / N = {} at gamma = {}", r, g));
    }
    const double ku = K(g) / uu;
    const double lv = L(g) / vv;
    if (!(ku < prev_ku) || !(lv < prev_lv)) {
      throw VerificationError(
          fmt::format("construct_uv: K/u or L/v fails to decrease at gamma = {} (N/(K^2 L) not growing)", g));
    }
    prev_ku = ku;
    prev_lv = lv;
  }
  return out;
}

UVPair construct_uv(const StringSpec& m, const JumpMeasureSpec& j, double alpha, const SlowlyVarying& K,
                    const SlowlyVarying& L, double p, std::vector<double> grid) {
  if (!(alpha > 1)) throw ParameterError("construct_uv: alpha must exceed 1");
  if (grid.empty()) {
    for (int e = 2; e <= 12; ++e) grid.push_back(std::pow(10.0, e));
  }
  std::vector<double> Ns;
  for (double g : grid) Ns.push_back(N_of_gamma(m, j, g));
  const auto N = SlowlyVarying::tabulated(grid, Ns);
  return construct_uv([N](double g) { return N(g); }, K, L, p, grid);
}

double tail_estimate(const ScalingFamily& fam, double s) {
  if (!(s > 0)) throw DomainError("tail_estimate: s must be positive");
  const double a = fam.alpha();
  const SlowlyVarying u = fam.u();
  const SlowlyVarying U([u, a](double x) { return u(std::pow(x, 0.5 * a)); }, "u(s^(alpha/2))",
                        std::pow(u.x0(), 2.0 / a));
  const double Us = de_bruijn_conjugate(U, s * s);
  return 1.0 / (s * s * Us) * fam.v()(std::pow(s, a) * std::pow(Us, 0.5 * a));
}

}  // namespace krein
