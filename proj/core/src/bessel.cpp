#include "kreinscale/bessel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <limits>

#include "kreinscale/error.hpp"

namespace krein {

namespace {

using GL = boost::math::quadrature::gauss<double, 20>;

// Cumulative integrals of a smooth f(u) over consecutive panels.
struct PanelTable {
  std::function<double(double)> f;
  std::vector<double> edge;
  std::vector<double> cum;  // integral from edge[0] to edge[i]
  std::vector<double> rev;  // integral from edge[i] to edge.back()

  PanelTable(std::function<double(double)> fn, std::vector<double> edges) : f(std::move(fn)), edge(std::move(edges)) {
    const std::size_t n = edge.size();
    std::vector<double> piece(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) piece[i] = piece_integral(edge[i], edge[i + 1]);
    cum.assign(n, 0.0);
    rev.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) cum[i] = cum[i - 1] + piece[i - 1];
    for (std::size_t i = n - 1; i-- > 0;) rev[i] = rev[i + 1] + piece[i];
  }

  double piece_integral(double a, double b) const { return a == b ? 0.0 : GL::integrate(f, a, b); }

  // last i with edge[i] <= u
  std::size_t panel(double u) const {
    auto it = std::upper_bound(edge.begin(), edge.end(), u);
    const std::size_t k = it == edge.begin() ? 0 : static_cast<std::size_t>(it - edge.begin()) - 1;
    return std::min(k, edge.size() - 2);
  }
  double from_start(double u) const {
    const std::size_t k = panel(u);
    return cum[k] + piece_integral(edge[k], u);
  }
  double to_end(double u) const {
    const std::size_t k = panel(u);
    return rev[k + 1] + piece_integral(u, edge[k + 1]);
  }
};

std::vector<double> uniform_edges(double a, double b, double h) {
  const int n = std::max(1, static_cast<int>(std::ceil((b - a) / h)));
  std::vector<double> e(n + 1);
  for (int i = 0; i <= n; ++i) e[i] = a + (b - a) * i / n;
  return e;
}

constexpr double kLogHuge = 645.0;  // log(1e280)

}  // namespace

// ---------------------------------------------------------------------------
// drift

double BesselDriftSpec::w() const { return w_scale * std::exp(eta_bar); }

void BesselDriftSpec::validate() const {
  if (!(delta < 0) || !std::isfinite(delta)) throw ParameterError(fmt::format("bessel drift: need delta < 0 (got {})", delta));
  if (!std::isfinite(s)) throw ParameterError("bessel drift: s must be finite");
  if (!(x0 > 1) || !std::isfinite(x0)) throw ParameterError(fmt::format("bessel drift: need x0 > 1 (got {})", x0));
  if (!(w_scale > 0) || !std::isfinite(w_scale) || !std::isfinite(eta_bar)) {
    throw ParameterError("bessel drift: w_scale must be positive and eta_bar finite");
  }
}

double BesselDriftSpec::calibrated_w_scale(double alpha, double s, double x0) {
  return std::pow(2.0 * alpha, alpha - 1.0) * std::pow(2.0 * alpha * std::log(x0), s - 1.0);
}

BesselDriftSpec BesselDriftSpec::from_alpha(double alpha, double s, double x0) {
  if (!(alpha > 1) || !std::isfinite(alpha)) throw ParameterError(fmt::format("bessel drift: need alpha > 1 (got {})", alpha));
  BesselDriftSpec d;
  d.delta = 2.0 - 2.0 * alpha;
  d.s = s;
  d.x0 = x0;
  d.w_scale = calibrated_w_scale(alpha, s, x0);
  d.validate();
  return d;
}

double drift_W(const BesselDriftSpec& spec, double x) {
  spec.validate();
  if (!(x > 0)) throw DomainError(fmt::format("drift_W: x must be positive (got {})", x));
  double v = spec.w() * std::pow(x, spec.delta - 1.0);
  if (x > spec.x0 && spec.s != 1.0) v *= std::pow(std::log(x) / std::log(spec.x0), spec.s - 1.0);
  return v;
}

// ---------------------------------------------------------------------------
// induced string

struct BesselString::Table {
  double scale_x0 = 0.0;  // s~(x0)
  double tail_x0 = 0.0;   // T(x0)
  double u_max = 0.0;
  PanelTable scale;       // integrand of s~ in u = log y
  PanelTable tail;        // integrand of T in u
};

BesselString::BesselString(BesselDriftSpec spec) : spec_(spec) {
  spec_.validate();
  if (spec_.s == 1.0) return;
  const double d = spec_.delta, w = spec_.w(), s = spec_.s;
  const double L0 = std::log(spec_.x0);
  const double h = std::min(0.5, 1.0 / (2.0 - d));
  auto f_scale = [=](double u) { return std::exp((2.0 - d) * u) * std::pow(u / L0, 1.0 - s) / w; };
  auto f_tail = [=](double u) { return 2.0 * w * std::exp(d * u) * std::pow(u / L0, s - 1.0); };
  const double u_max = kLogHuge / (2.0 - d);
  // T must resolve values down to e^-45 of its local size beyond u_max
  const double u_tail = u_max + 45.0 / (-d) + std::max(0.0, s - 1.0) * 2.0;
  PanelTable tail(f_tail, uniform_edges(L0, u_tail, std::min(0.5, 1.0 / (-d))));
  const double tail_x0 = tail.rev.front();
  table_ = std::make_shared<Table>(Table{std::pow(spec_.x0, 2.0 - d) / (w * (2.0 - d)), tail_x0, u_max,
                                         PanelTable(f_scale, uniform_edges(L0, u_max, h)), std::move(tail)});
}

double BesselString::scale(double y) const {
  if (!(y > 0)) throw DomainError("bessel string: y must be positive");
  const double d = spec_.delta;
  if (!table_ || y <= spec_.x0) return std::pow(y, 2.0 - d) / (spec_.w() * (2.0 - d));
  const double u = std::log(y);
  if (u > table_->u_max) throw DomainError(fmt::format("bessel string: y = {} beyond the tabulated range", y));
  return table_->scale_x0 + table_->scale.from_start(u);
}

double BesselString::scale_inverse(double x) const {
  if (!(x > 0)) throw DomainError("bessel string: x must be positive");
  const double d = spec_.delta;
  if (!table_ || x <= table_->scale_x0) return std::pow(spec_.w() * (2.0 - d) * x, 1.0 / (2.0 - d));
  const auto& T = table_->scale;
  const double r = x - table_->scale_x0;
  if (r > T.cum.back()) throw DomainError(fmt::format("bessel string: x = {} beyond the tabulated range", x));
  const std::size_t k = std::min<std::size_t>(std::upper_bound(T.cum.begin(), T.cum.end(), r) - T.cum.begin(),
                                              T.cum.size() - 1) - 1;
  const double target = r - T.cum[k];
  double lo = T.edge[k], hi = T.edge[k + 1];
  double u = hi;
  for (int it = 0; it < 100; ++it) {
    const double F = T.piece_integral(T.edge[k], u) - target;
    if (std::abs(F) <= 1e-15 * r) return std::exp(u);
    if (F > 0) hi = u; else lo = u;
    double next = u - F / T.f(u);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-16 * std::abs(u)) return std::exp(next);
    u = next;
  }
  throw ConvergenceError(fmt::format("bessel string: inversion of the scale function failed at x = {}", x));
}

double BesselString::upper_tail(double y) const {
  const double d = spec_.delta, w = spec_.w();
  if (!table_) return 2.0 * w * std::pow(y, d) / (-d);
  if (y <= spec_.x0) return table_->tail_x0 + 2.0 * w * (std::pow(y, d) - std::pow(spec_.x0, d)) / (-d);
  const double u = std::log(y);
  if (u >= table_->tail.edge.back()) return 0.0;
  return table_->tail.to_end(u);
}

double BesselString::value(double x) const { return -upper_tail(scale_inverse(x)); }

double BesselString::density(double x) const {
  const double W = drift_W(spec_, scale_inverse(x));
  return 2.0 * W * W;
}

std::vector<double> BesselString::breakpoints() const {
  if (!table_) return {};
  return {table_->scale_x0};
}

std::string BesselString::describe() const {
  return fmt::format("bessel-natural-scale(delta={}, s={}, x0={}, w={})", spec_.delta, spec_.s, spec_.x0, spec_.w());
}

StringSpec natural_scale_string(const BesselDriftSpec& spec) {
  return StringSpec(std::make_shared<BesselString>(spec));
}

SlowlyVarying bessel_K(const BesselDriftSpec& spec) {
  spec.validate();
  const double al = spec.alpha();
  const double c = std::pow(spec.w(), 1.0 / al) * std::pow(2.0 * al, 1.0 / al - 1.0);
  const double e = (spec.s - 1.0) / al;
  const double L0 = 2.0 * al * std::log(spec.x0);
  return SlowlyVarying([c, e, L0](double x) { return c * std::pow(std::log(x) / L0, e); },
                       fmt::format("{}*(log x/{})^{}", c, L0, e), std::exp(L0));
}

// ---------------------------------------------------------------------------
// jump measure

struct BesselJump::Table {
  PanelTable tail;  // integrand of j(e^u, inf) in u >= 0
};

BesselJump::BesselJump(double alpha, double a, double t) : alpha_(alpha), a_(a), t_(t) {
  if (!(alpha > 1) || !std::isfinite(alpha)) throw ParameterError(fmt::format("bessel jump: need alpha > 1 (got {})", alpha));
  if (!(a > 0 && a < 1.0 / alpha)) throw ParameterError(fmt::format("bessel jump: need a in (0, 1/alpha) (got {})", a));
  if (!std::isfinite(t)) throw ParameterError("bessel jump: t must be finite");
  const double b = 2.0 / alpha;
  // h > 0 where the log branch is the smaller one
  auto h = [=](double u) { return (b - a) * u - (t - 1.0) * std::log(u); };
  auto root = [&](double lo, double hi) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((h(mid) > 0) == (h(lo) > 0)) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  std::vector<double> cross;
  if (t < 1.0) {
    double hi = 1.0;
    while (h(hi) <= 0) hi *= 2.0;
    cross.push_back(root(std::numeric_limits<double>::min(), hi));
  } else if (t > 1.0) {
    const double us = (t - 1.0) / (b - a);
    if (h(us) < 0) {
      double hi = 2.0 * us;
      while (h(hi) <= 0) hi *= 2.0;
      cross.push_back(root(std::numeric_limits<double>::min(), us));
      cross.push_back(root(us, hi));
    }
  }
  std::vector<double> edges;
  const double u_end = std::max(720.0, 60.0 / b);
  if (t > 1.0) {
    // (log x)^(t-1) is not smooth at x = 1: grade the panels towards u = 0
    edges.push_back(0.0);
    for (int k = 60; k >= 1; --k) edges.push_back(std::ldexp(0.5, -k));
  }
  for (double e : uniform_edges(t > 1.0 ? 0.5 : 0.0, u_end, 0.5)) edges.push_back(e);
  for (double c : cross) edges.push_back(c);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (double c : cross) breaks_.push_back(std::exp(c));
  breaks_.push_back(1.0);
  std::sort(breaks_.begin(), breaks_.end());
  // x density(x) with x = e^u, kept in logs so that large u does not overflow
  auto f = [alpha, a, t](double u) {
    if (u <= 0) return 0.0;
    const double la = -a * u;
    const double lb = (t - 1.0) * std::log(u) - 2.0 / alpha * u;
    return 2.0 / alpha * std::exp(std::min(la, lb));
  };
  table_ = std::make_shared<Table>(Table{PanelTable(f, std::move(edges))});
}

double BesselJump::density(double x) const {
  const double c = 2.0 / alpha_;
  if (x <= 1.0) return c * std::pow(x, -a_ - 1.0);
  const double u = std::log(x);
  const double la = -(a_ + 1.0) * u;
  const double lb = (t_ - 1.0) * std::log(u) - (2.0 / alpha_ + 1.0) * u;
  return c * std::exp(std::min(la, lb));
}

double BesselJump::tail(double x) const {
  if (x <= 0.0) return std::numeric_limits<double>::infinity();
  const auto& T = table_->tail;
  if (x <= 1.0) return T.rev.front() + 2.0 / alpha_ * (std::pow(x, -a_) - 1.0) / a_;
  const double u = std::log(x);
  if (u >= T.edge.back()) return 0.0;
  return T.to_end(u);
}

std::string BesselJump::describe() const {
  return fmt::format("(2/{0}) min(x^-{1}-1, (log x)^({2}-1) x^(-2/{0}-1))", alpha_, a_, t_);
}

JumpMeasureSpec example_jump_measure(double alpha, double a, double t) {
  return JumpMeasureSpec(std::make_shared<BesselJump>(alpha, a, t));
}

SlowlyVarying bessel_L(double t) { return SlowlyVarying::log_power(t - 1.0); }

// ---------------------------------------------------------------------------
// normalizers

namespace {
bool is_two(double alpha) { return std::abs(alpha - 2.0) < 1e-12; }
}  // namespace

double N_log_exponent(double alpha, double s, double t) {
  return is_two(alpha) ? s + t : 2.0 * (s - 1.0) / alpha + t;
}

double N_asymptotic_constant(double alpha, double s, double t) {
  if (is_two(alpha)) {
    if (!(t > 0 && s + t > 0)) throw ParameterError(fmt::format("N constant: alpha = 2 needs t > 0 and s + t > 0 (got s={}, t={})", s, t));
    return 1.0 / (t * (s + t));
  }
  if (!(alpha > 2)) throw ParameterError(fmt::format("N constant: need alpha >= 2 (got {})", alpha));
  const double e = N_log_exponent(alpha, s, t);
  if (!(e > 0)) throw ParameterError(fmt::format("N constant: need 2(s-1)/alpha + t > 0 (got {})", e));
  return alpha / ((alpha - 1.0) * (alpha - 2.0) * e);
}

UVPair bessel_uv(double alpha, double s, double t, const BesselUVOptions& opt) {
  const double C = N_asymptotic_constant(alpha, s, t);
  if (!(opt.eps > 0 && opt.eps < 1)) throw ParameterError(fmt::format("bessel uv: need eps in (0,1) (got {})", opt.eps));
  const double c1 = opt.c1.value_or(std::sqrt(C));
  if (!(c1 > 0)) throw ParameterError("bessel uv: c1 must be positive");
  const double c2 = C / c1;
  UVPair out{is_two(alpha) ? SlowlyVarying::log_power(0.5 * s, std::sqrt(c1))
                           : SlowlyVarying::log_power((s - 1.0) / alpha + 0.5 * opt.eps, std::sqrt(c1)),
             is_two(alpha) ? SlowlyVarying::log_power(t, c2) : SlowlyVarying::log_power(t - opt.eps, c2),
             {},
             {}};
  const double e = N_log_exponent(alpha, s, t);
  for (int k = 2; k <= 12; ++k) {
    const double g = std::pow(10.0, k);
    const double u = out.u(g);
    out.grid.push_back(g);
    out.ratio.push_back(u * u * out.v(g) / (C * std::pow(std::log(g), e)));
  }
  return out;
}

ScalingFamily bessel_family(const BesselFamilyParams& p) {
  auto uv = bessel_uv(p.alpha, p.s, p.t, p.uv);
  return ScalingFamily(natural_scale_string(BesselDriftSpec::from_alpha(p.alpha, p.s)),
                       example_jump_measure(p.alpha, p.a, p.t), p.alpha, uv.u, uv.v);
}

}  // namespace krein
