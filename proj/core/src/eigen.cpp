#include "kreinscale/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "kreinscale/error.hpp"

namespace krein {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double max_point(const std::vector<double>& v) {
  double r = 0.0;
  for (double x : v) {
    if (std::isfinite(x)) r = std::max(r, x);
  }
  return r;
}

SampledString build_sampled(const StringSpec& m, double lambda, const EigenOptions& opt) {
  std::vector<double> bps = opt.breakpoints;
  bps.push_back(0.5);
  bps.push_back(1.0);
  const double need = std::max(1.0, max_point(opt.breakpoints));
  const double la = std::abs(lambda);
  const auto rate = [&](double x) { return x * std::sqrt(la * std::max(0.0, m.density(x))); };

  double x_far = need;
  if (!opt.psi_only) {
    const QuadratureGrid pre = string_grid(m, opt.x_ceiling, opt.quad, bps);
    std::vector<double> h(pre.size()), L(pre.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = rate(pre.x()[i]);
    pre.cumulative(h, L);
    x_far = opt.x_ceiling;
    for (std::size_t i = 0; i < L.size(); ++i) {
      if (L[i] >= opt.growth_exponent) {
        x_far = pre.x()[i];
        break;
      }
    }
    x_far = std::max(x_far, need * 1.5);
  }
  QuadratureGrid grid = string_grid(m, x_far, opt.quad, bps);
  if (la > 0) {
    grid = grid.subdivided([&](double ta, double tb) {
      const double r = std::max({rate(std::exp(ta)), rate(std::exp(0.5 * (ta + tb))), rate(std::exp(tb))});
      return static_cast<int>(std::min(20000.0, std::ceil((tb - ta) * r / 3.0)));
    });
  }
  return SampledString(m, std::move(grid));
}

}  // namespace

EigenProfile::EigenProfile(const StringSpec& m, double lambda, EigenOptions opt)
    : m_(m),
      lambda_(lambda),
      m1_(m.value(1.0)),
      m_ref_(m.m_infinity().value_or(0.0)),
      s_(build_sampled(m, lambda, opt)) {
  if (!std::isfinite(lambda)) throw ParameterError("eigen: lambda must be finite");
  if (lambda < 0 && !opt.psi_only) throw ParameterError("eigen: g and phi need lambda >= 0");
  run_psi(opt);
  if (opt.psi_only) return;
  run_g();
  run_phi(opt);
  run_c();
}

void EigenProfile::run_psi(const EigenOptions& opt) {
  const auto& grid = s_.grid;
  const auto x = grid.x();
  const std::size_t N = grid.size();
  const int n = grid.nodes_per_panel();
  const int P = grid.panels();

  std::vector<double> xs(x.begin(), x.end());
  ms_.assign(N, 0.0);
  s_.cumulative(xs, ms_, s_.lower_tail(xs).value);

  psi_ = xs;
  psi_plus_.assign(N, 1.0);
  psi_bound_.assign(N, 0.0);
  psi_plus_bound_.assign(N, 0.0);
  psi_terms_.assign(N, 1);
  if (lambda_ == 0.0) return;

  const double la = std::abs(lambda_);
  std::vector<double> log_lms(N), lx(N), abs_sum(xs), term(xs), h(N), M(N), S(N);
  for (std::size_t i = 0; i < N; ++i) {
    log_lms[i] = ms_[i] > 0 ? std::log(la * ms_[i]) : -std::numeric_limits<double>::infinity();
    lx[i] = std::log(x[i]);
  }
  const double log_tol = std::log(opt.rel_tol);
  const auto log_bound = [&](std::size_t i, int K, double lgK) {
    if (ms_[i] <= 0) return -std::numeric_limits<double>::infinity();
    return lx[i] + K * log_lms[i] - lgK + la * ms_[i];
  };

  int p0 = 0;
  int sweep = 0;  // first panel of the next sweep; lags p0 by one iteration
  // Panels left behind perturb later ones like a value/slope kick, which grows no faster than psi.
  double drift = 0.0;
  int K = 1;
  while (true) {
    const double lgK = std::lgamma(K + 1.0);
    while (p0 < P) {
      bool ok = true;
      for (int r = 0; r < n && ok; ++r) {
        const std::size_t i = grid.first_node(p0) + r;
        const double lb = log_bound(i, K, lgK);
        // the panel is dropped from later sweeps, so its share of the right derivative must be negligible too
        ok = lb <= log_tol + std::log(abs_sum[i]) && lb + log_lms[i] - lx[i] - std::log(K + 1.0) <= log_tol;
      }
      if (!ok) break;
      double add = 0.0;
      for (int r = 0; r < n; ++r) {
        const std::size_t i = grid.first_node(p0) + r;
        const double b = std::exp(log_bound(i, K, lgK));
        psi_terms_[i] = K;
        psi_bound_[i] = b + drift * psi_[i];
        add = std::max(add, b * la * ms_[i] / (x[i] * (K + 1.0)) + b / psi_[i]);
      }
      drift += add;
      ++p0;
    }
    if (p0 == P) break;
    if (K >= opt.max_terms) {
      throw BudgetError(fmt::format("psi: series needs more than {} terms (lambda (m.s)(x) = {:.3g})",
                                    opt.max_terms, la * ms_.back()));
    }
    const int ps = sweep;
    sweep = p0;
    const std::size_t off = grid.first_node(ps);
    for (std::size_t i = off; i < N; ++i) h[i] = term[i] * s_.dm_dt[i];
    const auto jumps = s_.edge_jumps(term);
    double start = 0.0;
    if (ps == 0) start = grid.lower_tail(h).value;
    grid.cumulative(h, M, start, jumps, ps);
    for (std::size_t i = off; i < N; ++i) h[i] = M[i] * x[i];
    start = 0.0;
    if (ps == 0) start = grid.lower_tail(h).value;
    grid.cumulative(h, S, start, {}, ps);
    for (std::size_t i = 0; i < off; ++i) term[i] = 0.0;
    for (std::size_t i = off; i < N; ++i) {
      term[i] = lambda_ * S[i];
      psi_[i] += term[i];
      abs_sum[i] += std::abs(term[i]);
      if (!std::isfinite(psi_[i])) {
        throw ConvergenceError(fmt::format("psi: overflow guard tripped at x = {:.4g}", x[i]));
      }
    }
    ++K;
  }

  std::vector<double> acc(N);
  s_.cumulative(psi_, acc, s_.lower_tail(psi_).value);
  for (std::size_t i = 0; i < N; ++i) psi_plus_[i] = 1.0 + lambda_ * acc[i];
  s_.cumulative(psi_bound_, acc, 0.0);
  for (std::size_t i = 0; i < N; ++i) psi_plus_bound_[i] = la * acc[i];
}

void EigenProfile::run_g() {
  const auto& grid = s_.grid;
  const auto x = grid.x();
  const std::size_t N = grid.size();
  g_.assign(N, 1.0);
  g_bound_.assign(N, 0.0);
  if (lambda_ == 0.0) return;
  std::vector<double> h(N), I(N);
  for (std::size_t i = 0; i < N; ++i) h[i] = x[i] / (psi_[i] * psi_[i]);
  grid.reverse_cumulative(h, I);
  const double prod = psi_.back() * psi_plus_.back();
  far_tail_bound_ = std::isfinite(prod) && prod > 0 ? 1.0 / prod : 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    g_[i] = std::min(1.0, psi_[i] * (I[i] + 0.5 * far_tail_bound_));
    g_bound_[i] = psi_[i] * 0.5 * far_tail_bound_ + 3.0 * psi_bound_[i] / psi_[i] * g_[i] + 1e-12 * g_[i];
  }
}

void EigenProfile::run_phi(const EigenOptions& opt) {
  const auto& grid = s_.grid;
  const auto x = grid.x();
  const std::size_t N = grid.size();
  const int n = grid.nodes_per_panel();
  const int P = grid.panels();

  if (opt.d) {
    if (*opt.d < 1) throw ParameterError("phi: order d must be >= 1");
    d_ = *opt.d;
  } else if (!m_.singular_at_zero()) {
    d_ = 1;
  } else {
    const auto idx = d_of_m(m_, 12, opt.quad);
    if (!idx.d) throw PreconditionError("phi: d(m) exceeds 12");
    d_ = std::max(1, *idx.d);
  }
  G_ = compute_G_sequence(s_, d_, m1_);

  x_split_ = x.back();
  for (std::size_t i = 0; i < N; ++i) {
    if (lambda_ * ms_[i] >= 0.5) {
      x_split_ = x[i];
      break;
    }
  }
  x_phi_ = std::min(x.back(), std::max({1.0, opt.phi_limit, x_split_}));
  // phi is right-continuous at x_phi, so the panel starting there is included
  const int P_phi = std::clamp(grid.panel_of(x_phi_) + 1, 1, P);
  x_phi_ = grid.edges()[P_phi];
  const std::size_t N_phi = grid.first_node(P_phi - 1) + n;

  const auto& Gd = G_.G[d_];
  std::vector<double> h(N, 0.0), M1(N, 0.0), Sd(N, 0.0), term(N, 0.0), M(N, 0.0), S(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) h[i] = Gd[i] * s_.dm_dt[i];
  const auto t0 = grid.lower_tail(h);
  if (t0.divergent) {
    throw PreconditionError(fmt::format("phi: order d = {} is below d(m) (G^d dm not integrable at 0)", d_));
  }
  grid.cumulative(h, M1, t0.value, s_.edge_jumps(Gd));
  double run = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    run = std::max(run, std::abs(M1[i]));
    Sd[i] = run;
  }

  const double la = std::abs(lambda_);
  phi_.assign(N, kNaN);
  phi_plus_.assign(N, kNaN);
  phi_bound_.assign(N, kNaN);
  phi_terms_.assign(N, 0);
  w_.assign(N, 0.0);
  w_plus_.assign(N, kNaN);
  std::vector<double> base(N, 1.0), base_abs(N, 1.0), abs_w(N, 0.0);
  for (std::size_t i = 0; i < N_phi; ++i) {
    double lk = 1.0;
    for (int k = 1; k <= d_; ++k) {
      lk *= lambda_;
      base[i] += lk * G_.G[k][i];
      base_abs[i] += std::abs(lk * G_.G[k][i]);
    }
  }
  if (lambda_ == 0.0) {
    for (std::size_t i = 0; i < N_phi; ++i) {
      phi_[i] = 1.0;
      phi_plus_[i] = 0.0;
      phi_bound_[i] = 0.0;
      phi_terms_[i] = 1;
    }
    return;
  }
  const double lld = d_ * std::log(la);

  // tau_1 = lambda * s.(m.G^d)
  for (std::size_t i = 0; i < N_phi; ++i) h[i] = M1[i] * x[i];
  grid.cumulative(h, S, grid.lower_tail(h).value);
  for (std::size_t i = 0; i < N_phi; ++i) {
    term[i] = lambda_ * S[i];
    w_[i] = term[i];
    abs_w[i] = std::abs(term[i]);
  }
  const double log_tol = std::log(opt.rel_tol);
  const auto log_bound = [&](std::size_t i, int K, double lgK) {
    if (ms_[i] <= 0 || Sd[i] <= 0) return -std::numeric_limits<double>::infinity();
    return lld + (K + 1) * std::log(la) + std::log(x[i]) + std::log(Sd[i]) + K * std::log(ms_[i]) - lgK +
           la * ms_[i];
  };
  int sweep = 0;  // first panel of the next sweep; lags p0 by one iteration
  // Panels left behind perturb later ones like a value/slope kick, which grows no faster than psi.
  double drift = 0.0;
  int p0 = 0;
  int K = 1;
  while (true) {
    const double lgK = std::lgamma(K + 1.0);
    while (p0 < P_phi) {
      bool ok = true;
      for (int r = 0; r < n && ok; ++r) {
        const std::size_t i = grid.first_node(p0) + r;
        const double scale = base_abs[i] + std::pow(la, d_) * abs_w[i];
        const double lb = log_bound(i, K, lgK);
        ok = lb <= log_tol + std::log(scale) &&
             lb + std::log(la * ms_[i]) - std::log(x[i]) - std::log(K + 1.0) <= log_tol;
      }
      if (!ok) break;
      double add = 0.0;
      for (int r = 0; r < n; ++r) {
        const std::size_t i = grid.first_node(p0) + r;
        const double b = std::exp(log_bound(i, K, lgK));
        phi_terms_[i] = d_ + K + 1;
        phi_bound_[i] = b + drift * psi_[i];
        add = std::max(add, b * la * ms_[i] / (x[i] * (K + 1.0)) + b / psi_[i]);
      }
      drift += add;
      ++p0;
    }
    if (p0 == P_phi) break;
    if (K >= opt.max_terms) throw BudgetError(fmt::format("phi: series needs more than {} terms", opt.max_terms));
    const int ps = sweep;
    sweep = p0;
    const std::size_t off = grid.first_node(ps);
    for (std::size_t i = off; i < N_phi; ++i) h[i] = term[i] * s_.dm_dt[i];
    for (std::size_t i = N_phi; i < N; ++i) h[i] = 0.0;
    std::vector<double> tj(term);
    for (std::size_t i = N_phi; i < N; ++i) tj[i] = 0.0;
    double start = ps == 0 ? grid.lower_tail(h).value : 0.0;
    grid.cumulative(h, M, start, s_.edge_jumps(tj), ps);
    for (std::size_t i = off; i < N_phi; ++i) h[i] = M[i] * x[i];
    start = ps == 0 ? grid.lower_tail(h).value : 0.0;
    grid.cumulative(h, S, start, {}, ps);
    for (std::size_t i = 0; i < off; ++i) term[i] = 0.0;
    for (std::size_t i = off; i < N_phi; ++i) {
      term[i] = lambda_ * S[i];
      w_[i] += term[i];
      abs_w[i] += std::abs(term[i]);
      if (!std::isfinite(w_[i])) throw ConvergenceError("phi: overflow guard tripped");
    }
    ++K;
  }

  // phi+ = sum lambda^k dG^k + lambda^(d+1) m.(G^d + w)
  std::vector<double> f(N, 0.0), acc(N, 0.0);
  for (std::size_t i = 0; i < N_phi; ++i) f[i] = Gd[i] + w_[i];
  for (std::size_t i = 0; i < N; ++i) h[i] = f[i] * s_.dm_dt[i];
  grid.cumulative(h, acc, grid.lower_tail(h).value, s_.edge_jumps(f));
  const double ld = std::pow(lambda_, d_);
  for (std::size_t i = 0; i < N_phi; ++i) {
    phi_[i] = base[i] + ld * w_[i];
    double dp = 0.0;
    double lk = 1.0;
    for (int k = 1; k <= d_; ++k) {
      lk *= lambda_;
      dp += lk * G_.dG[k][i];
    }
    w_plus_[i] = lambda_ * acc[i];
    phi_plus_[i] = dp + ld * w_plus_[i];
  }
}

void EigenProfile::run_c() {
  if (lambda_ == 0.0) {
    c_ = 0.0;
    return;
  }
  const auto at = [&](double x, double& c, double& err, double& scale) {
    const double ps = interp(psi_, x);
    const double ph = interp(phi_, x);
    const double gg = interp(g_, x);
    c = (ph - gg) / ps;
    err = (interp(phi_bound_, x) + interp(g_bound_, x) + interp(psi_bound_, x) * std::abs(c)) / ps;
    scale = (std::abs(ph) + std::abs(gg)) / ps;
  };
  double c1, e1, s1, c2, e2, s2;
  at(1.0, c1, e1, s1);
  at(0.5, c2, e2, s2);
  const double tol = 1e-7 * std::max(s1, s2) + 10.0 * (e1 + e2);
  if (!(std::abs(c1 - c2) <= tol)) {
    throw ConvergenceError(fmt::format("c^d: evaluations at x = 1 and x = 1/2 disagree ({} vs {})", c1, c2));
  }
  c_ = c1;
  c_bound_ = e1 + std::abs(c1 - c2);
  c_noise_ = 1e-15 * s1;
}

EigenEval EigenProfile::psi(double x) const {
  if (x == 0.0) return {0.0, 1.0, 0.0, 1};
  const int p = s_.grid.panel_of(x);
  return {interp(psi_, x), interp(psi_plus_, x), interp(psi_bound_, x), psi_terms_[s_.grid.first_node(p)]};
}

EigenEval EigenProfile::g(double x) const {
  if (g_.empty()) throw PreconditionError("eigen profile was built for psi only");
  if (x == 0.0) return {1.0, kNaN, 0.0, psi_terms_.front()};
  if (x > x_far()) throw DomainError("g: x beyond the profile's far cutoff");
  const EigenEval p = psi(x);
  const double gv = interp(g_, x);
  // g+ = psi+ I - 1/psi with I = g / psi
  return {gv, p.derivative_plus * gv / p.value - 1.0 / p.value, interp(g_bound_, x), p.terms_used};
}

EigenEval EigenProfile::phi(double x) const {
  if (phi_.empty()) throw PreconditionError("eigen profile was built for psi only");
  if (x == 0.0) return {1.0, kNaN, 0.0, 1};
  if (x > x_phi_ * (1 + 1e-12)) throw DomainError("phi: x beyond the range where phi^d was evaluated");
  const int p = s_.grid.panel_of(x);
  return {interp(phi_, x), interp(phi_plus_, x), interp(phi_bound_, x), phi_terms_[s_.grid.first_node(p)]};
}

double EigenProfile::wronskian(double x) const {
  const EigenEval p = psi(x);
  const EigenEval f = phi(x);
  const double gv = interp(g_, x);
  const double gplus = f.derivative_plus - c_ * p.derivative_plus;
  return gv * p.derivative_plus - gplus * p.value;
}

std::vector<double> EigenProfile::G_m_nodes() const {
  const auto x = s_.grid.x();
  std::vector<double> h(x.size()), out(x.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = (s_.m[i] - m_ref_) * x[i];
  s_.grid.cumulative(h, out, s_.grid.lower_tail(h).value);
  return out;
}

// Both forms are evaluated where phi is available and the one with the smaller
// rounding estimate wins: the series form is exact near 0 but its terms grow with x.
std::vector<double> EigenProfile::stable_form(bool compensated) const {
  constexpr double eps = 1e-15;
  const auto x = s_.grid.x();
  std::vector<double> out(x.size());
  const double ld = std::pow(lambda_, d_);
  const int k0 = compensated ? 2 : 1;
  std::vector<double> Gm;
  if (compensated) Gm = G_m_nodes();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double direct = 1.0 - g_[i] + (compensated ? lambda_ * Gm[i] : 0.0);
    const double direct_err = eps * (g_[i] + (compensated ? std::abs(lambda_ * Gm[i]) : 0.0));
    if (!std::isfinite(phi_[i])) {
      out[i] = direct;
      continue;
    }
    double v = c_ * psi_[i] - ld * w_[i];
    double mag = std::abs(c_ * psi_[i]) + std::abs(ld * w_[i]) + c_noise_ * psi_[i];
    if (compensated) {
      v += lambda_ * (m1_ - m_ref_) * x[i];
      mag += std::abs(lambda_ * (m1_ - m_ref_) * x[i]);
    }
    double lk = std::pow(lambda_, k0 - 1);
    for (int k = k0; k <= d_; ++k) {
      lk *= lambda_;
      v -= lk * G_.G[k][i];
      mag += std::abs(lk * G_.G[k][i]);
    }
    out[i] = eps * mag < direct_err ? v : direct;
  }
  return out;
}

std::vector<double> EigenProfile::one_minus_g_nodes() const { return stable_form(false); }

std::vector<double> EigenProfile::fluctuation_nodes() const { return stable_form(true); }

EigenEval psi(const StringSpec& m, double lambda, double x, const EigenOptions& opt) {
  if (!(x >= 0.0)) throw DomainError("psi: x must be >= 0");
  if (lambda == 0.0) return {x, 1.0, 0.0, 1};
  if (x == 0.0) return {0.0, 1.0, 0.0, 1};
  EigenOptions o = opt;
  o.psi_only = true;
  o.breakpoints.push_back(x);
  return EigenProfile(m, lambda, o).psi(x);
}

EigenEval g(const StringSpec& m, double lambda, double x, const EigenOptions& opt) {
  if (!(x >= 0.0)) throw DomainError("g: x must be >= 0");
  if (!(lambda >= 0.0)) throw ParameterError("g: lambda must be >= 0");
  if (lambda == 0.0 || x == 0.0) return {1.0, 0.0, 0.0, 1};
  EigenOptions o = opt;
  o.breakpoints.push_back(x);
  return EigenProfile(m, lambda, o).g(x);
}

EigenEval phi_d(const StringSpec& m, int d, double lambda, double x, const EigenOptions& opt) {
  if (d < 1) throw ParameterError("phi_d: d must be >= 1");
  if (!(x >= 0.0)) throw DomainError("phi_d: x must be >= 0");
  if (!(lambda >= 0.0)) throw ParameterError("phi_d: lambda must be >= 0");
  if (lambda == 0.0 || x == 0.0) return {1.0, 0.0, 0.0, 1};
  EigenOptions o = opt;
  o.d = d;
  o.phi_limit = std::max(o.phi_limit, x);
  o.breakpoints.push_back(x);
  return EigenProfile(m, lambda, o).phi(x);
}

double c_d(const StringSpec& m, int d, double lambda, const EigenOptions& opt) {
  if (d < 1) throw ParameterError("c_d: d must be >= 1");
  if (!(lambda >= 0.0)) throw ParameterError("c_d: lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  EigenOptions o = opt;
  o.d = d;
  return EigenProfile(m, lambda, o).c();
}

double wronskian(const StringSpec& m, double lambda, double x, const EigenOptions& opt) {
  if (!(x > 0.0)) throw DomainError("wronskian: x must be > 0");
  if (!(lambda > 0.0)) throw ParameterError("wronskian: lambda must be > 0");
  EigenOptions o = opt;
  o.phi_limit = std::max(o.phi_limit, x);
  o.breakpoints.push_back(x);
  return EigenProfile(m, lambda, o).wronskian(x);
}

ScalingResiduals scaling_identity_check(const StringSpec& m, double a, double b, double lambda, double x,
                                        const EigenOptions& opt) {
  if (!(a > 0 && b > 0 && lambda > 0 && x > 0)) {
    throw ParameterError("scaling_identity_check: a, b, lambda, x must be positive");
  }
  EigenOptions o1 = opt;
  o1.breakpoints.push_back(b * x);
  const EigenProfile left(m, a * lambda, o1);
  EigenOptions o2 = opt;
  o2.breakpoints.push_back(x);
  const EigenProfile right(m.scaled(a, b), b * lambda, o2);
  const auto gl = left.g(b * x);
  const auto gr = right.g(x);
  const auto pl = left.psi(b * x);
  const auto pr = right.psi(x);
  ScalingResiduals r;
  r.g_residual = gl.value - gr.value;
  r.psi_residual = pl.value - b * pr.value;
  r.g_bound = gl.truncation_bound + gr.truncation_bound;
  r.psi_bound = pl.truncation_bound + b * pr.truncation_bound + 1e-12 * std::abs(pl.value);
  return r;
}

}  // namespace krein
