#include "kreinscale/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fmt/format.h>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "kreinscale/bessel.hpp"
#include "kreinscale/error.hpp"
#include "kreinscale/grid.hpp"

namespace krein {

std::string to_string(T0Scheme s) {
  switch (s) {
    case T0Scheme::automatic: return "auto";
    case T0Scheme::exact: return "exact";
    case T0Scheme::euler: return "euler";
    case T0Scheme::birth_death: return "birth-death";
  }
  return "?";
}

T0Scheme t0_scheme_from_string(const std::string& s) {
  if (s == "auto") return T0Scheme::automatic;
  if (s == "exact") return T0Scheme::exact;
  if (s == "euler") return T0Scheme::euler;
  if (s == "birth-death") return T0Scheme::birth_death;
  throw ParameterError(fmt::format("unknown T0 scheme '{}' (auto, exact, euler, birth-death)", s));
}

void SimConfig::validate() const {
  if (!(dt > 0 && dt < 1)) throw ParameterError(fmt::format("sim: dt must be in (0,1) (got {})", dt));
  if (!(eps_jump > 0)) throw ParameterError(fmt::format("sim: eps_jump must be positive (got {})", eps_jump));
  if (replicates < 1) throw ParameterError("sim: replicates must be >= 1");
  if (!(horizon > 0) || !std::isfinite(horizon)) throw ParameterError("sim: horizon must be positive");
  if (workers < 1) throw ParameterError("sim: workers must be >= 1");
  if (!(absorb_c > 0)) throw ParameterError("sim: absorb_c must be positive");
  if (max_steps < 1) throw ParameterError("sim: max_steps must be >= 1");
}

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) {
  // (0, 1]
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

double normal(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return n(rng);
}

}  // namespace

std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t rep, std::uint64_t salt) {
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64(s);
  s = a ^ (rep * 0xd1342543de82ef95ULL + 1);
  const std::uint64_t b = splitmix64(s);
  s = b ^ (salt * 0xaf251af3b0f025b5ULL);
  std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s))};
  return std::mt19937_64(seq);
}

void parallel_replicates(int n, int workers, const std::function<void(int)>& f) {
  if (n <= 0) return;
  workers = std::max(1, std::min(workers, n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto run = [&] {
    for (int r = next++; r < n; r = next++) {
      try {
        f(r);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------------------
// T0

T0Sampler::T0Sampler(const StringSpec& m, const SimConfig& cfg) : m_(m), cfg_(cfg), scheme_(cfg.scheme) {
  cfg.validate();
  const auto mi = m.m_infinity();
  if (!mi) throw PreconditionError(fmt::format("T0: m(inf) is infinite for {}, the diffusion is not positive recurrent", m.describe()));
  m_inf_ = *mi;

  const auto* power = dynamic_cast<const PowerString*>(&m.model());
  const auto* bessel = dynamic_cast<const BesselString*>(&m.model());
  const auto* table = dynamic_cast<const TabulatedString*>(&m.model());
  // exact law available: m(x) = -c x^-theta after rescaling
  bool has_exact = false;
  if (power) {
    theta_ = power->theta();
    c_ = power->c();
    has_exact = true;
  } else if (bessel && bessel->drift().s == 1.0) {
    const auto& d = bessel->drift();
    const double w = d.w();
    theta_ = -d.delta / (2.0 - d.delta);
    c_ = 2.0 * w / (-d.delta) * std::pow(w * (2.0 - d.delta), d.delta / (2.0 - d.delta));
    has_exact = true;
  }
  if (has_exact) c_ *= m.value_scale() * std::pow(m.arg_scale(), -theta_);

  if (scheme_ == T0Scheme::automatic) {
    if (has_exact) scheme_ = T0Scheme::exact;
    else if (table) scheme_ = T0Scheme::birth_death;
    else scheme_ = T0Scheme::euler;
  }
  switch (scheme_) {
    case T0Scheme::exact:
      if (!has_exact) throw SchemeUnavailableError(fmt::format("T0: no exact law for {}", m.describe()));
      break;
    case T0Scheme::birth_death:
      if (!table) throw SchemeUnavailableError(fmt::format("T0: birth-death chain needs a tabulated string, got {}", m.describe()));
      for (const auto& a : m.atoms()) {
        if (a.mass > 0) {
          atom_x_.push_back(a.x);
          atom_mass_.push_back(a.mass);
        }
      }
      if (atom_x_.empty()) throw SchemeUnavailableError("T0: tabulated string without mass");
      break;
    case T0Scheme::euler:
      if (table) throw SchemeUnavailableError("T0: Euler needs a string with a density (use birth-death)");
      drift_coords_ = bessel != nullptr;
      break;
    case T0Scheme::automatic:
      break;
  }
}

double T0Sampler::green_mean(double x) const {
  if (!(x > 0)) return 0.0;
  if (auto I = m_.integral(x)) return m_inf_ * x - *I;
  auto bps = m_.breakpoints();
  return integrate_dx([&](double y) { return m_inf_ - m_.value(y); }, 0.0, x, bps);
}

double T0Sampler::operator()(double x, std::mt19937_64& rng) const {
  if (!(x >= 0)) throw DomainError(fmt::format("T0: start must be >= 0 (got {})", x));
  if (x == 0.0) return 0.0;
  switch (scheme_) {
    case T0Scheme::exact: return exact(x, rng);
    case T0Scheme::birth_death: return chain(x, rng);
    case T0Scheme::euler: return drift_coords_ ? euler_drift(x, rng) : euler_natural(x, rng);
    case T0Scheme::automatic: break;
  }
  throw SchemeUnavailableError("T0: no scheme");
}

// The diffusion of m = -c x^-theta is a power of a Bessel process of index -1/(1-theta),
// whose hitting time of 0 is r^2 / (2 Gamma(1/(1-theta))).
double T0Sampler::exact(double x, std::mt19937_64& rng) const {
  std::gamma_distribution<double> G(1.0 / (1.0 - theta_), 1.0);
  const double k = theta_ * c_ / ((1.0 - theta_) * (1.0 - theta_));
  return k * std::pow(x, 1.0 - theta_) / G(rng);
}

// dX = sqrt(2/m'(X)) dW with step h = dt X^2 m'(X) / 2, so X moves by sqrt(dt) X per step.
double T0Sampler::euler_natural(double x, std::mt19937_64& rng) const {
  const double dt = cfg_.dt, sq = std::sqrt(dt);
  const double x_abs = cfg_.absorb_c * sq;
  double X = x, T = 0.0;
  for (long long n = 0; n < cfg_.max_steps; ++n) {
    if (X <= x_abs) return T + green_mean(X);
    const double h = 0.5 * dt * X * X * m_.density(X);
    const double Xn = X * (1.0 + sq * normal(rng));
    T += h;
    if (Xn <= 0.0) return T;
    if (cfg_.bridge_correction && Xn > x_abs) {
      const double p = std::exp(-2.0 * (X - x_abs) * (Xn - x_abs) / (dt * X * X));
      if (uniform01(rng) < p) return T + green_mean(x_abs);
    }
    X = Xn;
  }
  throw BudgetError(fmt::format("T0: Euler exceeded {} steps from x = {}", cfg_.max_steps, x));
}

// Bessel-like drift in the original coordinate y = s~^-1(x): dY = dW + b(Y)/2 dt with
// b(y) = (delta - 1 + eps(y))/y. Hitting 0 is the same event in both coordinates.
double T0Sampler::euler_drift(double x, std::mt19937_64& rng) const {
  const auto& bs = dynamic_cast<const BesselString&>(m_.model());
  const auto& d = bs.drift();
  const double a = m_.value_scale(), b = m_.arg_scale();
  const double dt = cfg_.dt, sq = std::sqrt(dt);
  const double x_abs = cfg_.absorb_c * sq;  // in model coordinates
  const double y_abs = bs.scale_inverse(x_abs);
  double Y = bs.scale_inverse(b * x), T = 0.0;
  for (long long n = 0; n < cfg_.max_steps; ++n) {
    if (Y <= y_abs) return a * T + green_mean(bs.scale(Y) / b);
    const double eps = (Y > d.x0 && d.s != 1.0) ? (d.s - 1.0) / std::log(Y) : 0.0;
    const double h = dt * Y * Y;
    const double Yn = Y * (1.0 + 0.5 * (d.delta - 1.0 + eps) * dt + sq * normal(rng));
    T += h;
    if (Yn <= 0.0) return a * T;
    if (cfg_.bridge_correction && Yn > y_abs) {
      const double p = std::exp(-2.0 * (Y - y_abs) * (Yn - y_abs) / h);
      if (uniform01(rng) < p) return a * T + green_mean(x_abs / b);
    }
    Y = Yn;
  }
  throw BudgetError(fmt::format("T0: Euler exceeded {} steps from x = {}", cfg_.max_steps, x));
}

// Walk on the atoms: from atom i the next atom is chosen by the natural scale and the
// holding time is exponential with mean mass_i (x_i - a)(b - x_i)/(b - a).
double T0Sampler::chain(double x, std::mt19937_64& rng) const {
  const auto& ax = atom_x_;
  const auto& am = atom_mass_;
  const int n = static_cast<int>(ax.size());
  auto left = [&](int i) { return i == 0 ? 0.0 : ax[static_cast<std::size_t>(i - 1)]; };
  int i;
  if (x >= ax.back()) {
    i = n - 1;
  } else {
    const int k = static_cast<int>(std::upper_bound(ax.begin(), ax.end(), x) - ax.begin());  // ax[k] > x
    if (k > 0 && ax[static_cast<std::size_t>(k - 1)] == x) {
      i = k - 1;
    } else {
      const double lo = left(k), hi = ax[static_cast<std::size_t>(k)];
      if (uniform01(rng) <= (hi - x) / (hi - lo)) {
        if (k == 0) return 0.0;
        i = k - 1;
      } else {
        i = k;
      }
    }
  }
  double T = 0.0;
  for (long long s = 0; s < cfg_.max_steps; ++s) {
    const double xi = ax[static_cast<std::size_t>(i)], a = left(i);
    if (i == n - 1) {
      T += am[static_cast<std::size_t>(i)] * (xi - a) * -std::log(uniform01(rng));
      --i;
    } else {
      const double b = ax[static_cast<std::size_t>(i + 1)];
      T += am[static_cast<std::size_t>(i)] * (xi - a) * (b - xi) / (b - a) * -std::log(uniform01(rng));
      if (uniform01(rng) <= (xi - a) / (b - a)) ++i; else --i;
    }
    if (i < 0) return T;
  }
  throw BudgetError(fmt::format("T0: birth-death chain exceeded {} moves from x = {}", cfg_.max_steps, x));
}

double sample_T0(const StringSpec& m, double x, const SimConfig& cfg) {
  const T0Sampler s(m, cfg);
  auto rng = replicate_stream(cfg.seed, 0);
  return s(x, rng);
}

SampleStats summarize(const std::vector<double>& v) {
  SampleStats s;
  s.n = static_cast<int>(v.size());
  if (v.empty()) return s;
  // fixed summation order keeps results independent of scheduling
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / s.n;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.variance = s.n > 1 ? ss / (s.n - 1) : 0.0;
  s.se = std::sqrt(s.variance / s.n);
  std::vector<double> w = v;
  std::sort(w.begin(), w.end());
  s.median = s.n % 2 ? w[static_cast<std::size_t>(s.n / 2)]
                     : 0.5 * (w[static_cast<std::size_t>(s.n / 2 - 1)] + w[static_cast<std::size_t>(s.n / 2)]);
  return s;
}

std::vector<double> sample_T0_batch(const StringSpec& m, double x, const SimConfig& cfg) {
  const T0Sampler s(m, cfg);
  std::vector<double> out(static_cast<std::size_t>(cfg.replicates));
  parallel_replicates(cfg.replicates, cfg.workers, [&](int r) {
    auto rng = replicate_stream(cfg.seed, static_cast<std::uint64_t>(r));
    out[static_cast<std::size_t>(r)] = s(x, rng);
  });
  return out;
}

// ---------------------------------------------------------------------------
// eta

double small_jump_drift(const StringSpec& m, const JumpMeasureSpec& j, double eps) {
  const auto mi = m.m_infinity();
  if (!mi) throw DivergenceError("small_jump_drift: m(inf) is infinite");
  // int_0^eps j(dx) G(x) = int_0^eps m(y,inf) (j(y,inf) - j(eps,inf)) dy
  const double J = j.tail(eps);
  auto bps = m.breakpoints();
  for (double v : j.breakpoints()) bps.push_back(v);
  return integrate_dx([&](double y) { return (*mi - m.value(y)) * (j.tail(y) - J); }, 0.0, eps, bps);
}

double SubordinatorSample::eta(double s) const {
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(u.begin(), u.end(), s) - u.begin());
  double v = 0.0;
  for (std::size_t i = 0; i < k; ++i) v += T0[i];
  return v + drift * s;
}

namespace {

// Poisson points of intensity du x j restricted to [eps, inf), generated in local-time order.
struct JumpStream {
  const JumpMeasureSpec& j;
  double rate;
  JumpStream(const JumpMeasureSpec& jj, double eps) : j(jj), rate(jj.tail(eps)) {}
  double gap(std::mt19937_64& rng) const { return rate > 0 ? -std::log(uniform01(rng)) / rate : INFINITY; }
  double size(std::mt19937_64& rng) const { return j.tail_inverse(rate * uniform01(rng)); }
};

}  // namespace

SubordinatorSample sample_eta(const StringSpec& m, const JumpMeasureSpec& j, const SimConfig& cfg, int replicate) {
  cfg.validate();
  const T0Sampler T0(m, cfg);
  SubordinatorSample out;
  out.horizon = cfg.horizon;
  out.eps = cfg.eps_jump;
  out.drift = small_jump_drift(m, j, cfg.eps_jump);
  const JumpStream js(j, cfg.eps_jump);
  auto rng = replicate_stream(cfg.seed, static_cast<std::uint64_t>(replicate));
  for (double u = js.gap(rng); u <= cfg.horizon; u += js.gap(rng)) {
    const double x = js.size(rng);
    out.u.push_back(u);
    out.x.push_back(x);
    out.T0.push_back(T0(x, rng));
  }
  return out;
}

EtaExperiment eta_experiment(const StringSpec& m, const JumpMeasureSpec& j, const SimConfig& cfg) {
  cfg.validate();
  EtaExperiment out;
  out.b = b_mean(m, j);
  out.drift = small_jump_drift(m, j, cfg.eps_jump);
  out.expected_points = j.tail(cfg.eps_jump) * cfg.horizon;
  const T0Sampler T0(m, cfg);
  const JumpStream js(j, cfg.eps_jump);
  const auto n = static_cast<std::size_t>(cfg.replicates);
  out.slope.assign(n, 0.0);
  out.points.assign(n, 0.0);
  parallel_replicates(cfg.replicates, cfg.workers, [&](int r) {
    auto rng = replicate_stream(cfg.seed, static_cast<std::uint64_t>(r));
    double sum = 0.0, count = 0.0;
    for (double u = js.gap(rng); u <= cfg.horizon; u += js.gap(rng)) {
      sum += T0(js.size(rng), rng);
      count += 1.0;
    }
    out.slope[static_cast<std::size_t>(r)] = sum / cfg.horizon + out.drift;
    out.points[static_cast<std::size_t>(r)] = count;
  });
  out.stats = summarize(out.slope);
  return out;
}

// ---------------------------------------------------------------------------
// occupation

namespace {

struct Side {
  T0Sampler T0;
  JumpStream js;
  double drift;
};

double occupation_one(const Side& plus, const Side& minus, double t, std::mt19937_64& rng) {
  const double rate = plus.js.rate + minus.js.rate;
  const double d = plus.drift + minus.drift;
  const double share = d > 0 ? plus.drift / d : 0.5;
  double tau = 0.0, A = 0.0;
  while (tau < t) {
    const double du = rate > 0 ? -std::log(uniform01(rng)) / rate : INFINITY;
    // small excursions fill real time at rate d per unit local time
    const double D = du * d;
    if (!(tau + D < t)) {
      A += (t - tau) * share;
      break;
    }
    A += du * plus.drift;
    tau += D;
    const bool up = uniform01(rng) * rate < plus.js.rate;
    const Side& s = up ? plus : minus;
    const double len = s.T0(s.js.size(rng), rng);
    if (tau + len >= t) {
      if (up) A += t - tau;
      break;
    }
    if (up) A += len;
    tau += len;
  }
  return std::clamp(A, 0.0, t);
}

}  // namespace

OccupationResult sample_occupation(const BilateralSpec& bi, double t, const SimConfig& cfg, int replicate) {
  cfg.validate();
  if (!(t > 0)) throw ParameterError("occupation: t must be positive");
  const Side plus{T0Sampler(bi.m_plus, cfg), JumpStream(bi.j_plus, cfg.eps_jump), small_jump_drift(bi.m_plus, bi.j_plus, cfg.eps_jump)};
  const Side minus{T0Sampler(bi.m_minus, cfg), JumpStream(bi.j_minus, cfg.eps_jump),
                   small_jump_drift(bi.m_minus, bi.j_minus, cfg.eps_jump)};
  auto rng = replicate_stream(cfg.seed, static_cast<std::uint64_t>(replicate));
  return {t, occupation_one(plus, minus, t, rng)};
}

OccupationExperiment occupation_experiment(const BilateralSpec& bi, const SimConfig& cfg) {
  cfg.validate();
  OccupationExperiment out;
  const bool plus_empty = bi.j_plus.tail(cfg.eps_jump) == 0.0;
  const bool minus_empty = bi.j_minus.tail(cfg.eps_jump) == 0.0;
  out.b_plus = plus_empty ? 0.0 : b_mean(bi.m_plus, bi.j_plus);
  out.b_minus = minus_empty ? 0.0 : b_mean(bi.m_minus, bi.j_minus);
  if (!(out.b_plus + out.b_minus > 0)) throw ParameterError("occupation: both sides are empty");
  out.p = out.b_plus / (out.b_plus + out.b_minus);
  const Side plus{T0Sampler(bi.m_plus, cfg), JumpStream(bi.j_plus, cfg.eps_jump),
                  plus_empty ? 0.0 : small_jump_drift(bi.m_plus, bi.j_plus, cfg.eps_jump)};
  const Side minus{T0Sampler(bi.m_minus, cfg), JumpStream(bi.j_minus, cfg.eps_jump),
                   minus_empty ? 0.0 : small_jump_drift(bi.m_minus, bi.j_minus, cfg.eps_jump)};
  out.fraction.assign(static_cast<std::size_t>(cfg.replicates), 0.0);
  parallel_replicates(cfg.replicates, cfg.workers, [&](int r) {
    auto rng = replicate_stream(cfg.seed, static_cast<std::uint64_t>(r));
    out.fraction[static_cast<std::size_t>(r)] = occupation_one(plus, minus, cfg.horizon, rng) / cfg.horizon;
  });
  out.stats = summarize(out.fraction);
  return out;
}

// ---------------------------------------------------------------------------
// fluctuations

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ks_normal(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double F = normal_cdf(v[i]);
    d = std::max({d, std::abs(F - i / n), std::abs((i + 1) / n - F)});
  }
  return d;
}

// Delete-one jackknife of a statistic built from the sums of a few per-replicate quantities.
JackknifeEstimate jackknife(const std::vector<std::vector<double>>& q,
                            const std::function<double(const std::vector<double>&, double)>& stat) {
  const std::size_t k = q.size(), n = q.front().size();
  std::vector<double> total(k, 0.0);
  for (std::size_t a = 0; a < k; ++a)
    for (double v : q[a]) total[a] += v;
  JackknifeEstimate out;
  out.value = stat(total, static_cast<double>(n));
  std::vector<double> th(n);
  std::vector<double> s(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) s[a] = total[a] - q[a][i];
    th[i] = stat(s, static_cast<double>(n - 1));
  }
  double mean = 0.0;
  for (double v : th) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : th) ss += (v - mean) * (v - mean);
  out.se = std::sqrt(ss * (n - 1.0) / n);
  return out;
}

}  // namespace

FluctuationTable fluctuation_experiment(const ScalingFamily& fam, double gamma, std::vector<double> t_grid,
                                        const SimConfig& cfg) {
  cfg.validate();
  if (t_grid.empty()) throw ParameterError("fluctuation: empty t grid");
  std::sort(t_grid.begin(), t_grid.end());
  if (!(t_grid.front() > 0)) throw ParameterError("fluctuation: t grid must be positive");
  if (!(gamma > 1)) throw ParameterError("fluctuation: gamma must exceed 1");
  FluctuationTable out;
  out.gamma = gamma;
  out.t = t_grid;
  out.eps = cfg.eps_jump;
  out.b = b_mean(fam.m(), fam.j());
  const double drift = small_jump_drift(fam.m(), fam.j(), cfg.eps_jump);
  const double B = std::pow(gamma, fam.alpha() / 2.0);
  const double local_rate = gamma / fam.v()(B);
  const double norm = std::sqrt(gamma) * fam.u()(B);
  for (double t : t_grid) out.local_time.push_back(local_rate * t);
  const T0Sampler T0(fam.m(), cfg);
  const JumpStream js(fam.j(), cfg.eps_jump);
  const std::size_t K = t_grid.size();
  out.Z.assign(static_cast<std::size_t>(cfg.replicates), std::vector<double>(K, 0.0));
  parallel_replicates(cfg.replicates, cfg.workers, [&](int r) {
    auto rng = replicate_stream(cfg.seed, static_cast<std::uint64_t>(r));
    auto& z = out.Z[static_cast<std::size_t>(r)];
    double sum = 0.0;
    std::size_t k = 0;
    double u = js.gap(rng);
    while (k < K) {
      if (u > out.local_time[k]) {
        const double U = out.local_time[k];
        z[k] = (sum - (out.b - drift) * U) / norm;
        ++k;
        continue;
      }
      sum += T0(js.size(rng), rng);
      u += js.gap(rng);
    }
  });
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> col(out.Z.size());
    for (std::size_t r = 0; r < col.size(); ++r) col[r] = out.Z[r][k];
    out.stats.push_back(summarize(col));
    std::vector<double> scaled = col;
    for (double& v : scaled) v /= std::sqrt(2.0 * t_grid[k]);
    out.ks.push_back(ks_normal(std::move(scaled)));
  }
  if (cfg.replicates >= 3) {
    for (std::size_t k = 0; k + 1 < K; ++k) {
      std::vector<double> a(out.Z.size()), b(out.Z.size());
      for (std::size_t r = 0; r < a.size(); ++r) {
        a[r] = out.Z[r][k];
        b[r] = out.Z[r][k + 1] - out.Z[r][k];
      }
      std::vector<double> aa(a.size()), bb(a.size()), ab(a.size()), zz(a.size()), z2(a.size());
      for (std::size_t r = 0; r < a.size(); ++r) {
        aa[r] = a[r] * a[r];
        bb[r] = b[r] * b[r];
        ab[r] = a[r] * b[r];
        zz[r] = out.Z[r][k + 1];
        z2[r] = zz[r] * zz[r];
      }
      auto var = [](double s, double s2, double n) { return (s2 - s * s / n) / (n - 1.0); };
      out.var_ratio.push_back(jackknife({a, aa, zz, z2}, [&](const std::vector<double>& s, double n) {
        return var(s[2], s[3], n) / var(s[0], s[1], n);
      }));
      out.increment_corr.push_back(jackknife({a, aa, b, bb, ab}, [&](const std::vector<double>& s, double n) {
        const double cov = (s[4] - s[0] * s[2] / n) / (n - 1.0);
        return cov / std::sqrt(var(s[0], s[1], n) * var(s[2], s[3], n));
      }));
    }
  }
  return out;
}

}  // namespace krein
