#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "kreinscale/jump_measure.hpp"
#include "kreinscale/levy.hpp"
#include "kreinscale/string_spec.hpp"

namespace krein {

enum class T0Scheme {
  automatic,    // exact where available, else euler / birth_death by spec type
  exact,        // power strings (and unperturbed Bessel strings): T0 = theta c x^(1-theta) / ((1-theta)^2 G)
  euler,        // Euler-Maruyama with steps relative to the current position
  birth_death,  // tabulated strings: walk on the atoms
};
std::string to_string(T0Scheme s);
T0Scheme t0_scheme_from_string(const std::string& s);

struct SimConfig {
  std::uint64_t seed = 1;
  int replicates = 100;
  /// Euler step: X moves by about sqrt(dt) X per step.
  double dt = 1e-3;
  /// Jumps below eps_jump are replaced by their mean contribution.
  double eps_jump = 1e-3;
  /// Local-time horizon U for eta, real-time horizon t for occupation.
  double horizon = 1e3;
  int workers = 1;
  T0Scheme scheme = T0Scheme::automatic;
  /// Euler absorbs at absorb_c * sqrt(dt) and adds the mean remaining time there.
  double absorb_c = 1.0;
  /// Brownian-bridge crossing check between Euler steps.
  bool bridge_correction = false;
  /// Per-T0 step budget (Euler steps or chain moves).
  long long max_steps = 100000000;

  void validate() const;
};

/// Independent generator for replicate `rep` (same stream however replicates are scheduled).
std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t rep, std::uint64_t salt = 0);

/// Runs f(rep) for rep in [0, n) on `workers` threads. The first failure (lowest rep) is rethrown.
void parallel_replicates(int n, int workers, const std::function<void(int)>& f);

/// Sampler of the hitting time of 0 for the natural-scale diffusion of one string.
class T0Sampler {
 public:
  T0Sampler(const StringSpec& m, const SimConfig& cfg);

  double operator()(double x, std::mt19937_64& rng) const;
  T0Scheme scheme() const { return scheme_; }
  /// E_x T0 = int_0^x m(y, inf) dy.
  double green_mean(double x) const;

 private:
  double exact(double x, std::mt19937_64& rng) const;
  double euler_natural(double x, std::mt19937_64& rng) const;
  double euler_drift(double x, std::mt19937_64& rng) const;
  double chain(double x, std::mt19937_64& rng) const;

  StringSpec m_;
  SimConfig cfg_;
  T0Scheme scheme_;
  double m_inf_ = 0.0;
  // exact
  double theta_ = 0.0, c_ = 0.0;
  // chain
  std::vector<double> atom_x_, atom_mass_;
  // Bessel drift (original coordinates)
  bool drift_coords_ = false;
};

/// One T0 draw from x with replicate stream 0 of cfg.seed.
double sample_T0(const StringSpec& m, double x, const SimConfig& cfg);

struct SampleStats {
  double mean = 0.0;
  double se = 0.0;
  double variance = 0.0;
  double median = 0.0;
  int n = 0;
};
SampleStats summarize(const std::vector<double>& v);

/// cfg.replicates draws of T0 from x (replicate r uses stream r).
std::vector<double> sample_T0_batch(const StringSpec& m, double x, const SimConfig& cfg);

/// int_0^eps j(dx) int_0^x m(y, inf) dy, the mean of the truncated small jumps per unit local time.
double small_jump_drift(const StringSpec& m, const JumpMeasureSpec& j, double eps);

struct SubordinatorSample {
  double horizon = 0.0;
  double eps = 0.0;
  double drift = 0.0;           // b_eps
  std::vector<double> u;        // local times of the jumps (ascending)
  std::vector<double> x;        // starting points
  std::vector<double> T0;       // lifetimes
  /// sum over u_i <= s of T0_i + b_eps s.
  double eta(double s) const;
};

SubordinatorSample sample_eta(const StringSpec& m, const JumpMeasureSpec& j, const SimConfig& cfg, int replicate = 0);

struct EtaExperiment {
  double b = 0.0;           // LLN slope from quadrature
  double drift = 0.0;       // b_eps, also the largest mean error if compensation were dropped
  double expected_points = 0.0;
  std::vector<double> slope;   // eta(U)/U per replicate
  std::vector<double> points;  // jump counts per replicate
  SampleStats stats;
};
EtaExperiment eta_experiment(const StringSpec& m, const JumpMeasureSpec& j, const SimConfig& cfg);

struct BilateralSpec {
  StringSpec m_plus;
  JumpMeasureSpec j_plus;
  StringSpec m_minus;
  JumpMeasureSpec j_minus;
};

struct OccupationResult {
  double t = 0.0;
  double A = 0.0;  // time spent in (0, inf)
};
OccupationResult sample_occupation(const BilateralSpec& bi, double t, const SimConfig& cfg, int replicate = 0);

struct OccupationExperiment {
  double p = 0.0;  // b+ / (b+ + b-)
  double b_plus = 0.0, b_minus = 0.0;
  std::vector<double> fraction;  // A(t)/t per replicate
  SampleStats stats;
};
OccupationExperiment occupation_experiment(const BilateralSpec& bi, const SimConfig& cfg);

struct JackknifeEstimate {
  double value = 0.0;
  double se = 0.0;
};

struct FluctuationTable {
  double gamma = 0.0;
  double b = 0.0;
  double eps = 0.0;
  std::vector<double> t;
  std::vector<double> local_time;         // gamma t / v(gamma^(alpha/2))
  std::vector<std::vector<double>> Z;     // Z[rep][k]
  std::vector<SampleStats> stats;         // per t
  std::vector<double> ks;                 // KS distance of Z(t)/sqrt(2t) to N(0,1)
  /// Var Z(t_{k+1}) / Var Z(t_k) and corr(Z(t_{k+1}) - Z(t_k), Z(t_k)) for consecutive grid points.
  std::vector<JackknifeEstimate> var_ratio;
  std::vector<JackknifeEstimate> increment_corr;
};
FluctuationTable fluctuation_experiment(const ScalingFamily& fam, double gamma, std::vector<double> t_grid,
                                        const SimConfig& cfg);

}  // namespace krein
