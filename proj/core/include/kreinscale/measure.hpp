#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kreinscale/grid.hpp"
#include "kreinscale/jump_measure.hpp"
#include "kreinscale/string_spec.hpp"

namespace krein {

struct QuadratureOptions {
  double x_lo = 1e-100;
  int panels_per_decade = 2;
  int nodes_per_panel = 20;
  double rel_tol = 1e-8;
  int max_refinements = 3;
};

/// Grid on [x_lo, x_hi] whose edges include the string's breakpoints and atoms.
QuadratureGrid string_grid(const StringSpec& m, double x_hi, const QuadratureOptions& q,
                           std::vector<double> extra_breakpoints = {});

/// A string sampled on a grid for Stieltjes integration.
struct SampledString {
  QuadratureGrid grid;
  std::vector<double> m;      // left limits at panel right ends
  std::vector<double> dm_dt;  // density(x) * x
  std::vector<double> atoms;  // mass sitting on each edge

  SampledString(const StringSpec& spec, QuadratureGrid g);

  /// Jump vector f(edge) * atom for an integrand f sampled at the nodes.
  std::vector<double> edge_jumps(std::span<const double> f) const;
  /// h = f dm/dt.
  std::vector<double> integrand(std::span<const double> f) const;
  /// out[i] = start + integral of f dm over (x_lo, x_i]; returns the total.
  double cumulative(std::span<const double> f, std::span<double> out, double start = 0.0) const;
  /// out[i] = integral of f dm over (x_i, x_hi].
  double reverse_cumulative(std::span<const double> f, std::span<double> out) const;
  /// Signed integral of f dm from edge `anchor` to each node.
  void anchored_cumulative(std::span<const double> f, std::span<double> out, int anchor) const;
  /// Power-law estimate of the integral of f dm over (0, x_lo].
  TailEstimate lower_tail(std::span<const double> f) const;
};

/// Integral of f dm over (a, b]; b may be infinite.
double stieltjes_integral(const std::function<double(double)>& f, double a, double b,
                          const StringSpec& m, const QuadratureOptions& q = {});

/// Integral of m over (0, x].
double G_m(const StringSpec& m, double x, const QuadratureOptions& q = {});

/// Table of G^1..G^K on a grid containing the edge x = 1, with their right derivatives.
struct GSequence {
  int kmax = 0;
  std::vector<std::vector<double>> G;   // G[k], k = 1..kmax (G[0] unused)
  std::vector<std::vector<double>> dG;  // right derivatives
};
GSequence compute_G_sequence(const SampledString& s, int kmax, double m_at_one);

double G_k(const StringSpec& m, int k, double x, const QuadratureOptions& q = {});

/// Verdict on the summability of a sequence of dyadic partial integrals.
struct DyadicVerdict {
  enum class Kind { converges, diverges, indeterminate } kind = Kind::indeterminate;
  double partial_sum = 0.0;
  double tail_bound = 0.0;
  double ratio = 0.0;
};
DyadicVerdict classify_dyadic(std::span<const double> partials);

struct SingularityIndex {
  /// nullopt when no k <= d_max gives a finite integral.
  std::optional<int> d;
  /// Integrals of (-1)^k G^k dm over (0,1] for k = 1.. (infinite when divergent).
  std::vector<double> integrals;
};
SingularityIndex d_of_m(const StringSpec& m, int d_max, const QuadratureOptions& q = {});

struct ConditionC {
  bool holds = false;
  bool infinite_near_zero = false;
  double tail_mass = 0.0;     // j(1, inf)
  double first_moment = 0.0;  // integral of x j(dx) over (0,1]
  double g_moment = 0.0;      // integral of |G_m| dj over (0,1]
};
ConditionC check_condition_C(const StringSpec& m, const JumpMeasureSpec& j, const QuadratureOptions& q = {});

/// N(gamma) = integral over (0,gamma] of j(dx) int_0^x dy int_(y,gamma] dm(z) int_0^z m(w,inf) dw.
double N_of_gamma(const StringSpec& m, const JumpMeasureSpec& j, double gamma,
                  const QuadratureOptions& q = {});

struct FMQuantities {
  double F = 0.0;
  double M = 0.0;
  int order = 0;                // N = floor(alpha) - 1 in the exponent of the surrogate
  bool M_is_asymptotic = true;  // M is a proportionality surrogate, not a quadrature value
};
FMQuantities F_M_quantities(const StringSpec& m, double gamma, double alpha,
                            const std::function<double(double)>& K = {}, const QuadratureOptions& q = {});

/// A quadrature value with the magnitude against which its error is judged
/// (for cancelling integrands, the integral of the absolute integrand).
struct QuadEstimate {
  double value = 0.0;
  double scale = 0.0;
};

/// Runs eval(q) with panels doubled until successive values agree within
/// q.rel_tol * max(|value|, scale).
double refine_until_stable(const std::function<QuadEstimate(const QuadratureOptions&)>& eval,
                           const QuadratureOptions& q);

}  // namespace krein
