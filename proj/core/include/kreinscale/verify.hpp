#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kreinscale/eigen.hpp"
#include "kreinscale/levy.hpp"
#include "kreinscale/measure.hpp"
#include "kreinscale/slowly_varying.hpp"

namespace krein {

enum class Verdict { pass, fail, indeterminate };
std::string to_string(Verdict v);

/// One functional evaluated along the gamma grid.
struct Functional {
  std::string name;
  std::string rule;              // how the verdict was reached
  std::vector<double> value;
  std::vector<double> error;     // quadrature error estimate per gamma
  std::vector<double> reference; // prediction per gamma, when there is one (else empty)
  Verdict verdict = Verdict::indeterminate;
};

struct SweepSection {
  std::string name;
  std::vector<Functional> functionals;
  Verdict verdict = Verdict::indeterminate;  // fail if any fails, else indeterminate if any is, else pass
};

struct SweepReport {
  std::vector<double> gamma;
  std::vector<double> lambda;
  std::vector<std::vector<double>> kappa_hat;  // [gamma][lambda]
  std::vector<SweepSection> sections;
  Verdict verdict() const;
};

/// 6 log-spaced points in [1e2, 1e8].
std::vector<double> default_gamma_grid();

/// last < first (by more than rounding) and the least-squares slope of log|value| against log gamma is negative (>= 5 points).
bool trend_down(const std::vector<double>& gamma, const std::vector<double>& value);
/// Least-squares slope of log|value| against log(log gamma).
double log_growth(const std::vector<double>& gamma, const std::vector<double>& value);
/// Functionals whose error exceeds 1% of |value| somewhere are indeterminate.
bool resolved(const Functional& f, double rel = 0.01);

struct VerifyOptions {
  QuadratureOptions quad{};
  EigenOptions eigen{};
  /// Growth in log gamma below this power counts as bounded.
  double bounded_log_power = 0.1;
};

/// (-1)^d int_0^1 G^d dm_gamma per gamma. Pass: trend down (strong: last < 10% of first, reported in rule).
SweepSection check_G_convergence(const ScalingFamily& fam, int d, const std::vector<double>& gamma_grid,
                                 const VerifyOptions& opt = {});

struct TestFunction {
  std::string name;
  std::function<double(double)> f;
};
/// int_0^1 f G^2_{m_gamma} dj_gamma per gamma and test function. f(0) = 1 must trend to 1,
/// f(0) = 0 must trend to 0. The f = 1 row carries N(g)/(u^2 v)(g), g = gamma^(alpha/2), as reference.
SweepSection check_kappa_delta(const ScalingFamily& fam, const std::vector<double>& gamma_grid,
                               const std::vector<TestFunction>& test_functions = {}, const VerifyOptions& opt = {});

/// int_0^1 x dj_gamma (bounded), j_gamma(1, inf) (to 0), int_1^inf |G_{m_gamma}| dj_gamma (to 0, with
/// the product-form prediction as reference).
SweepSection check_minor_conditions(const ScalingFamily& fam, const std::vector<double>& gamma_grid,
                                    const VerifyOptions& opt = {});

/// K^(d-alpha+1) int_1^gamma K^alpha/x dx / u^(d+1) (to 0) and, for alpha = 2,
/// v^-1 int_1^gamma L/x dx (bounded). Throws ParameterError for non-integer alpha.
SweepSection check_integer_alpha(const ScalingFamily& fam, int d, const std::vector<double>& gamma_grid,
                                 const SlowlyVarying& K, const SlowlyVarying& L, const VerifyOptions& opt = {});

/// kappa_hat(gamma, lambda) = -fluct_exponent / lambda^2. Pass: |kappa_hat - 1| trends down for every
/// lambda and the lambda-spread trends down.
SweepSection laplace_limit_report(const ScalingFamily& fam, const std::vector<double>& lambda_grid,
                                  const std::vector<double>& gamma_grid, SweepReport* table = nullptr,
                                  const VerifyOptions& opt = {});

struct SweepRequest {
  std::vector<double> gamma = default_gamma_grid();
  std::vector<double> lambda = {0.5, 1.0, 2.0};
  int d = 3;
  bool G_convergence = true;
  bool kappa_delta = true;
  bool minor = true;
  bool laplace = true;
  /// Integer-alpha checks need K and L.
  const SlowlyVarying* K = nullptr;
  const SlowlyVarying* L = nullptr;
};
SweepReport run_sweep(const ScalingFamily& fam, const SweepRequest& req, const VerifyOptions& opt = {});

}  // namespace krein
