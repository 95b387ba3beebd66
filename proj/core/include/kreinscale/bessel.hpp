#pragma once

#include <memory>
#include <vector>

#include "kreinscale/jump_measure.hpp"
#include "kreinscale/levy.hpp"
#include "kreinscale/slowly_varying.hpp"
#include "kreinscale/string_spec.hpp"

namespace krein {

/// Drift b(x) = (delta - 1 + eps(x)) / x with eps(x) = (s - 1) / log x beyond x0.
/// W(x) = w_scale e^eta_bar x^(delta-1) l(x), l(x) = (log x / log x0)^(s-1) for x > x0 and 1 below.
struct BesselDriftSpec {
  double delta = -5.0;
  double s = 1.0;
  double x0 = 2.718281828459045;
  double eta_bar = 0.0;
  double w_scale = 1.0;

  /// Index of the induced string tail: m(x, inf) ~ x^(1/alpha - 1).
  double alpha() const { return 1.0 - 0.5 * delta; }
  /// Effective constant in front of x^(delta-1) l(x).
  double w() const;
  void validate() const;

  /// delta = 2 - 2 alpha with w_scale chosen so that K(x) -> (log x)^((s-1)/alpha).
  static BesselDriftSpec from_alpha(double alpha, double s = 1.0, double x0 = 2.718281828459045);
  /// The w_scale for which K(x) -> (log x)^((s-1)/alpha).
  static double calibrated_w_scale(double alpha, double s, double x0);
};

double drift_W(const BesselDriftSpec& spec, double x);

/// m(x) = -2 int_y^inf W with y = s~^-1(x), s~(y) = int_0^y dy / W (so m(inf) = 0).
class BesselString final : public StringModel {
 public:
  explicit BesselString(BesselDriftSpec spec);

  double value(double x) const override;
  double density(double x) const override;
  std::vector<double> breakpoints() const override;
  std::optional<double> m_infinity() const override { return 0.0; }
  double limit_at_zero() const override { return -std::numeric_limits<double>::infinity(); }
  std::string family() const override { return "bessel"; }
  std::string describe() const override;

  const BesselDriftSpec& drift() const { return spec_; }
  /// s~(y) and its inverse.
  double scale(double y) const;
  double scale_inverse(double x) const;
  /// 2 int_y^inf W.
  double upper_tail(double y) const;

  struct Table;

 private:
  BesselDriftSpec spec_;
  std::shared_ptr<const Table> table_;
};

StringSpec natural_scale_string(const BesselDriftSpec& spec);

/// Slowly varying part of the induced tail: m(x, inf) ~ x^(1/alpha-1) K(x) / (alpha-1).
SlowlyVarying bessel_K(const BesselDriftSpec& spec);

/// Density (2/alpha) x^(-a-1) on (0,1] and (2/alpha) min(x^(-a-1), (log x)^(t-1) x^(-2/alpha-1)) beyond.
class BesselJump final : public JumpModel {
 public:
  BesselJump(double alpha, double a, double t);
  double density(double x) const override;
  double tail(double x) const override;
  std::vector<double> breakpoints() const override { return breaks_; }
  double near_zero_exponent() const override { return a_ + 1.0; }
  std::string family() const override { return "bessel"; }
  std::string describe() const override;

  struct Table;

 private:
  double alpha_, a_, t_;
  std::vector<double> breaks_;
  std::shared_ptr<const Table> table_;
};

/// j(x, inf) ~ x^(-2/alpha) L(x) with L = (log x)^(t-1).
JumpMeasureSpec example_jump_measure(double alpha, double a, double t);
SlowlyVarying bessel_L(double t);

/// C with N(gamma) ~ C (log gamma)^e, e = 2(s-1)/alpha + t (alpha > 2) or s + t (alpha = 2).
double N_asymptotic_constant(double alpha, double s, double t);
double N_log_exponent(double alpha, double s, double t);

struct BesselUVOptions {
  double eps = 0.5;
  /// c1 c2 = C; by default c1 = c2 = sqrt(C).
  std::optional<double> c1;
};
/// u = sqrt(c1) (log)^((s-1)/alpha + eps/2), v = c2 (log)^(t - eps) for alpha > 2;
/// u = sqrt(c1) (log)^(s/2), v = c2 (log)^t for alpha = 2.
UVPair bessel_uv(double alpha, double s, double t, const BesselUVOptions& opt = {});

struct BesselFamilyParams {
  double alpha = 3.5;
  double s = 1.0;
  double t = 1.0;
  double a = 0.25;
  BesselUVOptions uv{};
};
ScalingFamily bessel_family(const BesselFamilyParams& p);

}  // namespace krein
