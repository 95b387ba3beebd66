#pragma once

#include <functional>
#include <vector>

#include "kreinscale/eigen.hpp"
#include "kreinscale/jump_measure.hpp"
#include "kreinscale/slowly_varying.hpp"
#include "kreinscale/string_spec.hpp"

namespace krein {

/// b = integral of j(dx) int_0^x m(y, inf) dy.
double b_mean(const StringSpec& m, const JumpMeasureSpec& j, const QuadratureOptions& q = {});

/// chi(lambda) = integral of (1 - g_m(lambda; x)) j(dx).
double chi(const StringSpec& m, const JumpMeasureSpec& j, double lambda, const EigenOptions& opt = {});

/// Integral of (1 - g_m(lambda; x) + lambda G(x)) j(dx) with G(x) = int_0^x (m - m(inf)),
/// i.e. chi(lambda) - b lambda without the cancellation.
double compensated_chi(const StringSpec& m, const JumpMeasureSpec& j, double lambda, const EigenOptions& opt = {});

/// (m, j) rescaled along gamma with normalizers u, v.
class ScalingFamily {
 public:
  ScalingFamily(StringSpec m, JumpMeasureSpec j, double alpha, SlowlyVarying u, SlowlyVarying v);

  const StringSpec& m() const { return m_; }
  const JumpMeasureSpec& j() const { return j_; }
  double alpha() const { return alpha_; }
  const SlowlyVarying& u() const { return u_; }
  const SlowlyVarying& v() const { return v_; }

  /// gamma^(alpha/2)
  double space_scale(double gamma) const;
  /// gamma^((alpha-1)/2) / u(gamma^(alpha/2))
  double string_scale(double gamma) const;
  /// gamma / v(gamma^(alpha/2))
  double jump_scale(double gamma) const;

  StringSpec m_gamma(double gamma) const;
  JumpMeasureSpec j_gamma(double gamma) const;
  /// -integral of G_{m_gamma} dj_gamma over (0, inf) (m(inf) taken as 0).
  double b_gamma(double gamma, const QuadratureOptions& q = {}) const;

 private:
  StringSpec m_;
  JumpMeasureSpec j_;
  double alpha_;
  SlowlyVarying u_;
  SlowlyVarying v_;
};

/// chi_{m_gamma, j_gamma}(lambda) - b_gamma lambda.
double fluct_exponent(const ScalingFamily& fam, double gamma, double lambda, const EigenOptions& opt = {});

struct FluctReport {
  double value = 0.0;    // compensated integral on the rescaled string
  double route_b = 0.0;  // chi - b lambda on the base string at lambda / (sqrt(gamma) u)
  double chi = 0.0;
  double b_gamma = 0.0;
  double kappa_hat = 0.0;  // -value / lambda^2
  double rel_gap = 0.0;
};
FluctReport fluct_exponent_report(const ScalingFamily& fam, double gamma, double lambda,
                                  const EigenOptions& opt = {});

struct UVPair {
  SlowlyVarying u;
  SlowlyVarying v;
  std::vector<double> grid;   // verification points
  std::vector<double> ratio;  // u^2 v / N on the grid
};

/// u = S^(p/2) K and v = S^(1-p) L with S = N / (K^2 L), checked on `grid`
/// (default 10^2 .. 10^12).
UVPair construct_uv(const std::function<double(double)>& N, const SlowlyVarying& K, const SlowlyVarying& L,
                    double p = 0.5, std::vector<double> grid = {});
/// Same with N(gamma) computed by quadrature and tabulated on the grid.
UVPair construct_uv(const StringSpec& m, const JumpMeasureSpec& j, double alpha, const SlowlyVarying& K,
                    const SlowlyVarying& L, double p = 0.5, std::vector<double> grid = {});

/// s^-2 / U#(s^2) * v(s^alpha U#(s^2)^(alpha/2)) with U(s) = u(s^(alpha/2)).
double tail_estimate(const ScalingFamily& fam, double s);

}  // namespace krein
