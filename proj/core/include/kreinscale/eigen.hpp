#pragma once

#include <optional>
#include <vector>

#include "kreinscale/measure.hpp"

namespace krein {

/// A truncated-series value with a certified bound on the omitted tail.
struct EigenEval {
  double value = 0.0;
  double derivative_plus = 0.0;
  double truncation_bound = 0.0;
  int terms_used = 0;
};

struct EigenOptions {
  QuadratureOptions quad{};
  /// Picard iteration stops once the certified tail is below rel_tol times the partial sum.
  double rel_tol = 1e-14;
  int max_terms = 100000;
  /// The far cutoff is placed where the WKB exponent reaches this value.
  double growth_exponent = 45.0;
  /// Hard ceiling on the far cutoff (psi * psi+ >= x there).
  double x_ceiling = 1e36;
  /// Order of phi^d; defaults to the smallest admissible order >= 1.
  std::optional<int> d;
  /// Largest x where phi^d is needed (besides x <= 1 and the small-x split).
  double phi_limit = 1.0;
  /// Points that must be panel edges (query points, kinks of an integrating measure).
  std::vector<double> breakpoints;
  /// Skip g, phi^d and c^d (needed for lambda < 0).
  bool psi_only = false;
};

/// psi, psi+, g, phi^d and c^d of one string at one lambda, tabulated on a grid.
class EigenProfile {
 public:
  EigenProfile(const StringSpec& m, double lambda, EigenOptions options = {});

  double lambda() const { return lambda_; }
  int d() const { return d_; }
  const SampledString& sampled() const { return s_; }
  const QuadratureGrid& grid() const { return s_.grid; }
  /// The far cutoff; beyond it g is bounded by its value there.
  double x_far() const { return s_.grid.x_hi(); }
  /// Where lambda (m.s)(x) reaches 1/2; phi^d is tabulated at least up to here.
  double x_split() const { return x_split_; }
  double c() const { return c_; }
  double c_bound() const { return c_bound_; }
  /// Tail of the integral of psi^-2 beyond the cutoff.
  double far_tail_bound() const { return far_tail_bound_; }

  EigenEval psi(double x) const;
  EigenEval g(double x) const;
  EigenEval phi(double x) const;
  /// g psi+ - g+ psi with g+ taken from phi^d+ - c psi+.
  double wronskian(double x) const;

  // Node tables on grid().
  const std::vector<double>& psi_nodes() const { return psi_; }
  const std::vector<double>& psi_plus_nodes() const { return psi_plus_; }
  const std::vector<double>& g_nodes() const { return g_; }
  const std::vector<double>& phi_nodes() const { return phi_; }
  const GSequence& G() const { return G_; }
  /// 1 - g without cancellation near 0.
  std::vector<double> one_minus_g_nodes() const;
  /// 1 - g + lambda G_m without cancellation near 0.
  std::vector<double> fluctuation_nodes() const;
  /// G_m(x) = integral of m - m(inf) over (0, x] (plain m when m(inf) is infinite).
  std::vector<double> G_m_nodes() const;
  /// Integral of y dm over (0, x] at the nodes.
  const std::vector<double>& ms_nodes() const { return ms_; }

 private:
  void run_psi(const EigenOptions& opt);
  void run_g();
  void run_phi(const EigenOptions& opt);
  void run_c();
  double interp(const std::vector<double>& v, double x) const { return s_.grid.interpolate(v, x); }
  std::vector<double> stable_form(bool compensated) const;

  StringSpec m_;
  double lambda_;
  int d_ = 1;
  double m1_ = 0.0;
  double m_ref_ = 0.0;
  SampledString s_;
  std::vector<double> ms_;
  std::vector<double> psi_, psi_plus_, psi_bound_, psi_plus_bound_;
  std::vector<int> psi_terms_;
  std::vector<double> g_, g_bound_;
  GSequence G_;
  std::vector<double> w_, w_plus_, phi_, phi_plus_, phi_bound_;
  std::vector<int> phi_terms_;
  double x_split_ = 0.0;
  double x_phi_ = 1.0;
  double c_ = 0.0;
  double c_bound_ = 0.0;
  double c_noise_ = 0.0;
  double far_tail_bound_ = 0.0;
};

EigenEval psi(const StringSpec& m, double lambda, double x, const EigenOptions& opt = {});
EigenEval g(const StringSpec& m, double lambda, double x, const EigenOptions& opt = {});
EigenEval phi_d(const StringSpec& m, int d, double lambda, double x, const EigenOptions& opt = {});
double c_d(const StringSpec& m, int d, double lambda, const EigenOptions& opt = {});
double wronskian(const StringSpec& m, double lambda, double x, const EigenOptions& opt = {});

struct ScalingResiduals {
  double g_residual = 0.0;
  double psi_residual = 0.0;
  double g_bound = 0.0;
  double psi_bound = 0.0;
};
/// g_m(a lambda; b x) - g_{a m(b .)}(b lambda; x) and psi_m(a lambda; b x) - b psi_{a m(b .)}(b lambda; x).
ScalingResiduals scaling_identity_check(const StringSpec& m, double a, double b, double lambda, double x,
                                        const EigenOptions& opt = {});

}  // namespace krein
