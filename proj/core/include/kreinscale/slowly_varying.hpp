#pragma once

#include <functional>
#include <string>
#include <vector>

namespace krein {

/// A positive function on [x0, inf) meant to vary slowly at infinity.
class SlowlyVarying {
 public:
  using Fn = std::function<double(double)>;

  SlowlyVarying(Fn f, std::string description, double x0 = 1.0);

  static SlowlyVarying constant(double c);
  /// c (log x)^a on [e, inf).
  static SlowlyVarying log_power(double a, double c = 1.0);
  /// Piecewise linear in (log x, log y); the end slopes are continued outside the table.
  static SlowlyVarying tabulated(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double x0() const { return x0_; }
  const std::string& describe() const { return desc_; }

  SlowlyVarying operator*(const SlowlyVarying& other) const;
  SlowlyVarying pow(double p) const;
  SlowlyVarying scaled(double c) const;

  /// f(2x)/f(x) along x = from, 2 from, 4 from, ...
  std::vector<double> doubling_ratios(double from, int count) const;

 private:
  Fn f_;
  std::string desc_;
  double x0_;
};

/// Fixed point g = 1 / f(x g), i.e. the de Bruijn conjugate of f at x.
double de_bruijn_conjugate(const SlowlyVarying& f, double x, double rel_tol = 1e-8, int max_iter = 1000);

/// x -> de_bruijn_conjugate(f, x).
SlowlyVarying de_bruijn(const SlowlyVarying& f);

}  // namespace krein
