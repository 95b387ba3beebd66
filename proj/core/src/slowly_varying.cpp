#include "kreinscale/slowly_varying.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <memory>

#include "kreinscale/error.hpp"

namespace krein {

SlowlyVarying::SlowlyVarying(Fn f, std::string description, double x0)
    : f_(std::move(f)), desc_(std::move(description)), x0_(x0) {
  if (!f_) throw ParameterError("slowly varying: empty function");
  if (!(x0 > 0)) throw ParameterError("slowly varying: x0 must be positive");
}

SlowlyVarying SlowlyVarying::constant(double c) {
  if (!(c > 0)) throw ParameterError("slowly varying: constant must be positive");
  return SlowlyVarying([c](double) { return c; }, fmt::format("{}", c), 1e-300);
}

SlowlyVarying SlowlyVarying::log_power(double a, double c) {
  if (!(c > 0)) throw ParameterError("slowly varying: log-power prefactor must be positive");
  return SlowlyVarying([a, c](double x) { return c * std::pow(std::log(x), a); },
                       fmt::format("{}*(log x)^{}", c, a), std::exp(1.0));
}

SlowlyVarying SlowlyVarying::tabulated(std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("slowly varying: table needs >= 2 matching points");
  auto lx = std::make_shared<std::vector<double>>();
  auto ly = std::make_shared<std::vector<double>>();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw ParameterError("slowly varying: table entries must be positive");
    if (i > 0 && !(x[i] > x[i - 1])) throw ParameterError("slowly varying: table x must increase");
    lx->push_back(std::log(x[i]));
    ly->push_back(std::log(y[i]));
  }
  const double x0 = x.front();
  return SlowlyVarying(
      [lx, ly](double v) {
        const double t = std::log(v);
        const auto& X = *lx;
        const auto& Y = *ly;
        std::size_t k = std::upper_bound(X.begin(), X.end(), t) - X.begin();
        k = std::clamp<std::size_t>(k, 1, X.size() - 1);
        const double w = (t - X[k - 1]) / (X[k] - X[k - 1]);
        return std::exp(Y[k - 1] + w * (Y[k] - Y[k - 1]));
      },
      fmt::format("tabulated({} points)", x.size()), x0);
}

double SlowlyVarying::operator()(double x) const {
  if (!(x > 0)) throw DomainError(fmt::format("slowly varying {}: x must be positive", desc_));
  const double v = f_(x);
  if (!(v > 0) || !std::isfinite(v)) {
    throw DomainError(fmt::format("slowly varying {}: not positive at x = {}", desc_, x));
  }
  return v;
}

SlowlyVarying SlowlyVarying::operator*(const SlowlyVarying& other) const {
  auto a = f_;
  auto b = other.f_;
  return SlowlyVarying([a, b](double x) { return a(x) * b(x); }, fmt::format("({})*({})", desc_, other.desc_),
                       std::max(x0_, other.x0_));
}

SlowlyVarying SlowlyVarying::pow(double p) const {
  auto a = f_;
  return SlowlyVarying([a, p](double x) { return std::pow(a(x), p); }, fmt::format("({})^{}", desc_, p), x0_);
}

SlowlyVarying SlowlyVarying::scaled(double c) const {
  if (!(c > 0)) throw ParameterError("slowly varying: scale must be positive");
  auto a = f_;
  return SlowlyVarying([a, c](double x) { return c * a(x); }, fmt::format("{}*({})", c, desc_), x0_);
}

std::vector<double> SlowlyVarying::doubling_ratios(double from, int count) const {
  std::vector<double> out;
  double x = std::max(from, x0_);
  for (int i = 0; i < count; ++i, x *= 2.0) out.push_back((*this)(2.0 * x) / (*this)(x));
  return out;
}

double de_bruijn_conjugate(const SlowlyVarying& f, double x, double rel_tol, int max_iter) {
  if (!(x > 0)) throw DomainError("de Bruijn conjugate: x must be positive");
  double g = 1.0 / f(x);
  for (int it = 0; it < max_iter; ++it) {
    double next = 1.0 / f(x * g);
    // damp by geometric averaging once plain iteration has had its chance
    if (it >= 50) next = std::sqrt(next * g);
    if (std::abs(next - g) <= rel_tol * std::abs(g)) return next;
    g = next;
  }
  throw ConvergenceError(fmt::format("de Bruijn conjugate of {} at x = {} did not settle in {} iterations",
                                     f.describe(), x, max_iter));
}

SlowlyVarying de_bruijn(const SlowlyVarying& f) {
  return SlowlyVarying([f](double x) { return de_bruijn_conjugate(f, x); }, fmt::format("({})#", f.describe()),
                       f.x0());
}

}  // namespace krein
