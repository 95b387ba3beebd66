#include "kreinscale/jump_measure.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "kreinscale/error.hpp"
#include "kreinscale/grid.hpp"

namespace krein {

namespace {

// integral of x^(-p) over (x, 1]
double power_mass_to_one(double x, double p) {
  if (std::abs(p - 1.0) < 1e-14) return -std::log(x);
  return (std::pow(x, 1.0 - p) - 1.0) / (p - 1.0);
}

}  // namespace

PiecewisePowerJump::PiecewisePowerJump(double c1, double p1, double c2, double p2)
    : c1_(c1), p1_(p1), c2_(c2), p2_(p2) {
  if (!(c1 >= 0) || !(c2 >= 0) || !std::isfinite(c1) || !std::isfinite(c2)) {
    throw ParameterError("piecewise-power jump: coefficients must be nonnegative");
  }
  if (c2 > 0 && !(p2 > 1.0)) {
    throw ParameterError(fmt::format("piecewise-power jump: need p2 > 1 for a finite tail (got {})", p2));
  }
  if (!std::isfinite(p1)) throw ParameterError("piecewise-power jump: p1 must be finite");
}

double PiecewisePowerJump::density(double x) const {
  return x <= 1.0 ? c1_ * std::pow(x, -p1_) : c2_ * std::pow(x, -p2_);
}

double PiecewisePowerJump::tail(double x) const {
  const double upper = c2_ > 0 ? c2_ / (p2_ - 1.0) : 0.0;
  if (x >= 1.0) return c2_ > 0 ? c2_ * std::pow(x, 1.0 - p2_) / (p2_ - 1.0) : 0.0;
  if (x <= 0.0) {
    return p1_ >= 1.0 ? std::numeric_limits<double>::infinity() : upper + c1_ / (1.0 - p1_);
  }
  return upper + c1_ * power_mass_to_one(x, p1_);
}

std::optional<double> PiecewisePowerJump::tail_inverse(double y) const {
  const double upper = c2_ > 0 ? c2_ / (p2_ - 1.0) : 0.0;
  if (y <= upper) return std::pow(y * (p2_ - 1.0) / c2_, 1.0 / (1.0 - p2_));
  if (!(c1_ > 0)) return std::nullopt;
  const double r = (y - upper) / c1_;
  if (std::abs(p1_ - 1.0) < 1e-14) return std::exp(-r);
  const double base = 1.0 + (p1_ - 1.0) * r;
  if (!(base > 0)) return std::nullopt;
  return std::pow(base, 1.0 / (1.0 - p1_));
}

std::string PiecewisePowerJump::describe() const {
  return fmt::format("{}x^-{} on (0,1] + {}x^-{} on (1,inf)", c1_, p1_, c2_, p2_);
}

CustomJump::CustomJump(std::function<double(double)> density, Options options)
    : density_(std::move(density)), opt_(std::move(options)) {
  if (!density_) throw ParameterError("custom jump: density required");
}

double CustomJump::tail(double x) const {
  if (opt_.tail) return opt_.tail(x);
  if (x <= 0.0) return near_zero_exponent() >= 1.0 ? std::numeric_limits<double>::infinity()
                                                    : integrate_dx(density_, 0.0, INFINITY, opt_.breakpoints);
  return integrate_dx(density_, x, INFINITY, opt_.breakpoints);
}

SumJump::SumJump(std::shared_ptr<const JumpMeasureSpec> a, std::shared_ptr<const JumpMeasureSpec> b)
    : a_(std::move(a)), b_(std::move(b)) {}

double SumJump::density(double x) const { return a_->density(x) + b_->density(x); }
double SumJump::tail(double x) const { return a_->tail(x) + b_->tail(x); }

std::vector<double> SumJump::breakpoints() const {
  auto v = a_->breakpoints();
  auto w = b_->breakpoints();
  v.insert(v.end(), w.begin(), w.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

double SumJump::near_zero_exponent() const {
  return std::max(a_->near_zero_exponent(), b_->near_zero_exponent());
}

std::string SumJump::describe() const {
  return fmt::format("({}) + ({})", a_->describe(), b_->describe());
}

JumpMeasureSpec::JumpMeasureSpec(std::shared_ptr<const JumpModel> model, double a, double b)
    : model_(std::move(model)), a_(a), b_(b) {
  if (!model_) throw ParameterError("jump spec: null model");
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ParameterError("jump spec: scale factors must be positive and finite");
  }
}

JumpMeasureSpec JumpMeasureSpec::piecewise_power(double c1, double p1, double c2, double p2) {
  return JumpMeasureSpec(std::make_shared<PiecewisePowerJump>(c1, p1, c2, p2));
}

JumpMeasureSpec JumpMeasureSpec::custom(std::function<double(double)> density,
                                        CustomJump::Options options) {
  return JumpMeasureSpec(std::make_shared<CustomJump>(std::move(density), std::move(options)));
}

std::vector<double> JumpMeasureSpec::breakpoints() const {
  auto out = model_->breakpoints();
  for (double& v : out) v /= b_;
  return out;
}

double JumpMeasureSpec::tail_inverse(double y) const {
  if (!(y > 0)) throw ParameterError("tail_inverse: level must be positive");
  if (auto x = model_->tail_inverse(y / a_)) return *x / b_;
  double lo = -700.0;
  double hi = 700.0;
  if (tail(std::exp(lo)) <= y) return std::exp(lo);
  if (tail(std::exp(hi)) > y) return std::exp(hi);
  // Newton on log tail against log x, falling back to bisection outside the bracket
  const double ly = std::log(y);
  double u = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double x = std::exp(u), T = tail(x);
    if (T > y) lo = u; else hi = u;
    const double slope = -x * density(x) / T;
    double next = u - (std::log(T) - ly) / slope;
    if (!(slope < 0) || !std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (std::abs(next - u) < 1e-15 * std::max(1.0, std::abs(u))) return std::exp(next);
    u = next;
  }
  return std::exp(hi);
}

JumpMeasureSpec JumpMeasureSpec::operator+(const JumpMeasureSpec& other) const {
  return JumpMeasureSpec(std::make_shared<SumJump>(std::make_shared<JumpMeasureSpec>(*this),
                                                   std::make_shared<JumpMeasureSpec>(other)));
}

std::string JumpMeasureSpec::describe() const {
  if (a_ == 1.0 && b_ == 1.0) return model_->describe();
  return fmt::format("{} * j({} x, inf), j = {}", a_, b_, model_->describe());
}

}  // namespace krein
