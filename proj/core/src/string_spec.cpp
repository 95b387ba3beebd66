#include "kreinscale/string_spec.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "kreinscale/error.hpp"

namespace krein {

PowerString::PowerString(double theta, double c) : theta_(theta), c_(c) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw ParameterError(fmt::format(
        "power string: theta must lie in (0, 1) so that x dm is integrable at 0 (got {})", theta));
  }
  if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("power string: c must be positive");
}

double PowerString::value(double x) const { return -c_ * std::pow(x, -theta_); }

double PowerString::density(double x) const { return c_ * theta_ * std::pow(x, -theta_ - 1.0); }

std::optional<double> PowerString::integral(double x) const {
  return -c_ * std::pow(x, 1.0 - theta_) / (1.0 - theta_);
}

std::string PowerString::describe() const {
  return fmt::format("power(theta={}, c={})", theta_, c_);
}

LebesgueString::LebesgueString(double rho) : rho_(rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ParameterError("lebesgue string: rho must be positive");
  }
}

std::optional<double> LebesgueString::integral(double x) const {
  return -x + rho_ * (0.5 * x * x - x);
}

std::string LebesgueString::describe() const { return fmt::format("lebesgue(rho={})", rho_); }

TabulatedString::TabulatedString(std::vector<double> x, std::vector<double> m)
    : x_(std::move(x)), m_(std::move(m)) {
  if (x_.empty() || x_.size() != m_.size()) {
    throw ParameterError("tabulated string: need equally many (>=1) breakpoints and values");
  }
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!(x_[i] > 0.0) || !std::isfinite(x_[i]) || !std::isfinite(m_[i])) {
      throw ParameterError(fmt::format("tabulated string: bad entry {} ({}, {})", i, x_[i], m_[i]));
    }
    if (i > 0 && !(x_[i] > x_[i - 1])) {
      throw ParameterError(fmt::format("tabulated string: breakpoints not increasing at entry {}", i));
    }
    if (i > 0 && m_[i] < m_[i - 1]) {
      throw ParameterError(fmt::format("tabulated string: values decrease at entry {}", i));
    }
  }
}

double TabulatedString::value(double x) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  if (it == x_.begin()) return m_.front();
  return m_[static_cast<std::size_t>(it - x_.begin()) - 1];
}

std::vector<Atom> TabulatedString::atoms() const {
  std::vector<Atom> out;
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (m_[i] > m_[i - 1]) out.push_back({x_[i], m_[i] - m_[i - 1]});
  }
  return out;
}

std::optional<double> TabulatedString::integral(double x) const {
  double s = 0.0;
  double left = 0.0;
  double level = m_.front();
  for (std::size_t i = 0; i < x_.size() && x_[i] < x; ++i) {
    s += level * (x_[i] - left);
    left = x_[i];
    level = m_[i];
  }
  return s + level * (x - left);
}

std::string TabulatedString::describe() const {
  return fmt::format("tabulated({} points on [{}, {}])", x_.size(), x_.front(), x_.back());
}

CustomString::CustomString(std::function<double(double)> m, std::function<double(double)> dm,
                           Options options)
    : m_(std::move(m)), dm_(std::move(dm)), opt_(std::move(options)) {
  if (!m_ || !dm_) throw ParameterError("custom string: m and m' must both be given");
}

StringSpec::StringSpec(std::shared_ptr<const StringModel> model, double a, double b)
    : model_(std::move(model)), a_(a), b_(b) {
  if (!model_) throw ParameterError("string spec: null model");
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ParameterError("string spec: scale factors must be positive and finite");
  }
}

StringSpec StringSpec::power(double theta, double c) {
  return StringSpec(std::make_shared<PowerString>(theta, c));
}

StringSpec StringSpec::lebesgue(double rho) {
  return StringSpec(std::make_shared<LebesgueString>(rho));
}

StringSpec StringSpec::tabulated(std::vector<double> x, std::vector<double> m) {
  return StringSpec(std::make_shared<TabulatedString>(std::move(x), std::move(m)));
}

StringSpec StringSpec::custom(std::function<double(double)> m, std::function<double(double)> dm,
                              CustomString::Options options) {
  return StringSpec(std::make_shared<CustomString>(std::move(m), std::move(dm), std::move(options)));
}

double StringSpec::operator()(double x) const {
  if (!(x > 0.0)) throw DomainError(fmt::format("m(x) needs x > 0 (got {})", x));
  return value(x);
}

std::vector<Atom> StringSpec::atoms() const {
  auto out = model_->atoms();
  for (auto& a : out) {
    a.x /= b_;
    a.mass *= a_;
  }
  return out;
}

std::vector<double> StringSpec::breakpoints() const {
  auto out = model_->breakpoints();
  for (double& v : out) v /= b_;
  return out;
}

std::optional<double> StringSpec::m_infinity() const {
  const auto v = model_->m_infinity();
  if (!v) return std::nullopt;
  return a_ * *v;
}

std::optional<double> StringSpec::integral(double x) const {
  const auto v = model_->integral(b_ * x);
  if (!v) return std::nullopt;
  return a_ / b_ * *v;
}

double StringSpec::tail(double x) const {
  const auto inf = m_infinity();
  if (!inf) return std::numeric_limits<double>::infinity();
  return *inf - value(x);
}

std::string StringSpec::describe() const {
  if (a_ == 1.0 && b_ == 1.0) return model_->describe();
  return fmt::format("{} * m({} x), m = {}", a_, b_, model_->describe());
}

double eval_m(const StringSpec& spec, double x) { return spec(x); }

}  // namespace krein
