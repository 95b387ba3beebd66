#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace krein {

/// Point mass of a Stieltjes measure.
struct Atom {
  double x;
  double mass;
};

/// A non-decreasing right-continuous function m on (0, inf), i.e. a speed measure dm.
class StringModel {
 public:
  virtual ~StringModel() = default;

  virtual double value(double x) const = 0;
  /// Density of the absolutely continuous part of dm.
  virtual double density(double x) const = 0;
  virtual std::vector<Atom> atoms() const { return {}; }
  /// Points where m or m' is not smooth; used as panel edges.
  virtual std::vector<double> breakpoints() const { return {}; }
  /// m(inf) when finite, otherwise nullopt.
  virtual std::optional<double> m_infinity() const = 0;
  /// m(0+), -inf when singular.
  virtual double limit_at_zero() const = 0;
  /// Closed form of the integral of m over (0, x], if known.
  virtual std::optional<double> integral(double) const { return std::nullopt; }
  virtual std::string family() const = 0;
  virtual std::string describe() const = 0;
};

/// m(x) = -c x^(-theta), 0 < theta < 1.
class PowerString final : public StringModel {
 public:
  PowerString(double theta, double c);
  double value(double x) const override;
  double density(double x) const override;
  std::optional<double> m_infinity() const override { return 0.0; }
  double limit_at_zero() const override { return -std::numeric_limits<double>::infinity(); }
  std::optional<double> integral(double x) const override;
  std::string family() const override { return "power"; }
  std::string describe() const override;
  double theta() const { return theta_; }
  double c() const { return c_; }

 private:
  double theta_;
  double c_;
};

/// dm = rho dx, pinned at m(1) = -1.
class LebesgueString final : public StringModel {
 public:
  explicit LebesgueString(double rho);
  double value(double x) const override { return -1.0 + rho_ * (x - 1.0); }
  double density(double) const override { return rho_; }
  std::optional<double> m_infinity() const override { return std::nullopt; }
  double limit_at_zero() const override { return -1.0 - rho_; }
  std::optional<double> integral(double x) const override;
  std::string family() const override { return "lebesgue"; }
  std::string describe() const override;
  double rho() const { return rho_; }

 private:
  double rho_;
};

/// Right-continuous step function: m = m_i on [x_i, x_{i+1}), m = m_0 below x_0.
class TabulatedString final : public StringModel {
 public:
  TabulatedString(std::vector<double> x, std::vector<double> m);
  double value(double x) const override;
  double density(double) const override { return 0.0; }
  std::vector<Atom> atoms() const override;
  std::vector<double> breakpoints() const override { return x_; }
  std::optional<double> m_infinity() const override { return m_.back(); }
  double limit_at_zero() const override { return m_.front(); }
  std::optional<double> integral(double x) const override;
  std::string family() const override { return "tabulated"; }
  std::string describe() const override;
  const std::vector<double>& nodes() const { return x_; }
  const std::vector<double>& values() const { return m_; }

 private:
  std::vector<double> x_;
  std::vector<double> m_;
};

/// User-supplied m and m'.
class CustomString final : public StringModel {
 public:
  struct Options {
    std::optional<double> m_infinity;
    double limit_at_zero = -std::numeric_limits<double>::infinity();
    std::vector<double> breakpoints;
    std::string name = "custom";
  };
  CustomString(std::function<double(double)> m, std::function<double(double)> dm, Options options);
  double value(double x) const override { return m_(x); }
  double density(double x) const override { return dm_(x); }
  std::vector<double> breakpoints() const override { return opt_.breakpoints; }
  std::optional<double> m_infinity() const override { return opt_.m_infinity; }
  double limit_at_zero() const override { return opt_.limit_at_zero; }
  std::string family() const override { return "custom"; }
  std::string describe() const override { return opt_.name; }

 private:
  std::function<double(double)> m_;
  std::function<double(double)> dm_;
  Options opt_;
};

/// Value handle on a string model with an affine rescaling: m(x) = a * base(b x).
class StringSpec {
 public:
  explicit StringSpec(std::shared_ptr<const StringModel> model, double a = 1.0, double b = 1.0);

  static StringSpec power(double theta, double c = 1.0);
  static StringSpec lebesgue(double rho);
  static StringSpec tabulated(std::vector<double> x, std::vector<double> m);
  static StringSpec custom(std::function<double(double)> m, std::function<double(double)> dm,
                           CustomString::Options options = {});

  /// m(x); throws DomainError for x <= 0.
  double operator()(double x) const;
  double value(double x) const { return a_ * model_->value(b_ * x); }
  double density(double x) const { return a_ * b_ * model_->density(b_ * x); }
  std::vector<Atom> atoms() const;
  std::vector<double> breakpoints() const;
  std::optional<double> m_infinity() const;
  double limit_at_zero() const { return a_ * model_->limit_at_zero(); }
  bool singular_at_zero() const { return !std::isfinite(limit_at_zero()); }
  /// Closed-form integral of m over (0, x] if the model has one.
  std::optional<double> integral(double x) const;
  /// m(inf) - m(x) for finite tails.
  double tail(double x) const;

  /// x -> a m(b x).
  StringSpec scaled(double a, double b) const { return StringSpec(model_, a_ * a, b_ * b); }
  double value_scale() const { return a_; }
  double arg_scale() const { return b_; }
  const StringModel& model() const { return *model_; }
  std::shared_ptr<const StringModel> model_ptr() const { return model_; }
  std::string family() const { return model_->family(); }
  std::string describe() const;

 private:
  std::shared_ptr<const StringModel> model_;
  double a_;
  double b_;
};

double eval_m(const StringSpec& spec, double x);

}  // namespace krein
