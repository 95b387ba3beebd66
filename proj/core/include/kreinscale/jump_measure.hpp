#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace krein {

/// A jumping-in measure j on (0, inf) given by a density and its tail j(x, inf).
class JumpModel {
 public:
  virtual ~JumpModel() = default;
  virtual double density(double x) const = 0;
  /// j(x, inf).
  virtual double tail(double x) const = 0;
  virtual std::vector<double> breakpoints() const { return {}; }
  /// Closed-form inverse of the tail when one exists.
  virtual std::optional<double> tail_inverse(double) const { return std::nullopt; }
  /// p such that density ~ x^(-p) as x -> 0; p >= 1 means j(0,1) = inf.
  virtual double near_zero_exponent() const = 0;
  virtual std::string family() const = 0;
  virtual std::string describe() const = 0;
};

/// Density c1 x^(-p1) on (0,1] and c2 x^(-p2) on (1, inf).
class PiecewisePowerJump final : public JumpModel {
 public:
  PiecewisePowerJump(double c1, double p1, double c2, double p2);
  double density(double x) const override;
  double tail(double x) const override;
  std::vector<double> breakpoints() const override { return {1.0}; }
  std::optional<double> tail_inverse(double y) const override;
  double near_zero_exponent() const override { return p1_; }
  std::string family() const override { return "piecewise-power"; }
  std::string describe() const override;
  double c1() const { return c1_; }
  double p1() const { return p1_; }
  double c2() const { return c2_; }
  double p2() const { return p2_; }

 private:
  double c1_, p1_, c2_, p2_;
};

/// User-supplied density; the tail falls back to quadrature when not given.
class CustomJump final : public JumpModel {
 public:
  struct Options {
    std::function<double(double)> tail;
    double near_zero_exponent = 2.0;
    std::vector<double> breakpoints;
    std::string name = "custom";
  };
  CustomJump(std::function<double(double)> density, Options options);
  double density(double x) const override { return density_(x); }
  double tail(double x) const override;
  std::vector<double> breakpoints() const override { return opt_.breakpoints; }
  double near_zero_exponent() const override { return opt_.near_zero_exponent; }
  std::string family() const override { return "custom"; }
  std::string describe() const override { return opt_.name; }

 private:
  std::function<double(double)> density_;
  Options opt_;
};

class JumpMeasureSpec;

/// Sum of two jump measures.
class SumJump final : public JumpModel {
 public:
  SumJump(std::shared_ptr<const JumpMeasureSpec> a, std::shared_ptr<const JumpMeasureSpec> b);
  double density(double x) const override;
  double tail(double x) const override;
  std::vector<double> breakpoints() const override;
  double near_zero_exponent() const override;
  std::string family() const override { return "sum"; }
  std::string describe() const override;

 private:
  std::shared_ptr<const JumpMeasureSpec> a_, b_;
};

/// Value handle with rescaling on tails: j'(x, inf) = a * j(b x, inf).
class JumpMeasureSpec {
 public:
  explicit JumpMeasureSpec(std::shared_ptr<const JumpModel> model, double a = 1.0, double b = 1.0);

  static JumpMeasureSpec piecewise_power(double c1, double p1, double c2, double p2);
  /// Density c x^(-p) on all of (0, inf).
  static JumpMeasureSpec power(double c, double p) { return piecewise_power(c, p, c, p); }
  static JumpMeasureSpec custom(std::function<double(double)> density, CustomJump::Options options);

  double density(double x) const { return a_ * b_ * model_->density(b_ * x); }
  double tail(double x) const { return a_ * model_->tail(b_ * x); }
  /// j(x, y].
  double mass(double x, double y) const { return tail(x) - tail(y); }
  std::vector<double> breakpoints() const;
  double near_zero_exponent() const { return model_->near_zero_exponent(); }
  bool infinite_near_zero() const { return near_zero_exponent() >= 1.0; }
  /// Smallest x with tail(x) <= y, by bisection in log x.
  double tail_inverse(double y) const;

  JumpMeasureSpec scaled(double a, double b) const { return JumpMeasureSpec(model_, a_ * a, b_ * b); }
  JumpMeasureSpec operator+(const JumpMeasureSpec& other) const;
  double value_scale() const { return a_; }
  double arg_scale() const { return b_; }
  const JumpModel& model() const { return *model_; }
  std::string family() const { return model_->family(); }
  std::string describe() const;

 private:
  std::shared_ptr<const JumpModel> model_;
  double a_;
  double b_;
};

}  // namespace krein
