#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kreinscale/bessel.hpp"
#include "kreinscale/error.hpp"
#include "kreinscale/jump_measure.hpp"
#include "kreinscale/levy.hpp"
#include "kreinscale/measure.hpp"
#include "kreinscale/simulate.hpp"
#include "kreinscale/string_spec.hpp"

namespace krein {

/// Malformed or invalid spec file; the message starts with "file:line:" when a line is known.
class SpecError : public ParameterError {
 public:
  SpecError(const std::string& what, std::string file, int line);
  const std::string& file() const noexcept { return file_; }
  int line() const noexcept { return line_; }

 private:
  std::string file_;
  int line_;
};

/// INI-style spec: `key = value` lines under `[section]` headers, `#` or `;` comments.
/// Every key that is read is marked; check_all_used() rejects the rest.
class SpecFile {
 public:
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
  };

  static SpecFile load(const std::string& path);
  static SpecFile parse(const std::string& text, const std::string& name = "<spec>");

  const std::string& name() const { return name_; }
  const std::vector<Entry>& entries() const { return entries_; }
  bool has_section(const std::string& section) const;
  std::vector<std::string> sections() const;

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::string text(const std::string& section, const std::string& key, const std::string& fallback) const;
  std::string required(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key, double fallback) const;
  double required_number(const std::string& section, const std::string& key) const;
  std::optional<double> optional_number(const std::string& section, const std::string& key) const;
  long long integer(const std::string& section, const std::string& key, long long fallback) const;
  bool flag(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key,
                              std::vector<double> fallback = {}) const;

  /// Sets or adds an entry (command-line overrides).
  void set(const std::string& section, const std::string& key, const std::string& value);

  /// Rejects sections not in `allowed_sections` and keys that were never read.
  void check_all_used(const std::set<std::string>& allowed_sections) const;

  /// Canonical `[section] key = value` text, sorted, without the excluded keys.
  std::string canonical(const std::set<std::string>& exclude_keys = {}) const;

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& msg) const;

 private:
  const Entry* find(const std::string& section, const std::string& key) const;

  std::string name_;
  std::vector<Entry> entries_;
  mutable std::set<std::pair<std::string, std::string>> used_;
};

/// 64-bit FNV-1a, stable across platforms.
std::uint64_t fnv1a64(const std::string& s);

/// [string] family = power | lebesgue | tabulated | bessel, plus optional value_scale / arg_scale.
StringSpec string_from_spec(const SpecFile& f, const std::string& section = "string");
/// [jump] family = piecewise-power | power | bessel, plus optional value_scale / arg_scale.
JumpMeasureSpec jump_from_spec(const SpecFile& f, const std::string& section = "jump");
/// [bessel] drift parameters (delta or alpha, s, x0, eta_bar, w_scale, calibrate).
BesselDriftSpec bessel_drift_from_spec(const SpecFile& f, const std::string& section = "bessel");
/// [family] kind = bessel (alpha, s, t, a, eps, c1) or kind = custom (alpha, u_power, u_const,
/// v_power, v_const) on top of [string] and [jump].
ScalingFamily family_from_spec(const SpecFile& f, const std::string& section = "family");
/// [sim] keys of SimConfig.
SimConfig sim_from_spec(const SpecFile& f, const std::string& section = "sim");
/// [quad] x_lo, panels_per_decade, nodes_per_panel, rel_tol, max_refinements.
QuadratureOptions quad_from_spec(const SpecFile& f, const std::string& section = "quad");

/// A [string] section with family = tabulated that samples m on `x` (ascending).
std::string tabulated_section(const StringSpec& m, const std::vector<double>& x, const std::string& section = "string");

}  // namespace krein
