#include "kreinscale/spec_io.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace krein {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && errno != ERANGE;
}

std::string where(const std::string& file, int line) {
  return line > 0 ? fmt::format("{}:{}: ", file, line) : fmt::format("{}: ", file);
}

}  // namespace

SpecError::SpecError(const std::string& what, std::string file, int line)
    : ParameterError(where(file, line) + what), file_(std::move(file)), line_(line) {}

SpecFile SpecFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file", path, 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

SpecFile SpecFile::parse(const std::string& text, const std::string& name) {
  // syntax (section headers, key = value, duplicate keys) is checked by the property tree reader
  {
    boost::property_tree::ptree pt;
    std::istringstream in(text);
    try {
      boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw SpecError(e.message(), name, static_cast<int>(e.line()));
    }
  }
  SpecFile f;
  f.name_ = name;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s[0] == '[') {
      section = trim(s.substr(1, s.find(']') - 1));
      f.entries_.push_back({section, "", "", line});
      continue;
    }
    const auto eq = s.find('=');
    const std::string key = trim(s.substr(0, eq));
    if (section.empty()) throw SpecError(fmt::format("key '{}' outside any [section]", key), name, line);
    f.entries_.push_back({section, key, trim(s.substr(eq + 1)), line});
  }
  return f;
}

bool SpecFile::has_section(const std::string& section) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.section == section; });
}

std::vector<std::string> SpecFile::sections() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.key.empty() && std::find(out.begin(), out.end(), e.section) == out.end()) out.push_back(e.section);
  }
  return out;
}

const SpecFile::Entry* SpecFile::find(const std::string& section, const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.section == section && e.key == key && !key.empty()) return &e;
  }
  return nullptr;
}

void SpecFile::fail(const std::string& section, const std::string& key, const std::string& msg) const {
  int line = 0;
  if (const auto* e = find(section, key)) {
    line = e->line;
  } else {
    for (const auto& e2 : entries_) {
      if (e2.section == section && e2.key.empty()) line = e2.line;
    }
  }
  throw SpecError(key.empty() ? fmt::format("[{}] {}", section, msg) : fmt::format("[{}] {}: {}", section, key, msg),
                  name_, line);
}

std::optional<std::string> SpecFile::get(const std::string& section, const std::string& key) const {
  const auto* e = find(section, key);
  if (!e) return std::nullopt;
  used_.insert({section, key});
  return e->value;
}

std::string SpecFile::text(const std::string& section, const std::string& key, const std::string& fallback) const {
  return get(section, key).value_or(fallback);
}

std::string SpecFile::required(const std::string& section, const std::string& key) const {
  auto v = get(section, key);
  if (!v) fail(section, key, "required key is missing");
  return *v;
}

std::optional<double> SpecFile::optional_number(const std::string& section, const std::string& key) const {
  const auto v = get(section, key);
  if (!v) return std::nullopt;
  double x;
  if (!parse_double(*v, x)) fail(section, key, fmt::format("expected a number, got '{}'", *v));
  return x;
}

double SpecFile::number(const std::string& section, const std::string& key, double fallback) const {
  return optional_number(section, key).value_or(fallback);
}

double SpecFile::required_number(const std::string& section, const std::string& key) const {
  const auto v = optional_number(section, key);
  if (!v) fail(section, key, "required key is missing");
  return *v;
}

long long SpecFile::integer(const std::string& section, const std::string& key, long long fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  const std::string t = trim(*v);
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
    fail(section, key, fmt::format("expected an integer, got '{}'", *v));
  return x;
}

bool SpecFile::flag(const std::string& section, const std::string& key, bool fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  const std::string t = lower(trim(*v));
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  fail(section, key, fmt::format("expected true or false, got '{}'", *v));
}

std::vector<double> SpecFile::numbers(const std::string& section, const std::string& key,
                                      std::vector<double> fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  std::vector<double> out;
  std::string item;
  std::string s = *v;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  while (in >> item) {
    double x;
    if (!parse_double(item, x)) fail(section, key, fmt::format("expected a list of numbers, got '{}'", item));
    out.push_back(x);
  }
  if (out.empty()) fail(section, key, "empty list");
  return out;
}

void SpecFile::set(const std::string& section, const std::string& key, const std::string& value) {
  for (auto& e : entries_) {
    if (e.section == section && e.key == key) {
      e.value = value;
      e.line = 0;
      return;
    }
  }
  if (!has_section(section)) entries_.push_back({section, "", "", 0});
  entries_.push_back({section, key, value, 0});
}

void SpecFile::check_all_used(const std::set<std::string>& allowed_sections) const {
  for (const auto& e : entries_) {
    if (!allowed_sections.count(e.section)) throw SpecError(fmt::format("unknown section [{}]", e.section), name_, e.line);
    if (!e.key.empty() && !used_.count({e.section, e.key}))
      throw SpecError(fmt::format("[{}] unknown key '{}'", e.section, e.key), name_, e.line);
  }
}

std::string SpecFile::canonical(const std::set<std::string>& exclude_keys) const {
  std::map<std::pair<std::string, std::string>, std::string> sorted;
  for (const auto& e : entries_) {
    if (!e.key.empty() && !exclude_keys.count(e.key)) sorted[{e.section, e.key}] = e.value;
  }
  std::string out;
  for (const auto& [k, v] : sorted) out += fmt::format("[{}] {} = {}\n", k.first, k.second, v);
  return out;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------

BesselDriftSpec bessel_drift_from_spec(const SpecFile& f, const std::string& section) {
  const auto alpha = f.optional_number(section, "alpha");
  const auto delta = f.optional_number(section, "delta");
  if (alpha && delta) f.fail(section, "delta", "give either alpha or delta, not both");
  const double s = f.number(section, "s", 1.0);
  const double x0 = f.number(section, "x0", std::numbers::e);
  const auto w_scale = f.optional_number(section, "w_scale");
  BesselDriftSpec d;
  try {
    if (alpha) {
      d = BesselDriftSpec::from_alpha(*alpha, s, x0);
      if (!f.flag(section, "calibrate", true)) d.w_scale = 1.0;
    } else {
      d.delta = delta.value_or(d.delta);
      d.s = s;
      d.x0 = x0;
      if (f.flag(section, "calibrate", false)) d.w_scale = BesselDriftSpec::calibrated_w_scale(d.alpha(), s, x0);
    }
    if (w_scale) d.w_scale = *w_scale;
    d.eta_bar = f.number(section, "eta_bar", 0.0);
    d.validate();
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    f.fail(section, alpha ? "alpha" : "delta", e.what());
  }
  return d;
}

StringSpec string_from_spec(const SpecFile& f, const std::string& section) {
  if (!f.has_section(section)) f.fail(section, "", "section is missing");
  const std::string fam = lower(f.required(section, "family"));
  const double a = f.number(section, "value_scale", 1.0);
  const double b = f.number(section, "arg_scale", 1.0);
  try {
    StringSpec m = [&] {
      if (fam == "power") return StringSpec::power(f.required_number(section, "theta"), f.number(section, "c", 1.0));
      if (fam == "lebesgue") return StringSpec::lebesgue(f.required_number(section, "rho"));
      if (fam == "tabulated") {
        if (!f.get(section, "x")) f.fail(section, "x", "required key is missing");
        if (!f.get(section, "m")) f.fail(section, "m", "required key is missing");
        return StringSpec::tabulated(f.numbers(section, "x"), f.numbers(section, "m"));
      }
      if (fam == "bessel") return natural_scale_string(bessel_drift_from_spec(f, section));
      f.fail(section, "family", fmt::format("unknown string family '{}' (power, lebesgue, tabulated, bessel)", fam));
    }();
    if (a != 1.0 || b != 1.0) m = m.scaled(a, b);
    return m;
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    f.fail(section, "family", e.what());
  }
}

JumpMeasureSpec jump_from_spec(const SpecFile& f, const std::string& section) {
  if (!f.has_section(section)) f.fail(section, "", "section is missing");
  const std::string fam = lower(f.required(section, "family"));
  const double a = f.number(section, "value_scale", 1.0);
  const double b = f.number(section, "arg_scale", 1.0);
  try {
    JumpMeasureSpec j = [&] {
      if (fam == "piecewise-power")
        return JumpMeasureSpec::piecewise_power(f.required_number(section, "c1"), f.required_number(section, "p1"),
                                                f.required_number(section, "c2"), f.required_number(section, "p2"));
      if (fam == "power") return JumpMeasureSpec::power(f.required_number(section, "c"), f.required_number(section, "p"));
      if (fam == "bessel")
        return example_jump_measure(f.required_number(section, "alpha"), f.number(section, "a", 0.25),
                                    f.number(section, "t", 1.0));
      f.fail(section, "family", fmt::format("unknown jump family '{}' (piecewise-power, power, bessel)", fam));
    }();
    if (a != 1.0 || b != 1.0) j = j.scaled(a, b);
    return j;
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    f.fail(section, "family", e.what());
  }
}

ScalingFamily family_from_spec(const SpecFile& f, const std::string& section) {
  if (!f.has_section(section)) f.fail(section, "", "section is missing");
  const std::string kind = lower(f.text(section, "kind", "bessel"));
  try {
    if (kind == "bessel") {
      BesselFamilyParams p;
      p.alpha = f.number(section, "alpha", p.alpha);
      p.s = f.number(section, "s", p.s);
      p.t = f.number(section, "t", p.t);
      p.a = f.number(section, "a", p.a);
      p.uv.eps = f.number(section, "eps", p.uv.eps);
      p.uv.c1 = f.optional_number(section, "c1");
      return bessel_family(p);
    }
    if (kind == "custom") {
      const double alpha = f.required_number(section, "alpha");
      auto sv = [&](const std::string& name) {
        const double pw = f.number(section, name + "_power", 0.0);
        const double c = f.number(section, name + "_const", 1.0);
        return pw == 0.0 ? SlowlyVarying::constant(c) : SlowlyVarying::log_power(pw, c);
      };
      const auto u = sv("u");
      const auto v = sv("v");
      return ScalingFamily(string_from_spec(f), jump_from_spec(f), alpha, u, v);
    }
    f.fail(section, "kind", fmt::format("unknown family kind '{}' (bessel, custom)", kind));
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    f.fail(section, "kind", e.what());
  }
}

SimConfig sim_from_spec(const SpecFile& f, const std::string& section) {
  SimConfig c;
  if (auto s = f.get(section, "seed")) {
    const std::string t = trim(*s);
    char* end = nullptr;
    errno = 0;
    c.seed = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno == ERANGE)
      f.fail(section, "seed", fmt::format("expected an unsigned 64-bit integer, got '{}'", *s));
  }
  c.replicates = static_cast<int>(f.integer(section, "replicates", c.replicates));
  c.dt = f.number(section, "dt", c.dt);
  c.eps_jump = f.number(section, "eps_jump", c.eps_jump);
  c.horizon = f.number(section, "horizon", c.horizon);
  c.workers = static_cast<int>(f.integer(section, "workers", c.workers));
  if (auto s = f.get(section, "scheme")) {
    try {
      c.scheme = t0_scheme_from_string(lower(trim(*s)));
    } catch (const Error& e) {
      f.fail(section, "scheme", e.what());
    }
  }
  c.absorb_c = f.number(section, "absorb_c", c.absorb_c);
  c.bridge_correction = f.flag(section, "bridge_correction", c.bridge_correction);
  c.max_steps = f.integer(section, "max_steps", c.max_steps);
  try {
    c.validate();
  } catch (const Error& e) {
    f.fail(section, "", e.what());
  }
  return c;
}

QuadratureOptions quad_from_spec(const SpecFile& f, const std::string& section) {
  QuadratureOptions q;
  q.x_lo = f.number(section, "x_lo", q.x_lo);
  q.panels_per_decade = static_cast<int>(f.integer(section, "panels_per_decade", q.panels_per_decade));
  q.nodes_per_panel = static_cast<int>(f.integer(section, "nodes_per_panel", q.nodes_per_panel));
  q.rel_tol = f.number(section, "rel_tol", q.rel_tol);
  q.max_refinements = static_cast<int>(f.integer(section, "max_refinements", q.max_refinements));
  if (!(q.x_lo > 0 && q.x_lo < 1)) f.fail(section, "x_lo", "must be in (0, 1)");
  if (q.panels_per_decade < 2) f.fail(section, "panels_per_decade", "must be >= 2");
  if (q.nodes_per_panel < 4) f.fail(section, "nodes_per_panel", "must be >= 4");
  if (!(q.rel_tol > 0 && q.rel_tol < 1)) f.fail(section, "rel_tol", "must be in (0, 1)");
  if (q.max_refinements < 0) f.fail(section, "max_refinements", "must be >= 0");
  return q;
}

std::string tabulated_section(const StringSpec& m, const std::vector<double>& x, const std::string& section) {
  std::string xs, ms;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xs += fmt::format("{}{:.17g}", i ? ", " : "", x[i]);
    ms += fmt::format("{}{:.17g}", i ? ", " : "", m.value(x[i]));
  }
  return fmt::format("[{}]\nfamily = tabulated\nx = {}\nm = {}\n", section, xs, ms);
}

}  // namespace krein
