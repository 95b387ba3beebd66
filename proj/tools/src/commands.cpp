#include "commands.hpp"

#include <cmath>
#include <fmt/format.h>
#include <memory>
#include <spdlog/spdlog.h>
#include <variant>

#include "kreinscale/bessel.hpp"
#include "kreinscale/eigen.hpp"
#include "kreinscale/error.hpp"
#include "kreinscale/levy.hpp"
#include "kreinscale/measure.hpp"
#include "kreinscale/simulate.hpp"
#include "kreinscale/verify.hpp"

namespace krein::cli {

namespace {

using nlohmann::json;

/// A table written as CSV (streamed) or as a JSON document {provenance, columns, rows}.
class Table {
 public:
  using Cell = std::variant<std::string, double, long long>;

  Table(const RunConfig& cfg, const std::string& stem, std::vector<std::string> columns)
      : columns_(std::move(columns)), prov_(cfg.prov) {
    if (cfg.format == "json") {
      path_ = cfg.out_dir / (stem + ".json");
    } else {
      path_ = cfg.out_dir / (stem + ".csv");
      csv_ = std::make_unique<CsvWriter>(path_, prov_, columns_);
    }
  }

  void row(const std::vector<Cell>& cells) {
    if (csv_) {
      for (const auto& c : cells) std::visit([&](const auto& v) { csv_->cell(v); }, c);
      csv_->end_row();
      return;
    }
    json r = json::array();
    for (const auto& c : cells) {
      std::visit(
          [&](const auto& v) {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>) {
              r.push_back(number(v));
            } else {
              r.push_back(v);
            }
          },
          c);
    }
    rows_.push_back(std::move(r));
  }

  std::string close() {
    if (csv_) {
      csv_->close();
    } else {
      write_json(path_, json{{"provenance", prov_.to_json()}, {"columns", columns_}, {"rows", rows_}});
    }
    return path_.filename().string();
  }

 private:
  std::vector<std::string> columns_;
  Provenance prov_;
  std::filesystem::path path_;
  std::unique_ptr<CsvWriter> csv_;
  json rows_ = json::array();
};

json stats_json(const SampleStats& s) {
  return {{"mean", number(s.mean)}, {"se", number(s.se)}, {"variance", number(s.variance)},
          {"median", number(s.median)}, {"n", s.n}};
}

double z_score(double mean, double target, double se) { return se > 0 ? (mean - target) / se : NAN; }

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = n == 1 ? lo : lo * std::pow(hi / lo, double(i) / (n - 1));
  return x;
}

void require_positive(const SpecFile& f, const std::string& sec, const std::string& key, const std::vector<double>& v) {
  for (double x : v) {
    if (!(x > 0) || !std::isfinite(x)) f.fail(sec, key, "values must be positive and finite");
  }
}

EigenOptions eigen_options(const SpecFile& f) {
  EigenOptions e;
  e.quad = quad_from_spec(f);
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_string_analyze(RunConfig& cfg) {
  auto& f = cfg.spec;
  const auto m = string_from_spec(f);
  std::optional<JumpMeasureSpec> j;
  if (f.has_section("jump")) j = jump_from_spec(f);
  const auto q = quad_from_spec(f);
  const int d_max = static_cast<int>(f.integer("analyze", "d_max", 8));
  if (d_max < 1 || d_max > 64) f.fail("analyze", "d_max", "must be in [1, 64]");
  const auto xs = f.numbers("analyze", "x", {0.1, 0.5, 1.0, 2.0, 5.0});
  require_positive(f, "analyze", "x", xs);
  const auto gammas = f.numbers("analyze", "gamma", {1e2, 1e3, 1e4});
  require_positive(f, "analyze", "gamma", gammas);
  const long long kmax_in = f.integer("analyze", "kmax", 0);  // 0: max(d(m), 1)
  f.check_all_used({"string", "jump", "quad", "analyze"});

  spdlog::info("string-analyze: {}", m.describe());
  json r;
  r["provenance"] = cfg.prov.to_json();
  r["string"] = m.describe();
  const auto si = d_of_m(m, d_max, q);
  r["d_m"] = si.d ? json(*si.d) : json(nullptr);
  r["d_integrals"] = numbers(si.integrals);

  const int kmax = kmax_in > 0 ? static_cast<int>(kmax_in) : std::max(si.d.value_or(3), 1);
  if (kmax < 1 || kmax > 64) f.fail("analyze", "kmax", "must be in [1, 64]");
  json table = json::array();
  for (double x : xs) {
    for (int k = 1; k <= kmax; ++k) table.push_back({{"x", x}, {"k", k}, {"value", number(G_k(m, k, x, q))}});
  }
  r["G_table"] = table;

  r["condition_C"] = nullptr;
  r["N"] = json::array();
  r["b"] = nullptr;
  if (j) {
    r["jump"] = j->describe();
    const auto c = check_condition_C(m, *j, q);
    r["condition_C"] = {{"holds", c.holds},
                        {"infinite_near_zero", c.infinite_near_zero},
                        {"tail_mass", number(c.tail_mass)},
                        {"first_moment", number(c.first_moment)},
                        {"g_moment", number(c.g_moment)}};
    if (c.holds) {
      for (double g : gammas) r["N"].push_back({{"gamma", g}, {"value", number(N_of_gamma(m, *j, g, q))}});
      try {
        r["b"] = number(b_mean(m, *j, q));
      } catch (const DivergenceError&) {
        r["b"] = "inf";
      }
    }
  }
  write_json(cfg.out_dir / "string_analyze.json", r);
  spdlog::info("d(m) = {}", si.d ? std::to_string(*si.d) : "none");
  return exit_ok;
}

int cmd_eigen(RunConfig& cfg) {
  auto& f = cfg.spec;
  const auto m = string_from_spec(f);
  auto opt = eigen_options(f);
  const auto lambdas = f.numbers("eigen", "lambda", {0.0, 1.0});
  for (double l : lambdas) {
    if (!(l >= 0) || !std::isfinite(l)) f.fail("eigen", "lambda", "values must be >= 0");
  }
  const auto xs = f.numbers("eigen", "x", {0.5, 1.0, 2.0, 5.0});
  require_positive(f, "eigen", "x", xs);
  if (f.get("eigen", "d")) {
    const auto d = f.integer("eigen", "d", 1);
    if (d < 1 || d > 64) f.fail("eigen", "d", "must be in [1, 64]");
    opt.d = static_cast<int>(d);
  }
  opt.rel_tol = f.number("eigen", "rel_tol", opt.rel_tol);
  f.check_all_used({"string", "quad", "eigen"});

  opt.breakpoints = xs;
  opt.phi_limit = std::max(1.0, *std::max_element(xs.begin(), xs.end()));
  Table t(cfg, "eigen",
          {"lambda", "x", "d", "psi", "phi", "g", "c", "wronskian", "psi_bound", "phi_bound", "g_bound", "c_bound"});
  for (double l : lambdas) {
    spdlog::info("eigen: lambda = {}", l);
    const EigenProfile p(m, l, opt);
    for (double x : xs) {
      const auto ps = p.psi(x);
      const auto ph = p.phi(x);
      const auto g = p.g(x);
      t.row({l, x, static_cast<long long>(p.d()), ps.value, ph.value, g.value, p.c(), p.wronskian(x),
             ps.truncation_bound, ph.truncation_bound, g.truncation_bound, p.c_bound()});
    }
  }
  t.close();
  return exit_ok;
}

int cmd_chi(RunConfig& cfg) {
  auto& f = cfg.spec;
  const auto opt = eigen_options(f);
  if (f.has_section("family")) {
    const auto fam = family_from_spec(f);
    const auto gammas = f.numbers("chi", "gamma", {1e4, 1e6, 1e8});
    require_positive(f, "chi", "gamma", gammas);
    const auto lambdas = f.numbers("chi", "lambda", {0.5, 1.0, 2.0});
    require_positive(f, "chi", "lambda", lambdas);
    f.check_all_used({"family", "string", "jump", "quad", "chi"});
    Table t(cfg, "chi", {"gamma", "lambda", "chi_tilde", "kappa_hat", "route_b", "rel_gap"});
    for (double g : gammas) {
      for (double l : lambdas) {
        spdlog::info("chi: gamma = {:g}, lambda = {}", g, l);
        const auto r = fluct_exponent_report(fam, g, l, opt);
        t.row({g, l, r.value, r.kappa_hat, r.route_b, r.rel_gap});
      }
    }
    t.close();
    return exit_ok;
  }
  const auto m = string_from_spec(f);
  const auto j = jump_from_spec(f);
  const auto lambdas = f.numbers("chi", "lambda", {1.0, 16.0});
  require_positive(f, "chi", "lambda", lambdas);
  f.check_all_used({"string", "jump", "quad", "chi"});
  Table t(cfg, "chi", {"lambda", "chi"});
  for (double l : lambdas) t.row({l, chi(m, j, l, opt)});
  t.close();
  return exit_ok;
}

int cmd_bessel(RunConfig& cfg) {
  auto& f = cfg.spec;
  const auto drift = bessel_drift_from_spec(f, "bessel");
  const double t = f.number("bessel", "t", 1.0);
  const double x_min = f.number("export", "x_min", 1e-4);
  const double x_max = f.number("export", "x_max", 1e4);
  const auto points = f.integer("export", "points", 41);
  const std::string file = f.text("export", "file", "bessel_string.ini");
  if (!(x_min > 0 && x_max > x_min && std::isfinite(x_max))) f.fail("export", "x_max", "need 0 < x_min < x_max");
  if (points < 2 || points > 100000) f.fail("export", "points", "must be in [2, 100000]");
  if (file.empty() || file.find('/') != std::string::npos) f.fail("export", "file", "must be a plain file name");
  f.check_all_used({"bessel", "export"});

  const double alpha = drift.alpha();
  spdlog::info("bessel: delta = {}, alpha = {}", drift.delta, alpha);
  const auto m = natural_scale_string(drift);
  {
    std::ofstream out(cfg.out_dir / file, std::ios::binary);
    out << cfg.prov.comment_block() << tabulated_section(m, log_grid(x_min, x_max, static_cast<int>(points)));
    if (!out) throw ParameterError(fmt::format("cannot write {}", file));
  }

  json r;
  r["provenance"] = cfg.prov.to_json();
  r["alpha"] = alpha;
  r["delta"] = drift.delta;
  r["s"] = drift.s;
  r["x0"] = drift.x0;
  r["w_scale"] = drift.w_scale;
  r["eta_bar"] = drift.eta_bar;
  r["theta"] = 1.0 - 1.0 / alpha;
  r["induced_spec"] = file;
  json w = json::array();
  for (double y : {1.0, 10.0, 100.0}) w.push_back({{"y", y}, {"W", number(drift_W(drift, y))}});
  r["drift_W"] = w;
  const auto K = bessel_K(drift);
  json k = json::array();
  for (double x : {1e2, 1e4, 1e8}) k.push_back({{"x", x}, {"K", number(K(x))}, {"m_tail", number(-m.value(x))}});
  r["K"] = k;
  r["t"] = t;
  // the N constants need alpha > 2 and a positive log exponent
  r["N_constant"] = nullptr;
  r["N_log_exponent"] = nullptr;
  if (alpha > 2) {
    try {
      r["N_log_exponent"] = N_log_exponent(alpha, drift.s, t);
      r["N_constant"] = N_asymptotic_constant(alpha, drift.s, t);
    } catch (const ParameterError& e) {
      spdlog::warn("N constants unavailable: {}", e.what());
    }
  }
  write_json(cfg.out_dir / "bessel_summary.json", r);
  return exit_ok;
}

int cmd_simulate(RunConfig& cfg) {
  auto& f = cfg.spec;
  const auto sim = sim_from_spec(f);
  const std::string kind = f.text("experiment", "kind", "t0");
  json r;
  r["provenance"] = cfg.prov.to_json();
  r["kind"] = kind;
  r["replicates"] = sim.replicates;
  const std::string stem = "simulate_" + kind;

  if (kind == "t0") {
    const auto m = string_from_spec(f);
    const double x = f.number("experiment", "x", 1.0);
    if (!(x > 0) || !std::isfinite(x)) f.fail("experiment", "x", "must be positive");
    f.check_all_used({"sim", "experiment", "string"});
    const T0Sampler sampler(m, sim);
    r["scheme"] = to_string(sampler.scheme());
    const auto v = sample_T0_batch(m, x, sim);
    Table t(cfg, stem, {"replicate", "T0"});
    for (std::size_t i = 0; i < v.size(); ++i) t.row({static_cast<long long>(i), v[i]});
    t.close();
    const auto s = summarize(v);
    r["x"] = x;
    r["stats"] = stats_json(s);
    r["green_mean"] = number(sampler.green_mean(x));
    r["z"] = number(z_score(s.mean, sampler.green_mean(x), s.se));
  } else if (kind == "eta") {
    const auto m = string_from_spec(f);
    const auto j = jump_from_spec(f);
    f.check_all_used({"sim", "experiment", "string", "jump"});
    const auto e = eta_experiment(m, j, sim);
    Table t(cfg, stem, {"replicate", "slope", "points"});
    for (std::size_t i = 0; i < e.slope.size(); ++i) t.row({static_cast<long long>(i), e.slope[i], e.points[i]});
    t.close();
    r["horizon"] = sim.horizon;
    r["eps_jump"] = sim.eps_jump;
    r["b"] = number(e.b);
    r["drift"] = number(e.drift);
    r["expected_points"] = number(e.expected_points);
    r["stats"] = stats_json(e.stats);
    r["z"] = number(z_score(e.stats.mean, e.b, e.stats.se));
  } else if (kind == "occupation") {
    const auto mp = string_from_spec(f, "string_plus");
    const auto jp = jump_from_spec(f, "jump_plus");
    const auto mm = f.has_section("string_minus") ? string_from_spec(f, "string_minus") : mp;
    const auto jm = f.has_section("jump_minus") ? jump_from_spec(f, "jump_minus") : jp;
    f.check_all_used({"sim", "experiment", "string_plus", "jump_plus", "string_minus", "jump_minus"});
    const auto e = occupation_experiment({mp, jp, mm, jm}, sim);
    Table t(cfg, stem, {"replicate", "fraction"});
    for (std::size_t i = 0; i < e.fraction.size(); ++i) t.row({static_cast<long long>(i), e.fraction[i]});
    t.close();
    r["t"] = sim.horizon;
    r["p"] = number(e.p);
    r["b_plus"] = number(e.b_plus);
    r["b_minus"] = number(e.b_minus);
    r["stats"] = stats_json(e.stats);
    r["z"] = number(z_score(e.stats.mean, e.p, e.stats.se));
  } else if (kind == "fluct") {
    const auto fam = family_from_spec(f);
    const double gamma = f.number("experiment", "gamma", 1e4);
    if (!(gamma >= 1) || !std::isfinite(gamma)) f.fail("experiment", "gamma", "must be >= 1");
    const auto ts = f.numbers("experiment", "t", {1.0, 2.0});
    require_positive(f, "experiment", "t", ts);
    f.check_all_used({"sim", "experiment", "family", "string", "jump"});
    const auto e = fluctuation_experiment(fam, gamma, ts, sim);
    Table t(cfg, stem, {"replicate", "t", "Z"});
    for (std::size_t i = 0; i < e.Z.size(); ++i) {
      for (std::size_t k = 0; k < e.t.size(); ++k) t.row({static_cast<long long>(i), e.t[k], e.Z[i][k]});
    }
    t.close();
    r["gamma"] = gamma;
    r["b"] = number(e.b);
    r["eps"] = number(e.eps);
    json rows = json::array();
    for (std::size_t k = 0; k < e.t.size(); ++k) {
      rows.push_back({{"t", e.t[k]},
                      {"local_time", number(e.local_time[k])},
                      {"stats", stats_json(e.stats[k])},
                      {"z_mean", number(z_score(e.stats[k].mean, 0.0, e.stats[k].se))},
                      {"ks", number(e.ks[k])}});
    }
    r["per_t"] = rows;
    json inc = json::array();
    for (std::size_t k = 0; k < e.var_ratio.size(); ++k) {
      inc.push_back({{"t0", e.t[k]},
                     {"t1", e.t[k + 1]},
                     {"var_ratio", number(e.var_ratio[k].value)},
                     {"var_ratio_se", number(e.var_ratio[k].se)},
                     {"var_ratio_expected", e.t[k + 1] / e.t[k]},
                     {"increment_corr", number(e.increment_corr[k].value)},
                     {"increment_corr_se", number(e.increment_corr[k].se)}});
    }
    r["increments"] = inc;
  } else {
    f.fail("experiment", "kind", fmt::format("unknown experiment '{}' (t0, eta, occupation, fluct)", kind));
  }
  write_json(cfg.out_dir / (stem + "_summary.json"), r);
  return exit_ok;
}

int cmd_verify(RunConfig& cfg) {
  auto& f = cfg.spec;
  const auto fam = family_from_spec(f);
  const std::string kind = f.text("family", "kind", "bessel");
  VerifyOptions opt;
  opt.quad = quad_from_spec(f);
  opt.eigen.quad = opt.quad;
  opt.bounded_log_power = f.number("verify", "bounded_log_power", opt.bounded_log_power);
  const auto gamma = f.numbers("verify", "gamma", default_gamma_grid());
  require_positive(f, "verify", "gamma", gamma);
  const auto lambda = f.numbers("verify", "lambda", {0.5, 1.0, 2.0});
  require_positive(f, "verify", "lambda", lambda);
  const int d = static_cast<int>(f.integer("verify", "d", 3));
  if (d < 1 || d > 64) f.fail("verify", "d", "must be in [1, 64]");

  const double alpha = fam.alpha();
  const bool integer_alpha = alpha >= 2 && alpha == std::round(alpha);
  std::vector<std::string> checks{"G_convergence", "kappa_delta", "minor", "laplace"};
  if (integer_alpha) checks.push_back("integer_alpha");
  if (auto c = f.get("verify", "checks")) {
    checks.clear();
    std::string item;
    std::string s = *c;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    while (in >> item) {
      if (item != "G_convergence" && item != "kappa_delta" && item != "minor" && item != "laplace" &&
          item != "integer_alpha")
        f.fail("verify", "checks",
               fmt::format("unknown check '{}' (G_convergence, kappa_delta, minor, laplace, integer_alpha)", item));
      if (item == "integer_alpha" && !integer_alpha) f.fail("verify", "checks", "integer_alpha needs an integer alpha >= 2");
      checks.push_back(item);
    }
  }
  // K and L of the integer-alpha conditions: Bessel families know theirs, custom ones give log powers
  SlowlyVarying K = SlowlyVarying::constant(1.0), L = SlowlyVarying::constant(1.0);
  if (kind == "bessel") {
    K = bessel_K(BesselDriftSpec::from_alpha(alpha, f.number("family", "s", 1.0)));
    L = bessel_L(f.number("family", "t", 1.0));
  } else {
    const double kp = f.number("verify", "K_power", 0.0), lp = f.number("verify", "L_power", 0.0);
    if (kp != 0) K = SlowlyVarying::log_power(kp);
    if (lp != 0) L = SlowlyVarying::log_power(lp);
  }
  f.check_all_used({"family", "string", "jump", "quad", "verify"});

  json r;
  r["provenance"] = cfg.prov.to_json();
  r["alpha"] = alpha;
  r["d"] = d;
  r["gamma"] = gamma;
  r["lambda"] = lambda;
  r["kappa_hat"] = json::array();
  r["sections"] = json::array();
  int n_pass = 0, n_fail = 0, n_ind = 0;
  Table t(cfg, "verify", {"section", "functional", "gamma", "value", "error", "reference", "verdict"});
  auto flush = [&] {
    r["summary"] = {{"pass", n_pass}, {"fail", n_fail}, {"indeterminate", n_ind},
                    {"verdict", n_fail ? "fail" : n_ind ? "indeterminate" : "pass"}};
    write_json(cfg.out_dir / "verify_report.json", r);
  };
  for (const auto& c : checks) {
    spdlog::info("verify: {}", c);
    SweepSection s;
    if (c == "G_convergence") s = check_G_convergence(fam, d, gamma, opt);
    if (c == "kappa_delta") s = check_kappa_delta(fam, gamma, {}, opt);
    if (c == "minor") s = check_minor_conditions(fam, gamma, opt);
    if (c == "integer_alpha") s = check_integer_alpha(fam, d, gamma, K, L, opt);
    if (c == "laplace") {
      SweepReport table;
      s = laplace_limit_report(fam, lambda, gamma, &table, opt);
      for (const auto& row : table.kappa_hat) r["kappa_hat"].push_back(numbers(row));
    }
    json js{{"name", s.name}, {"verdict", to_string(s.verdict)}, {"functionals", json::array()}};
    for (const auto& fn : s.functionals) {
      js["functionals"].push_back({{"name", fn.name},
                                   {"rule", fn.rule},
                                   {"verdict", to_string(fn.verdict)},
                                   {"value", numbers(fn.value)},
                                   {"error", numbers(fn.error)},
                                   {"reference", numbers(fn.reference)}});
      (fn.verdict == Verdict::pass ? n_pass : fn.verdict == Verdict::fail ? n_fail : n_ind)++;
      for (std::size_t i = 0; i < fn.value.size(); ++i) {
        t.row({s.name, fn.name, gamma.at(i), fn.value[i], i < fn.error.size() ? fn.error[i] : NAN,
               i < fn.reference.size() ? fn.reference[i] : NAN, to_string(fn.verdict)});
      }
    }
    r["sections"].push_back(js);
    flush();
    spdlog::info("verify: {} -> {}", s.name, to_string(s.verdict));
  }
  t.close();
  flush();
  if (!cfg.quiet) fmt::print("pass {} fail {} indeterminate {}\n", n_pass, n_fail, n_ind);
  if (n_ind) return exit_indeterminate;
  if (n_fail && cfg.strict) return exit_failed_check;
  return exit_ok;
}

}  // namespace krein::cli
