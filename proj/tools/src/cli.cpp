#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "kreinscale/error.hpp"

#ifndef KREINSCALE_VERSION
#define KREINSCALE_VERSION "0.0.0"
#endif

namespace krein::cli {

namespace {

struct Options {
  std::string spec_path;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  std::string format = "csv";
  bool strict = false;
  int verbosity = 0;
  bool quiet = false;
  // shorthand overrides
  std::optional<std::uint64_t> seed;
  std::optional<int> workers, replicates, panels_per_decade, nodes_per_panel;
  std::optional<double> rel_tol, x_lo;
  std::optional<std::string> gamma, lambda, x;
};

void add_common(CLI::App* sub, Options& o, bool with_sim, const std::string& grid_section) {
  sub->add_option("spec", o.spec_path, "Spec file (INI: [section] key = value)")->check(CLI::ExistingFile);
  sub->add_option("-o,--out", o.out_dir, "Output directory")->capture_default_str();
  sub->add_option("-s,--set", o.overrides, "Override a spec entry: section.key=value (repeatable)");
  sub->add_option("--format", o.format, "Table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  sub->add_option("--rel-tol", o.rel_tol, "Quadrature tolerance ([quad] rel_tol)");
  sub->add_option("--x-lo", o.x_lo, "Lower quadrature cutoff ([quad] x_lo)");
  sub->add_option("--panels-per-decade", o.panels_per_decade, "[quad] panels_per_decade");
  sub->add_option("--nodes-per-panel", o.nodes_per_panel, "[quad] nodes_per_panel");
  if (with_sim) {
    sub->add_option("--seed", o.seed, "[sim] seed");
    sub->add_option("--workers", o.workers, "[sim] workers (does not change results)");
    sub->add_option("--replicates", o.replicates, "[sim] replicates");
  }
  if (!grid_section.empty()) {
    sub->add_option("--gamma", o.gamma, fmt::format("Comma list, [{}] gamma", grid_section));
    sub->add_option("--lambda", o.lambda, fmt::format("Comma list, [{}] lambda", grid_section));
    sub->add_option("--x", o.x, fmt::format("Comma list, [{}] x", grid_section));
  }
  sub->add_flag("-v,--verbose", o.verbosity, "More log output (repeatable)");
  sub->add_flag("-q,--quiet", o.quiet, "Errors only");
}

void apply_overrides(SpecFile& spec, const Options& o, const std::string& grid_section) {
  for (const auto& s : o.overrides) {
    const auto dot = s.find('.');
    const auto eq = s.find('=');
    if (dot == std::string::npos || eq == std::string::npos || dot == 0 || dot > eq || eq == dot + 1)
      throw SpecError(fmt::format("--set expects section.key=value, got '{}'", s), "<command line>", 0);
    spec.set(s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
  }
  auto num = [](double v) { return fmt::format("{:.17g}", v); };
  if (o.rel_tol) spec.set("quad", "rel_tol", num(*o.rel_tol));
  if (o.x_lo) spec.set("quad", "x_lo", num(*o.x_lo));
  if (o.panels_per_decade) spec.set("quad", "panels_per_decade", std::to_string(*o.panels_per_decade));
  if (o.nodes_per_panel) spec.set("quad", "nodes_per_panel", std::to_string(*o.nodes_per_panel));
  if (o.seed) spec.set("sim", "seed", std::to_string(*o.seed));
  if (o.workers) spec.set("sim", "workers", std::to_string(*o.workers));
  if (o.replicates) spec.set("sim", "replicates", std::to_string(*o.replicates));
  if (o.gamma) spec.set(grid_section, "gamma", *o.gamma);
  if (o.lambda) spec.set(grid_section, "lambda", *o.lambda);
  if (o.x) spec.set(grid_section, "x", *o.x);
}

void setup_logging(const Options& o) {
  auto logger = spdlog::get("kreinscale");
  if (!logger) {
    logger = spdlog::stderr_color_mt("kreinscale");
    logger->set_pattern("[%l] %v");
  }
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum lvl = spdlog::level::warn;
  if (o.quiet) lvl = spdlog::level::err;
  else if (o.verbosity == 1) lvl = spdlog::level::info;
  else if (o.verbosity >= 2) lvl = spdlog::level::debug;
  spdlog::set_level(lvl);
}

int report(int code, const char* kind, const std::exception& e) {
  fmt::print(stderr, "kreinscale: {}: {}\n", kind, e.what());
  return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Krein-string numerics: string analysis, eigenfunctions, Laplace exponents, simulation and "
               "scaling-limit verification"};
  app.set_version_flag("--version", std::string(KREINSCALE_VERSION));
  app.require_subcommand(1);
  Options o;
  struct Sub {
    const char* name;
    const char* help;
    bool sim;
    const char* grid;
    int (*run)(RunConfig&);
  };
  const Sub subs[] = {
      {"string-analyze", "d(m), condition (C), G^k table and N(gamma) of a string (and jump measure)", false,
       "analyze", cmd_string_analyze},
      {"eigen", "psi, phi^d, g, c^d and Wronskian on a (lambda, x) grid", false, "eigen", cmd_eigen},
      {"chi", "Laplace exponent chi(lambda), or the rescaled exponent and kappa_hat over a gamma sweep", false, "chi",
       cmd_chi},
      {"bessel", "Natural-scale string of a Bessel-type drift, exported as a tabulated spec, with its constants",
       false, "", cmd_bessel},
      {"simulate", "Monte Carlo: t0, eta, occupation or fluct experiments", true, "experiment", cmd_simulate},
      {"verify", "Sweep of the scaling-limit hypotheses over a gamma grid", false, "verify", cmd_verify},
  };
  std::vector<CLI::App*> apps;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, o, s.sim, s.grid);
    if (std::string(s.name) == "verify") sub->add_flag("--strict", o.strict, "Exit 1 when any check fails");
    apps.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_validation;
  }
  setup_logging(o);

  try {
    std::size_t k = 0;
    while (!apps[k]->parsed()) ++k;
    RunConfig cfg;
    cfg.command = subs[k].name;
    cfg.spec = o.spec_path.empty() ? SpecFile::parse("", "<command line>") : SpecFile::load(o.spec_path);
    apply_overrides(cfg.spec, o, subs[k].grid);
    cfg.out_dir = o.out_dir;
    cfg.format = o.format;
    cfg.strict = o.strict;
    cfg.quiet = o.quiet;
    cfg.prov.version = KREINSCALE_VERSION;
    cfg.prov.command = cfg.command;
    // the worker count changes scheduling only, so it stays out of the hash
    cfg.prov.config_hash = fnv1a64(cfg.command + "\n" + cfg.spec.canonical({"workers"}));
    if (cfg.command == "simulate") cfg.prov.seed = sim_from_spec(cfg.spec).seed;
    ensure_output_dir(cfg.out_dir);
    return subs[k].run(cfg);
  } catch (const BudgetError& e) {
    return report(exit_budget, "budget exceeded", e);
  } catch (const IndeterminateError& e) {
    return report(exit_indeterminate, "indeterminate", e);
  } catch (const ConvergenceError& e) {
    return report(exit_indeterminate, "no convergence", e);
  } catch (const VerificationError& e) {
    return report(exit_indeterminate, "verification", e);
  } catch (const Error& e) {
    return report(exit_validation, "invalid input", e);
  } catch (const std::filesystem::filesystem_error& e) {
    return report(exit_validation, "file system", e);
  } catch (const std::exception& e) {
    return report(exit_validation, "error", e);
  }
}

}  // namespace krein::cli
