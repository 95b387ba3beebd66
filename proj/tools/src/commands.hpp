#pragma once

#include <filesystem>
#include <string>

#include "kreinscale/spec_io.hpp"
#include "output.hpp"

namespace krein::cli {

/// Exit codes.
enum ExitCode : int {
  exit_ok = 0,
  exit_failed_check = 1,  // verify --strict with a failing verdict
  exit_validation = 2,
  exit_indeterminate = 3,
  exit_budget = 4,
};

struct RunConfig {
  std::string command;
  SpecFile spec;
  std::filesystem::path out_dir = ".";
  std::string format = "csv";  // tables: csv | json
  bool strict = false;
  bool quiet = false;
  Provenance prov;
};

int cmd_string_analyze(RunConfig& cfg);
int cmd_eigen(RunConfig& cfg);
int cmd_chi(RunConfig& cfg);
int cmd_bessel(RunConfig& cfg);
int cmd_simulate(RunConfig& cfg);
int cmd_verify(RunConfig& cfg);

/// Full entry point: parses argv, runs the subcommand, maps errors to exit codes.
int run_cli(int argc, const char* const* argv);

}  // namespace krein::cli
