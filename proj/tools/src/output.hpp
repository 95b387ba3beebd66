#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace krein::cli {

struct Provenance {
  std::string version;
  std::string command;
  std::uint64_t config_hash = 0;
  std::optional<std::uint64_t> seed;

  std::string hash_hex() const;
  nlohmann::json to_json() const;
  /// "# key=value" lines placed at the top of CSV and spec outputs.
  std::string comment_block() const;
};

/// One CSV cell per call; numbers are written with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const Provenance& prov, const std::vector<std::string>& header);
  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
  void end_row();
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  bool first_ = true;
};

std::string csv_quote(const std::string& s);
/// Non-finite values become null (JSON has no infinities).
nlohmann::json number(double x);
nlohmann::json numbers(const std::vector<double>& v);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
/// Creates dir if needed and checks that a file can be written there.
void ensure_output_dir(const std::filesystem::path& dir);

}  // namespace krein::cli
