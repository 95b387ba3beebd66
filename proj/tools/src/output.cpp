#include "output.hpp"

#include <cmath>
#include <fmt/format.h>

#include "kreinscale/error.hpp"

namespace krein::cli {

std::string Provenance::hash_hex() const { return fmt::format("{:016x}", config_hash); }

nlohmann::json Provenance::to_json() const {
  nlohmann::json j{{"tool", "kreinscale"}, {"version", version}, {"command", command}, {"config_hash", hash_hex()}};
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  return j;
}

std::string Provenance::comment_block() const {
  std::string s = fmt::format("# kreinscale {}\n# command={} config_hash={}", version, command, hash_hex());
  if (seed) s += fmt::format(" seed={}", *seed);
  return s + "\n";
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const Provenance& prov,
                     const std::vector<std::string>& header)
    : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw ParameterError(fmt::format("cannot write {}", path.string()));
  out_ << prov.comment_block();
  for (const auto& h : header) cell(h);
  end_row();
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (!first_) out_ << ',';
  out_ << csv_quote(s);
  first_ = false;
  return *this;
}

CsvWriter& CsvWriter::cell(double x) {
  if (std::isnan(x)) return cell(std::string("nan"));
  if (std::isinf(x)) return cell(std::string(x > 0 ? "inf" : "-inf"));
  return cell(fmt::format("{:.17g}", x));
}

CsvWriter& CsvWriter::cell(long long x) { return cell(fmt::format("{}", x)); }

void CsvWriter::end_row() {
  out_ << "\r\n";
  first_ = true;
  // rows go out as they are produced so a later failure leaves the partial table
  out_.flush();
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw ParameterError(fmt::format("error writing {}", path_.string()));
}

nlohmann::json number(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

nlohmann::json numbers(const std::vector<double>& v) {
  auto j = nlohmann::json::array();
  for (double x : v) j.push_back(number(x));
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ParameterError(fmt::format("cannot write {}", path.string()));
    out << j.dump(2) << '\n';
    if (!out) throw ParameterError(fmt::format("error writing {}", path.string()));
  }
  std::filesystem::rename(tmp, path);
}

void ensure_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ParameterError(fmt::format("output directory {} cannot be created", dir.string()));
  const auto probe = dir / ".kreinscale_write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw ParameterError(fmt::format("output directory {} is not writable", dir.string()));
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace krein::cli
