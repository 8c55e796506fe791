#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace songlm {

/// Fixed-format real for CSV output ("%.9g"; "inf"/"nan" spelled out).
std::string format_real(double x);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

/// Lower-case hex SHA-256 of a byte string / a file's contents.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

void log_info(std::string_view message);
void log_warning(std::string_view message);
/// Silences log_info (warnings still print).
void set_quiet(bool quiet);

/// Minimal CSV row builder; fields containing separators are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& field(std::string_view s);
  CsvWriter& field(double x);
  CsvWriter& field(long long x);
  CsvWriter& field(std::size_t x) { return field(static_cast<long long>(x)); }
  CsvWriter& field(int x) { return field(static_cast<long long>(x)); }
  void end_row();
  const std::string& str() const { return out_; }
  void save(const std::filesystem::path& path) const { write_text(path, out_); }

 private:
  std::string out_;
  bool row_start_ = true;
  std::size_t columns_;
  std::size_t current_ = 0;
};

}  // namespace songlm
