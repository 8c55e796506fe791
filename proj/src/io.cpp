#include "songlm/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace songlm {

namespace {
bool g_quiet = false;
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

void log_info(std::string_view message) {
  if (!g_quiet) std::cerr << "[songlm] " << message << '\n';
}

void log_warning(std::string_view message) { std::cerr << "[songlm] warning: " << message << '\n'; }

void set_quiet(bool quiet) { g_quiet = quiet; }

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (const auto& h : header) field(h);
  end_row();
}

CsvWriter& CsvWriter::field(std::string_view s) {
  if (!row_start_) out_ += ',';
  row_start_ = false;
  ++current_;
  if (s.find_first_of(",\"\n") != std::string_view::npos) {
    out_ += '"';
    for (char c : s) {
      if (c == '"') out_ += '"';
      out_ += c;
    }
    out_ += '"';
  } else {
    out_ += s;
  }
  return *this;
}

CsvWriter& CsvWriter::field(double x) { return field(std::string_view(format_real(x))); }

CsvWriter& CsvWriter::field(long long x) { return field(std::string_view(std::to_string(x))); }

void CsvWriter::end_row() {
  if (current_ != columns_)
    throw std::logic_error("CSV row has " + std::to_string(current_) + " fields, expected " + std::to_string(columns_));
  out_ += '\n';
  row_start_ = true;
  current_ = 0;
}

}  // namespace songlm
