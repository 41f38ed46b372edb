#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace affect::text {

// Shortest decimal representation that round-trips (std::to_chars).
std::string format_double(double v);
void append_double(std::string& out, double v);

// Strict parse of a whole field; throws DataError naming `context` on failure.
double parse_double(std::string_view field, std::string_view context);

std::string_view trim(std::string_view s);

// Splits on `delim` without quote handling; all spec formats are numeric.
std::vector<std::string_view> split(std::string_view line, char delim = ',');

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Line-by-line view over a buffer; strips a trailing '\r'.
class LineReader {
 public:
  explicit LineReader(std::string_view buf) : buf_(buf) {}
  bool next(std::string_view& line);
  std::size_t line_number() const { return line_no_; }

 private:
  std::string_view buf_;
  std::size_t pos_{0};
  std::size_t line_no_{0};
};

}  // namespace affect::text
