#pragma once

#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace sidiff {

/// Shortest round-trip decimal form of x; identical bits give identical text.
std::string format_double(double x);

/// Row-at-a-time CSV writer with a fixed header.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header);
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace sidiff
