#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dclust {

// 17 significant digits, shortest of fixed/scientific.
std::string format_number(double v);

class CsvWriter {
 public:
  // Creates parent directories; throws IoError if the file cannot be opened.
  explicit CsvWriter(const std::filesystem::path& path);

  void header(std::span<const std::string> names);
  void row(std::span<const double> values);
  void row(std::string_view leading, std::span<const double> values);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

// Throws IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace dclust
