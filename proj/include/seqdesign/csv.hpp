#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace seqdesign {

// One comma-separated file: optional leading '#' comment lines, a header row,
// and data rows kept as raw text cells. No quoting; '.' decimal separator.
struct CsvTable {
  std::vector<std::string> comments;  // without the leading '#'
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or npos when absent.
  std::size_t column_index(std::string_view name) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// Throws ParseError (row = 1-based line number) on rows of the wrong width.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);
std::string format_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
// Strict full-cell parse; returns false on any trailing garbage.
bool parse_double(std::string_view text, double& out);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace seqdesign
