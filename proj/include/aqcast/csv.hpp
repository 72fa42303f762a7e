#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aqcast::csv {

// Line-oriented reader for the comma-separated schemas used by the toolkit.
// Supports double-quoted fields with "" escapes; no embedded newlines.
class Reader {
public:
  explicit Reader(const std::filesystem::path& path);

  // Reads and checks the header row. Columns beyond `required` are allowed only
  // if listed in `optional`. Returns the header fields.
  const std::vector<std::string>& expect_header(const std::vector<std::string>& required,
                                                const std::vector<std::string>& optional = {});

  // Next non-blank data row, or false at end of file.
  bool next(std::vector<std::string>& fields);

  std::size_t line() const noexcept { return line_; }
  const std::string& file() const noexcept { return file_; }
  // Index of a header column, if present.
  std::optional<std::size_t> column(std::string_view name) const;
  // 1-based column number for error messages.
  std::size_t column_number(std::size_t field_index) const noexcept { return field_index + 1; }

  [[noreturn]] void fail(std::size_t field_index, const std::string& message) const;

  double parse_double(const std::vector<std::string>& fields, std::size_t index) const;
  // Empty field -> nullopt.
  std::optional<double> parse_optional_double(const std::vector<std::string>& fields,
                                              std::size_t index) const;

private:
  std::ifstream in_;
  std::string file_;
  std::size_t line_ = 0;
  std::vector<std::string> header_;
};

std::vector<std::string> split_line(std::string_view line);

// Shortest representation that parses back to the same double.
std::string format_double(double v);
std::optional<double> parse_double(std::string_view text) noexcept;

// Opens for writing and throws IoError on failure.
std::ofstream open_output(const std::filesystem::path& path);

} // namespace aqcast::csv
