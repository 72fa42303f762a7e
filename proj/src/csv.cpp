#include "aqcast/csv.hpp"

#include <charconv>
#include <cmath>

#include "aqcast/errors.hpp"

namespace aqcast::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

} // namespace

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.emplace_back(trim(field));
  return out;
}

Reader::Reader(const std::filesystem::path& path) : in_(path), file_(path.string()) {
  if (!in_) throw IoError("cannot open " + file_);
}

const std::vector<std::string>& Reader::expect_header(const std::vector<std::string>& required,
                                                      const std::vector<std::string>& optional) {
  std::string text;
  if (!std::getline(in_, text)) throw SchemaError(file_, 1, 0, "missing header row");
  line_ = 1;
  // Strip a UTF-8 byte order mark.
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) text.erase(0, 3);
  header_ = split_line(text);
  if (header_.size() < required.size()) {
    throw SchemaError(file_, 1, header_.size() + 1,
                      "header has " + std::to_string(header_.size()) + " columns, expected " +
                          std::to_string(required.size()));
  }
  for (std::size_t i = 0; i < required.size(); ++i) {
    if (header_[i] != required[i]) {
      throw SchemaError(file_, 1, i + 1,
                        "expected column '" + required[i] + "', found '" + header_[i] + "'");
    }
  }
  for (std::size_t i = required.size(); i < header_.size(); ++i) {
    bool allowed = false;
    for (const auto& o : optional) allowed = allowed || header_[i] == o;
    if (!allowed) throw SchemaError(file_, 1, i + 1, "unexpected column '" + header_[i] + "'");
  }
  return header_;
}

bool Reader::next(std::vector<std::string>& fields) {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (trim(text).empty()) continue;
    fields = split_line(text);
    if (fields.size() != header_.size()) {
      throw SchemaError(file_, line_, std::min(fields.size(), header_.size()) + 1,
                        "row has " + std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(header_.size()));
    }
    return true;
  }
  return false;
}

std::optional<std::size_t> Reader::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  return std::nullopt;
}

void Reader::fail(std::size_t field_index, const std::string& message) const {
  throw SchemaError(file_, line_, column_number(field_index), message);
}

double Reader::parse_double(const std::vector<std::string>& fields, std::size_t index) const {
  auto v = csv::parse_double(fields[index]);
  if (!v) fail(index, "expected a number, found '" + fields[index] + "'");
  return *v;
}

std::optional<double> Reader::parse_optional_double(const std::vector<std::string>& fields,
                                                    std::size_t index) const {
  if (fields[index].empty()) return std::nullopt;
  return parse_double(fields, index);
}

std::string format_double(double v) {
  // Fixed notation for ordinary magnitudes (coordinates read better as 500000 than
  // 5e+05); both forms are the shortest that round-trip.
  char buf[400];
  const double mag = std::abs(v);
  const bool fixed = mag == 0.0 || (mag >= 1e-4 && mag < 1e15);
  auto [ptr, ec] = fixed ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                         : std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view text) noexcept {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

} // namespace aqcast::csv
