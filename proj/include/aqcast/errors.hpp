#pragma once

#include <stdexcept>
#include <string>

namespace aqcast {

// Exit-code class an error maps to at the CLI boundary.
enum class ErrorClass { data = 1, config = 2 };

class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what, ErrorClass cls = ErrorClass::data)
      : std::runtime_error(what), kind_(std::move(kind)), class_(cls) {}

  const std::string& kind() const noexcept { return kind_; }
  ErrorClass error_class() const noexcept { return class_; }

private:
  std::string kind_;
  ErrorClass class_;
};

#define AQCAST_DEFINE_ERROR(Name, Cls)                                                   \
  class Name : public Error {                                                            \
  public:                                                                                \
    explicit Name(const std::string& what) : Error(#Name, what, ErrorClass::Cls) {}      \
  };

AQCAST_DEFINE_ERROR(ParseError, data)
AQCAST_DEFINE_ERROR(DimensionMismatch, data)
AQCAST_DEFINE_ERROR(UnknownClass, data)
AQCAST_DEFINE_ERROR(OutOfExtent, data)
AQCAST_DEFINE_ERROR(UnknownStation, data)
AQCAST_DEFINE_ERROR(UnknownPollutant, data)
AQCAST_DEFINE_ERROR(GapError, data)
AQCAST_DEFINE_ERROR(DomainError, data)
AQCAST_DEFINE_ERROR(AllMissing, data)
AQCAST_DEFINE_ERROR(DivergenceError, data)
AQCAST_DEFINE_ERROR(VersionError, data)
AQCAST_DEFINE_ERROR(CorruptModel, data)
AQCAST_DEFINE_ERROR(LengthMismatch, data)
AQCAST_DEFINE_ERROR(EmptyInput, data)
AQCAST_DEFINE_ERROR(AllExcluded, data)
AQCAST_DEFINE_ERROR(InsufficientYears, data)
AQCAST_DEFINE_ERROR(InsufficientHistory, data)
AQCAST_DEFINE_ERROR(MissingCell, data)
AQCAST_DEFINE_ERROR(IoError, data)
AQCAST_DEFINE_ERROR(ConfigError, config)

#undef AQCAST_DEFINE_ERROR

// Malformed input with a source position. Line and column are 1-based; 0 means unknown.
class SchemaError : public Error {
public:
  SchemaError(std::string file, std::size_t line, std::size_t column, const std::string& message)
      : Error("SchemaError", format(file, line, column, message)),
        file_(std::move(file)), line_(line), column_(column) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  static std::string format(const std::string& file, std::size_t line, std::size_t column,
                            const std::string& message) {
    return file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message;
  }

  std::string file_;
  std::size_t line_;
  std::size_t column_;
};

} // namespace aqcast
