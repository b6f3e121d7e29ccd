#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "tutor/error.hpp"

namespace tutor::csv {

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what) : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct Record {
  std::size_t line = 0;  // 1-based physical line the record starts on
  std::vector<std::string> fields;
};

/// RFC 4180 style reader: comma delimiter, double-quote quoting with "" escapes,
/// CRLF or LF line endings. Blank lines are skipped. A leading UTF-8 BOM is dropped.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::optional<Record> next();

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  bool first_ = true;
};

std::string trim(const std::string& s);

}  // namespace tutor::csv
