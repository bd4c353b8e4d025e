#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace reformkit {

// Base for every error the library raises on bad input data.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A record in a line-delimited file failed validation. `line` is 1-based;
// 0 means the error is not tied to a file position.
class SchemaError : public DataError {
  public:
    SchemaError(std::size_t line, std::string field, std::string const& detail)
        : DataError(format(line, field, detail)), line_(line), field_(std::move(field)), detail_(detail)
    {}

    std::size_t line() const { return line_; }
    std::string const& field() const { return field_; }
    std::string const& detail() const { return detail_; }

    // Same error, anchored at a file line.
    SchemaError at_line(std::size_t line) const { return SchemaError(line, field_, detail_); }

  private:
    static std::string format(std::size_t line, std::string const& field, std::string const& detail)
    {
        std::string out = "schema error";
        if (line > 0) {
            out += " at line " + std::to_string(line);
        }
        if (!field.empty()) {
            out += " field '" + field + "'";
        }
        return out + ": " + detail;
    }

    std::size_t line_;
    std::string field_;
    std::string detail_;
};

}  // namespace reformkit
