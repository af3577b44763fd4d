#pragma once

#include <stdexcept>
#include <string>

namespace fnsurf {

struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an enumeration or growth exceeds its configured budget.
struct ResourceError : std::runtime_error {
    double best_bound;
    ResourceError(const std::string& what, double best = 0.0) : std::runtime_error(what), best_bound(best) {}
};

struct ParseError : std::runtime_error {
    int line;
    std::string field;
    ParseError(int line_no, std::string fld, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_no) + ", field '" + fld + "': " + msg),
          line(line_no),
          field(std::move(fld)) {}
};

}  // namespace fnsurf
