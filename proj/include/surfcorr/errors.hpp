#pragma once

#include <stdexcept>
#include <string>

namespace surfcorr {

// Malformed input file (OBJ record, JSONL schema, binary container).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally invalid domain object (out-of-range index, degenerate face,
// disconnected graph, shape mismatch).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller passed an argument outside an operation's stated domain.
class ArgError : public std::invalid_argument {
 public:
  explicit ArgError(const std::string& msg) : std::invalid_argument(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace surfcorr
