#pragma once

#include <stdexcept>
#include <string>

namespace loadshift {

/// Malformed or inconsistent user input (config files, CLI flags).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Syntax or semantic failure while reading a data file.  Messages carry the
/// file name and 1-based line number where the problem was found.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, int line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}
};

/// Shape mismatch between objects that should agree (plan vs instance
/// dimensions, price table vs horizon).  Distinct from constraint
/// infeasibility, which is reported, not thrown.
class StructuralError : public std::runtime_error {
 public:
  explicit StructuralError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Raised when an exhaustive search would exceed its configured size cap.
class SearchSpaceError : public std::runtime_error {
 public:
  explicit SearchSpaceError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace loadshift
