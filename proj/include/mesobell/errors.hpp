#ifndef MESOBELL_ERRORS_HPP
#define MESOBELL_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mesobell {

// Process exit codes used by the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,       // bad command line
  kExitValidation = 2,  // invariant or configuration check failed
  kExitIo = 3,          // filesystem failure
  kExitParse = 4,       // malformed config or event file
};

// A domain invariant does not hold (bad parameters, empty bins, ...).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Syntax error in a config or event file; line is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::uint64_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::uint64_t line() const { return line_; }

 private:
  std::uint64_t line_;
};

// Adaptive integration ran out of budget; carries the residual error estimate.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual estimate " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace mesobell

#endif
