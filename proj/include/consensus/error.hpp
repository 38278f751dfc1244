#pragma once

#include <stdexcept>
#include <string>

namespace consensus {

/// Coarse failure class; each maps to one CLI exit code.
enum class ErrorCategory {
  kConfig = 2,
  kData = 3,
  kNumerical = 4,
};

/// Base of every error raised by the library. `code()` is a stable
/// snake_case identifier suitable for machine parsing.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string code, const std::string& what)
      : std::runtime_error(what), category_(category), code_(std::move(code)) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
  std::string code_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what)
      : Error(ErrorCategory::kData, "invalid_input", what) {}
};

class DegenerateInput : public Error {
 public:
  explicit DegenerateInput(const std::string& what)
      : Error(ErrorCategory::kData, "degenerate_input", what) {}
};

class SingularCalibration : public Error {
 public:
  explicit SingularCalibration(const std::string& what)
      : Error(ErrorCategory::kNumerical, "singular_calibration", what) {}
};

class SingularFit : public Error {
 public:
  explicit SingularFit(const std::string& what)
      : Error(ErrorCategory::kNumerical, "singular_fit", what) {}
};

class TrainingFailure : public Error {
 public:
  explicit TrainingFailure(const std::string& what)
      : Error(ErrorCategory::kNumerical, "training_failure", what) {}
};

class UndefinedMetric : public Error {
 public:
  explicit UndefinedMetric(const std::string& what)
      : Error(ErrorCategory::kNumerical, "undefined_metric", what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(ErrorCategory::kData, "parse_error",
              path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConflictError : public Error {
 public:
  explicit ConflictError(const std::string& what)
      : Error(ErrorCategory::kData, "conflict", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCategory::kConfig, "config_error", what) {}
};

}  // namespace consensus
