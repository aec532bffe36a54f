// errors.hpp

#pragma once

#include <stdexcept>
#include <string>

namespace incstat {

// Argument errors use std::invalid_argument; the types below mark failures
// the CLI maps to distinct exit codes.

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};


// A configuration that cannot be honoured within the memory budget.
class BudgetError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class GeneratorError : public std::runtime_error {
 public:
  GeneratorError(std::size_t realization, const std::string& what)
      : std::runtime_error("realization " + std::to_string(realization) + ": " + what),
        realization_(realization) {}
  std::size_t realization() const { return realization_; }

 private:
  std::size_t realization_;
};

// A diagnostic that cannot be evaluated on the given input (e.g. torus too small).
class DiagnosticError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace incstat
