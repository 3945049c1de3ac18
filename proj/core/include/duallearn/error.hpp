#pragma once

#include <stdexcept>
#include <string>

namespace duallearn {

// Base of every error the library throws. `module()` names the subsystem
// that raised it so drivers can report where a run failed.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}
  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

// Malformed or inconsistent inputs: dimension mismatches, empty datasets,
// out-of-domain arguments.
class InputError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration: unknown kinds, missing surrogate settings, bad
// hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A gradient was requested for a loss that has none (zero-one, rate
// indicator). Substitute a smooth surrogate first.
class SurrogateRequiredError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// File-level parse failures (CSV, model files, traces).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace duallearn
