#pragma once

#include <stdexcept>
#include <string>

namespace seismic_htm {

/// A caller broke a documented precondition (width mismatch, index out of
/// range, subset violation).
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// A value coming from outside the model was unusable (non-finite sample).
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration failed validation. `field()` names the offending entry.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// A file could not be read, written or parsed.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace seismic_htm
