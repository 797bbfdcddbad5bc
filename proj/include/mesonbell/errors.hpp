#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mesonbell {

/// Invalid construction input. `field()` names the offending parameter.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A parameter lies outside the domain where a kernel is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Conditioning on an event of zero probability (no surviving pairs).
class DegenerateConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An estimator was asked for a value from an empty eligible sample.
class DegenerateSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A probability came out negative beyond rounding noise.
class InternalConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// No sign change of S_max - 2 could be bracketed, or the crossing is not unique.
class BracketingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mesonbell
