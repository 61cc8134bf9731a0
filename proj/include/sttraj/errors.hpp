#pragma once

#include <stdexcept>
#include <string>

namespace sttraj {

/// Tensor shapes do not agree for the requested operation.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A caller violated an operation's precondition (e.g. non-scalar loss).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Invalid model or run configuration.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Non-finite or otherwise unusable numeric input.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Malformed text input. `line()` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Corrupt, truncated or self-inconsistent data.
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A checkpoint written by an incompatible format version.
struct VersionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LookupError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

}  // namespace sttraj
