#pragma once

#include <stdexcept>
#include <string>

namespace semcc {

// Input outside the mathematical domain of an operation (negative SNR,
// zero distance, out-of-range command component).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller broke an interface contract (malformed action, shape mismatch).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid or unparsable configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace semcc
