#pragma once

#include <stdexcept>
#include <string>

namespace abclab {

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct KindMismatch : std::invalid_argument {
  KindMismatch() : std::invalid_argument("points live on different surfaces") {}
  using std::invalid_argument::invalid_argument;
};

struct SupportTooLarge : std::length_error {
  using std::length_error::length_error;
};

struct ResolutionExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleSeparation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace abclab
