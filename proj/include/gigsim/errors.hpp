#pragma once

#include <stdexcept>
#include <string>

namespace gigsim {

// Argument outside the mathematical domain of a function (z <= 0, a <= 0,
// non-finite input, invalid parameter triple).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Parameters are valid but the requested algorithm does not cover them, e.g.
// the |lambda| < 0.5 sampler called with |lambda| = 0.8.
class RegimeError : public std::invalid_argument {
 public:
  explicit RegimeError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure could not deliver its contract: series or continued
// fraction did not converge, quadrature missed its tolerance, a truncation
// region carries no representable probability mass.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gigsim
