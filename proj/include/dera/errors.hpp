#pragma once

#include <stdexcept>
#include <string>

namespace dera {

/// Argument outside the domain of a utility, cost, or supply family.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A monotone root search whose endpoints do not straddle the target.
class RootNotBracketed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Demand or capacity boxes that no allocation can satisfy.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A denominator that vanishes (bid-implied price, J multiplier, w bounds).
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fewer than three price makers: no supply function equilibrium exists.
class NoEquilibriumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Transformed marginal cost found decreasing somewhere on the feasible box.
class NonconvexityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or schema-violating scenario document.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dera
