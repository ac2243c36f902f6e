#pragma once

#include <stdexcept>
#include <string>

namespace microdim {

/// Bad input: violated precondition, malformed descriptor, out-of-range parameter.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A construction produced a value that contradicts one of its proven bounds.
/// Seeing this means a bug (or an inconsistent oracle), never bad luck.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The request needs more depth, points, or memory than the configured limits allow.
class ResourceExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A metric-space net is too coarse to certify a packing bound at some level.
class ResolutionExhausted : public ResourceExhausted {
 public:
  ResolutionExhausted(int level, const std::string& what)
      : ResourceExhausted(what), level_(level) {}
  int level() const noexcept { return level_; }

 private:
  int level_;
};

}  // namespace microdim
