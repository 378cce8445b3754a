#pragma once

#include <stdexcept>
#include <string>

namespace swarmflow {

/// Invalid input or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A kernel was asked for its value on a singular set (x = s, or an undefined image point).
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A point lies outside the computational domain D.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A simulation produced non-finite values. The CLI maps this to exit code 3.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace swarmflow
