#ifndef TRACTDYN_ERROR_HPP
#define TRACTDYN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tractdyn {

/// Malformed or inconsistent input (bad file, violated precondition).
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An enumeration would exceed the configured table/cell cap.
class ResourceCapError : public std::runtime_error {
  public:
    ResourceCapError(const std::string &what, unsigned long long required,
                     unsigned long long allowed)
        : std::runtime_error(what + " (required " + std::to_string(required) +
                             ", allowed " + std::to_string(allowed) + ")"),
          required_(required), allowed_(allowed) {}

    unsigned long long required() const { return required_; }
    unsigned long long allowed() const { return allowed_; }

  private:
    unsigned long long required_;
    unsigned long long allowed_;
};

/// A numerical routine failed to reach its residual tolerance.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An internal consistency check failed; indicates a bug, not bad input.
class InvariantViolation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

} // namespace tractdyn

#endif
