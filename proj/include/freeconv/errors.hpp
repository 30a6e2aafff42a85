#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace freeconv {

/// Input violates a documented precondition or invariant of an operation.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A combinatorial size limit (n or k cap) was exceeded.
class LimitError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// The subordination fixed point failed to reach tolerance; carries the
/// last iterate and its residual.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& msg, std::complex<double> last_iterate,
                   double residual, int iterations)
      : std::runtime_error(msg),
        last(last_iterate),
        residual(residual),
        iterations(iterations) {}

  std::complex<double> last;
  double residual;
  int iterations;
};

/// Circulant spectrum went negative beyond roundoff; the density is invalid.
class EmbeddingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested artifact or registry entry does not exist.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace freeconv
