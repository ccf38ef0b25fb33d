#pragma once

#include <stdexcept>
#include <string>

namespace simcheck {

// Root of every error raised by the library. Callers that only want to know
// "input was bad" vs "statistic degenerate" can catch the two subclasses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments: non-finite values, dimension mismatch, invalid bandwidths,
// malformed files.
class InputError : public Error {
 public:
  using Error::Error;
};

class DegenerateDirection : public InputError {
 public:
  using InputError::InputError;
};

// The first component of a direction must be nonzero to fix its sign.
class IdentificationError : public InputError {
 public:
  using InputError::InputError;
};

class DegenerateCovariate : public InputError {
 public:
  DegenerateCovariate(const std::string& what, std::size_t column)
      : InputError(what), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

// v_n == 0: every off-diagonal inner product vanished.
class DegenerateStatistic : public Error {
 public:
  explicit DegenerateStatistic(double i_n)
      : Error("degenerate statistic: variance estimate is zero"), i_n_(i_n) {}
  double i_n() const noexcept { return i_n_; }

 private:
  double i_n_;
};

class EstimationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace simcheck
