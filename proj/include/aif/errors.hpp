#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace aif {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The observation had probability zero under the predictive prior.
class AllZeroPosterior : public Error {
 public:
  using Error::Error;
};

// p puts mass where q is zero.
class SupportViolation : public Error {
 public:
  using Error::Error;
};

class CombinatorialLimit : public Error {
 public:
  using Error::Error;
};

class StepAfterDone : public Error {
 public:
  using Error::Error;
};

// Fixed-point iteration ran out of sweeps. Carries the last iterate so callers
// can still inspect (or use) it.
class NonConvergence : public Error {
 public:
  NonConvergence(std::vector<std::vector<double>> last_iterate, double residual, int sweeps);

  const std::vector<std::vector<double>>& last_iterate() const noexcept { return last_iterate_; }
  double residual() const noexcept { return residual_; }
  int sweeps() const noexcept { return sweeps_; }

 private:
  std::vector<std::vector<double>> last_iterate_;
  double residual_;
  int sweeps_;
};

}  // namespace aif
