#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace zomd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of a function (e.g. log of a non-positive coordinate).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Raised when a concentration bound is requested before the burn-in index t0.
class BurnInError : public PreconditionError {
 public:
  BurnInError(const std::string& what, std::int64_t t0) : PreconditionError(what), t0_(t0) {}
  std::int64_t t0() const { return t0_; }

 private:
  std::int64_t t0_;
};

// A forward scan over partial sums hit its iteration cap.
class ScanLimitError : public Error {
 public:
  ScanLimitError(const std::string& what, std::int64_t last_t, double sum_alpha, double sum_alpha_sq)
      : Error(what), last_t_(last_t), sum_alpha_(sum_alpha), sum_alpha_sq_(sum_alpha_sq) {}
  std::int64_t last_t() const { return last_t_; }
  double sum_alpha() const { return sum_alpha_; }
  double sum_alpha_sq() const { return sum_alpha_sq_; }

 private:
  std::int64_t last_t_;
  double sum_alpha_;
  double sum_alpha_sq_;
};

}  // namespace zomd
