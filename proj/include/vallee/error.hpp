#pragma once

#include <stdexcept>
#include <string>

namespace vallee {

/// Base of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative or adaptive procedure failed to reach its tolerance.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  explicit NumericError(const std::string& what) : NumericError(what, -1.0) {}

  /// Best accuracy reached before giving up, or -1 when not meaningful.
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// The operation is not defined for this kind of input.
class Unsupported : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DomainError(msg);
}

}  // namespace detail
}  // namespace vallee
