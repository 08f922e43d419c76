#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violated an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A continued-fraction expansion terminated: the input is rational.
class RationalInputError : public Error {
 public:
  RationalInputError(int index)
      : Error("alpha is rational: continued fraction terminates at index " + std::to_string(index)),
        index_(index) {}
  int index() const noexcept { return index_; }

 private:
  int index_;
};

/// The requested computation needs more precision than the representation carries.
class PrecisionError : public Error {
 public:
  using Error::Error;
};

/// An orbit landed exactly on the singularity of the roof.
class SingularityError : public Error {
 public:
  explicit SingularityError(std::int64_t offset)
      : Error("orbit hits the singularity at iterate j = " + std::to_string(offset)), offset_(offset) {}
  std::int64_t offset() const noexcept { return offset_; }

 private:
  std::int64_t offset_;
};

}  // namespace kflow
