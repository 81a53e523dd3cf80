#pragma once

#include <stdexcept>
#include <string>

namespace qfi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A formula was evaluated on (or numerically at) its singular set.
class SingularPoint : public Error {
 public:
  SingularPoint(const std::string& what, double x, double y)
      : Error(what + " at (" + std::to_string(x) + ", " + std::to_string(y) + ")"), x_(x), y_(y) {}
  double x() const { return x_; }
  double y() const { return y_; }

 private:
  double x_, y_;
};

/// Parameters outside the admissible regime of a potential or catalog entry.
class BadParams : public Error {
 public:
  using Error::Error;
};

/// A name that no registry knows about.
class UnknownName : public Error {
 public:
  using Error::Error;
};

}  // namespace qfi
