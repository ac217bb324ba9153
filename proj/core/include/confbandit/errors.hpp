#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace confbandit {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied an argument that violates a precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An action index lies outside its axis.
class BoundsError : public ValidationError {
 public:
  BoundsError(std::string axis, std::size_t index, std::size_t bound);

  const std::string& axis() const noexcept { return axis_; }
  std::size_t index() const noexcept { return index_; }
  std::size_t bound() const noexcept { return bound_; }

 private:
  std::string axis_;
  std::size_t index_;
  std::size_t bound_;
};

// Malformed file or wire payload.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A checkpoint could not be restored (version, shape or value problem).
class CheckpointError : public FormatError {
 public:
  using FormatError::FormatError;
};

// The LLM, reward or embedding endpoint failed.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

// Operation is not defined for the given input (e.g. regret on a live run).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace confbandit
