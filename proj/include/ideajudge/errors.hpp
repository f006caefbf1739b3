#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ideajudge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateKeyError : public Error {
 public:
  using Error::Error;
};

class ForeignKeyError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// No unit carries two or more ratings, so there is nothing to pair.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class InsufficientPoolError : public Error {
 public:
  InsufficientPoolError(std::size_t pool_size, std::size_t requested)
      : Error("insufficient conditioning pool: need " + std::to_string(requested) +
              " examples, pool has " + std::to_string(pool_size) + " (short by " +
              std::to_string(requested - pool_size) + ")"),
        pool_size_(pool_size),
        requested_(requested) {}
  std::size_t pool_size() const noexcept { return pool_size_; }
  std::size_t requested() const noexcept { return requested_; }
  std::size_t shortfall() const noexcept { return requested_ - pool_size_; }

 private:
  std::size_t pool_size_;
  std::size_t requested_;
};

// Backend failures. Each has its own type so callers can report them apart.
class BackendError : public Error {
 public:
  using Error::Error;
};

class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

class TimeoutError : public BackendError {
 public:
  using BackendError::BackendError;
};

class ReplayMissError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace ideajudge
