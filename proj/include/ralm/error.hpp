#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ralm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The simplex iteration guard tripped. With Bland's rule this only happens on
/// badly conditioned input.
class SimplexError : public Error {
 public:
  using Error::Error;
};

class ManifoldError : public Error {
 public:
  using Error::Error;
};

/// Syntax or binding error in an expression string. `offset` is a byte offset
/// into the parsed text.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation hit a point outside an operation's domain (division by zero,
/// square root of a negative number). `offset` locates the node in the source.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace ralm
