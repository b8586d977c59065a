#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chebgsee {

/// Base class of every error raised by the library. The kind drives the CLI
/// exit code (validation = 2, capacity = 3, numerical = 4).
class Error : public std::runtime_error {
 public:
  enum class Kind { Structural, Parameter, Precondition, Domain, Format, Capacity, Numerical };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Mismatched shapes or site counts between operands.
class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& what) : Error(Kind::Structural, what) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error(Kind::Parameter, what) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(Kind::Precondition, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(Kind::Domain, what) {}
};

/// Malformed container on load. `offset` is the byte position where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(Kind::Format, what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what) : Error(Kind::Capacity, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(Kind::Numerical, what) {}
};

/// Maps an error kind to the process exit code used by the command-line tool.
inline int exit_code_for(Error::Kind kind) noexcept {
  switch (kind) {
    case Error::Kind::Capacity:
      return 3;
    case Error::Kind::Numerical:
      return 4;
    default:
      return 2;
  }
}

}  // namespace chebgsee
