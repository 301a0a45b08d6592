// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace lrntf {

/// Failure classes. The C API maps each one onto a status code.
enum class ErrorKind {
  Index,
  Shape,
  Domain,
  Config,
  Parse,
  Validation,
  Io,
  Solver,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_{kind} {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct IndexError : Error {
  explicit IndexError(const std::string &w) : Error(ErrorKind::Index, w) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string &w) : Error(ErrorKind::Shape, w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string &w) : Error(ErrorKind::Domain, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string &w) : Error(ErrorKind::Config, w) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string &w) : Error(ErrorKind::Parse, w) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string &w)
      : Error(ErrorKind::Validation, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string &w) : Error(ErrorKind::Io, w) {}
};
struct SolverError : Error {
  explicit SolverError(const std::string &w) : Error(ErrorKind::Solver, w) {}
};

}  // namespace lrntf
