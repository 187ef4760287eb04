#pragma once

#include <stdexcept>
#include <string>

namespace stcontrol {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function (e.g. time outside [0, T]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or incomplete problem/run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Interface geometry incompatible with the space-time cylinder.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Mesh construction failed; carries the offending time layer.
class MeshingError : public Error {
 public:
  MeshingError(const std::string& what, int layer)
      : Error(what + " (layer " + std::to_string(layer) + ")"), layer_(layer) {}
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

/// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Well-formed file whose contents violate a mesh invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

/// Factorization or solve failure. `pivot` is the failing column, or -1.
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what, long pivot = -1) : Error(what), pivot_(pivot) {}
  long pivot() const noexcept { return pivot_; }

 private:
  long pivot_;
};

/// Point location failed in a triangulation.
class LocationError : public Error {
 public:
  LocationError(const std::string& what, double x, double t)
      : Error(what + " at (x=" + std::to_string(x) + ", t=" + std::to_string(t) + ")"), x_(x), t_(t) {}
  double x() const noexcept { return x_; }
  double t() const noexcept { return t_; }

 private:
  double x_, t_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace stcontrol
