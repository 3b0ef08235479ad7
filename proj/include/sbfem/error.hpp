#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sbfem {

/// Bad argument or configuration passed to a library routine.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A cell or mapped cell has non-positive signed area.
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Interface traces of the two subdomain meshes do not describe the same curve.
class GeometryMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfBounds : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Malformed input file. `line()` is 1-based; 0 means "whole file".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SingularMatrix : public std::runtime_error {
 public:
  SingularMatrix(std::ptrdiff_t pivot, const std::string& what)
      : std::runtime_error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
  std::ptrdiff_t pivot() const noexcept { return pivot_; }

 private:
  std::ptrdiff_t pivot_;
};

}  // namespace sbfem
