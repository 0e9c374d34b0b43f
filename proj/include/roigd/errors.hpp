#pragma once

#include <stdexcept>
#include <string>

namespace roigd {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input document (bad token, wrong field count, ...). The message
// carries "<file>:<line>:" when the source location is known.
struct ParseError : Error {
  using Error::Error;
  ParseError(const std::string& file, int line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what) {}
};

// Structurally well-formed input violating a semantic invariant
// (dangling owner index, out-of-bounds geometry, ...).
struct ValidationError : Error {
  using Error::Error;
};

struct NotARectangle : Error {
  using Error::Error;
};

struct GraspOutsideRoi : Error {
  using Error::Error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

struct InvalidCount : Error {
  using Error::Error;
};

struct EmptyCurve : Error {
  using Error::Error;
};

struct UnknownCategory : Error {
  using Error::Error;
};

struct MissingGrasp : Error {
  using Error::Error;
};

struct NoValidDepth : Error {
  using Error::Error;
};

struct DegenerateNeighborhood : Error {
  using Error::Error;
};

}  // namespace roigd
