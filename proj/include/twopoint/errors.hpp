#pragma once

#include <stdexcept>
#include <string>

namespace twopoint {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Station or argument outside the valid interval.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Input outside the mathematical domain of a formula (e.g. |delta| >= pi/2).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Two distinct closest points on the reference line.
class AmbiguityError : public Error {
 public:
  using Error::Error;
};

// Vehicle at the center of an arc; every arc point is equidistant.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Vehicle nearly perpendicular to the line, or at/beyond its center of
// curvature, so the speed coupling is undefined.
class GeometryError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace twopoint
