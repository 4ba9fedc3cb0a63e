#pragma once

#include <stdexcept>
#include <string>

namespace uavrecon {

/// Inputs whose dimensions disagree (image pairs, maps, guides).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Geometric configurations a solver cannot handle (collinear points, antipodal rotations).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver ran but could not produce an acceptable answer.
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace uavrecon
