#pragma once

#include <stdexcept>
#include <string>

namespace lsv {

// Raised when an iterative solver exceeds its cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A grid is too coarse for the requested quantity.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Orbit reached an exact fixed point (0 or 1) or stayed trapped past the cap.
class OrbitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InsufficientPointsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Correlation series did not decay below the truncation criterion.
class TailNotNegligibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An output path could not be created or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lsv
