#pragma once

#include <stdexcept>
#include <string>

namespace chemo {

/// Invalid argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The critical-mode search hit its box boundary, so the minimum may lie outside.
class InconclusiveSearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A slaved mode has zero growth rate; the center-manifold reduction breaks down.
class ResonanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitDegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BranchMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace chemo
