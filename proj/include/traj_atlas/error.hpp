#pragma once

#include <stdexcept>
#include <string>

namespace traj_atlas {

// Error classes map onto stable CLI exit codes (see tools/traj_atlas.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (CSV, JSON); carries the 1-based line when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Input parsed fine but violates a precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// No map edge close enough to the vehicle to predict from.
class NoCoverageError : public Error {
 public:
  using Error::Error;
};

}  // namespace traj_atlas
