#ifndef APFPRED_ERRORS_HPP_
#define APFPRED_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace apfpred {

/// Malformed map or scenario document. Carries the 1-based line/column when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(format(what, line, column)), line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    if (line <= 0) return what;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
  }

  int line_;
  int column_;
};

/// Scenario parameters that violate their invariants.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sensor origin inside an occupied cell.
class SensorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Obstacle at zero distance; the repulsive term is undefined.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Total force vanished; no direction to move in.
class StuckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A step would place the vehicle inside an occupied cell.
class CollisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Projected minimum lies outside the map.
class ArmingRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace apfpred

#endif  // APFPRED_ERRORS_HPP_
