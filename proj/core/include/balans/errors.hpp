#ifndef BALANS_ERRORS_HPP
#define BALANS_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace balans {

/// Syntax error in an expression or config file; `offset` is the 1-based
/// byte position in the input where parsing failed.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// A builtin's mathematical domain was violated during evaluation
/// (division by zero, log of a non-positive value, ...). `offset` is the
/// 1-based byte position of the offending subexpression in the original source text.
class EvalError : public std::runtime_error {
public:
  EvalError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " (subexpression at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// Violated precondition on a grid, problem or report argument.
class InvariantError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Two solutions/grids/data sets that must match do not.
class MismatchError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// NaN or Inf appeared mid-run; carries the (step, cell) location.
class BlowupError : public std::runtime_error {
public:
  BlowupError(int step, int cell)
      : std::runtime_error("non-finite value at step " + std::to_string(step) +
                           ", cell " + std::to_string(cell)),
        step_(step), cell_(cell) {}
  int step() const noexcept { return step_; }
  int cell() const noexcept { return cell_; }

private:
  int step_;
  int cell_;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace balans

#endif
