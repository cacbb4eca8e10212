#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace limits_sd {

/// Root of every error thrown by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Model text or model structure is not acceptable. Maps to CLI exit code 1.
class ValidationError : public Error {
public:
  using Error::Error;
};

class SyntaxError : public ValidationError {
public:
  SyntaxError(std::size_t line, std::size_t col, std::string expected)
      : ValidationError("line " + std::to_string(line) + ", col " + std::to_string(col) +
                        ": syntax error: expected " + expected),
        line_(line), col_(col), expected_(std::move(expected)) {}

  std::size_t line() const { return line_; }
  std::size_t col() const { return col_; }
  const std::string& expected() const { return expected_; }

private:
  std::size_t line_;
  std::size_t col_;
  std::string expected_;
};

class DuplicateName : public ValidationError {
public:
  DuplicateName(std::string name, std::vector<std::size_t> lines)
      : ValidationError(format(name, lines)), name_(std::move(name)), lines_(std::move(lines)) {}

  const std::string& name() const { return name_; }
  const std::vector<std::size_t>& lines() const { return lines_; }

private:
  static std::string format(const std::string& name, const std::vector<std::size_t>& lines) {
    std::string msg = "duplicate element '" + name + "' declared on lines";
    for (std::size_t i = 0; i < lines.size(); ++i) {
      msg += (i == 0 ? " " : ", ") + std::to_string(lines[i]);
    }
    return msg;
  }

  std::string name_;
  std::vector<std::size_t> lines_;
};

class UnresolvedReference : public ValidationError {
public:
  /// `line` is 0 when the referencing element has no source location.
  UnresolvedReference(std::string name, std::string referenced_by, std::size_t line = 0)
      : ValidationError((line ? "line " + std::to_string(line) + ": " : std::string{}) +
                        "unresolved reference '" + name + "' in element '" + referenced_by + "'"),
        name_(std::move(name)), referenced_by_(std::move(referenced_by)), line_(line) {}

  const std::string& name() const { return name_; }
  const std::string& referenced_by() const { return referenced_by_; }
  std::size_t line() const { return line_; }

private:
  std::string name_;
  std::string referenced_by_;
  std::size_t line_;
};

class AlgebraicLoop : public ValidationError {
public:
  AlgebraicLoop(std::vector<std::string> cycle, std::string detail)
      : ValidationError("algebraic loop: " + detail), cycle_(std::move(cycle)) {}

  /// Elements on the cycle in dependency order; the last depends on the first.
  const std::vector<std::string>& cycle() const { return cycle_; }

private:
  std::vector<std::string> cycle_;
};

/// Model element violates a structural rule (bad table, reserved name, wrong kind).
class InvalidElement : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// Failure while a run is executing. Maps to CLI exit code 2.
class RuntimeError : public Error {
public:
  using Error::Error;
};

class RuntimeEvalError : public RuntimeError {
public:
  RuntimeEvalError(double time, std::string element, std::string cause)
      : RuntimeError("t=" + std::to_string(time) + ", element '" + element + "': " + cause),
        time_(time), element_(std::move(element)), cause_(std::move(cause)) {}

  double time() const { return time_; }
  const std::string& element() const { return element_; }
  const std::string& cause() const { return cause_; }

private:
  double time_;
  std::string element_;
  std::string cause_;
};

class OverrideUnknown : public RuntimeError {
public:
  explicit OverrideUnknown(const std::string& name)
      : RuntimeError("override targets unknown constant '" + name + "'") {}
};

class InvalidConfig : public RuntimeError {
public:
  using RuntimeError::RuntimeError;
};

class NonpositiveAveragingTime : public RuntimeError {
public:
  NonpositiveAveragingTime() : RuntimeError("smoothing averaging time must be > 0") {}
};

class NonpositiveDelayTime : public RuntimeError {
public:
  NonpositiveDelayTime() : RuntimeError("delay time must be > 0") {}
};

class NegativeComponent : public Error {
public:
  using Error::Error;
};

class CorpusCorrupt : public Error {
public:
  using Error::Error;
};

class MissingHook : public Error {
public:
  explicit MissingHook(const std::string& name)
      : Error("model lacks required element '" + name + "' for augmentation") {}
};

class UnknownScenario : public Error {
public:
  explicit UnknownScenario(const std::string& name) : Error("unknown scenario '" + name + "'") {}
};

class UnknownVariable : public RuntimeError {
public:
  explicit UnknownVariable(const std::string& name)
      : RuntimeError("variable '" + name + "' not present in run") {}
};

class GridMismatch : public Error {
public:
  GridMismatch() : Error("runs do not share a time grid") {}
};

class EmptySeries : public Error {
public:
  EmptySeries() : Error("series is empty") {}
};

class WindowOutOfRange : public Error {
public:
  using Error::Error;
};

/// Malformed preset, registry or target file.
class FormatError : public Error {
public:
  using Error::Error;
};

}  // namespace limits_sd
