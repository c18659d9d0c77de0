#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace uilab {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class UnknownProposition : public Error {
 public:
  explicit UnknownProposition(const std::string& name)
      : Error("unknown proposition '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class ZeroConditioningEvent : public Error {
 public:
  explicit ZeroConditioningEvent(const std::string& event)
      : Error("conditioning event has zero probability: " + event) {}
};

class ZeroPriorCell : public Error {
 public:
  explicit ZeroPriorCell(const std::string& cell)
      : Error("cell has zero prior probability but a positive target: " + cell) {}
};

class InvalidPartition : public Error {
 public:
  using Error::Error;
};

class NotExclusive : public InvalidPartition {
 public:
  using InvalidPartition::InvalidPartition;
};

class AbsoluteContinuityViolation : public Error {
 public:
  explicit AbsoluteContinuityViolation(std::size_t atom)
      : Error("distribution puts mass on atom " + std::to_string(atom) +
              " where the reference has none") {}
};

class DegenerateAnchor : public Error {
 public:
  using Error::Error;
};

class ContradictoryCertainty : public Error {
 public:
  ContradictoryCertainty() : Error("cannot combine certainty factors +1 and -1") {}
};

class ZeroDenominator : public Error {
 public:
  using Error::Error;
};

class UnboundLeaf : public Error {
 public:
  explicit UnboundLeaf(const std::string& leaf)
      : Error("no posterior supplied for leaf '" + leaf + "'") {}
};

/// Syntax error in formula or rule-set text. Line and column are 1-based;
/// line is 0 when the text was a bare formula.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(location(line, column) + what), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string location(std::size_t line, std::size_t column) {
    if (line == 0) return "column " + std::to_string(column) + ": ";
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
  }
  std::size_t line_;
  std::size_t column_;
};

/// Structurally well-formed rule set that violates a semantic rule.
class SemanticError : public Error {
 public:
  SemanticError(const std::string& what, std::string identifier)
      : Error(what + ": " + identifier), identifier_(std::move(identifier)) {}
  const std::string& identifier() const noexcept { return identifier_; }

 private:
  std::string identifier_;
};

class DirectedCycle : public SemanticError {
 public:
  explicit DirectedCycle(std::string identifier)
      : SemanticError("rule graph has a directed cycle through", std::move(identifier)) {}
};

class OuterLoopDiverged : public Error {
 public:
  using Error::Error;
};

class DegenerateMetric : public Error {
 public:
  using Error::Error;
};

class DegenerateRegression : public Error {
 public:
  using Error::Error;
};

}  // namespace uilab
