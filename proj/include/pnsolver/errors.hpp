#pragma once

#include <stdexcept>
#include <string>

namespace pnsolver {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (|x| > 1, negative radicand, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Spherical-harmonic or unknown index outside the admissible range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// A product of two unknowns was found where a linear expression was required.
class NonlinearityError : public Error {
 public:
  using Error::Error;
};

class UnboundSymbolError : public Error {
 public:
  explicit UnboundSymbolError(std::string symbol)
      : Error("unbound symbol: " + symbol), symbol_(std::move(symbol)) {}
  const std::string& symbol() const noexcept { return symbol_; }

 private:
  std::string symbol_;
};

class PlacementError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Problem rejected before assembly, e.g. vacuum voxels with no extinction floor.
class AdmissionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace pnsolver
