#pragma once

#include <stdexcept>
#include <string>

namespace ks {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class NonPositiveParameter : public Error {
public:
  explicit NonPositiveParameter(const std::string& field)
      : Error("parameter must be strictly positive: " + field), field_(field) {}
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

class BadDimension : public Error {
public:
  explicit BadDimension(int d)
      : Error("spatial dimension must be 1, 2 or 3, got " + std::to_string(d)) {}
};

class GridTooCoarse : public Error {
public:
  explicit GridTooCoarse(const std::string& what) : Error(what) {}
};

class TruncationTooSmall : public Error {
public:
  explicit TruncationTooSmall(const std::string& what) : Error(what) {}
};

// Raised when a quantity that is provably positive/regular comes out
// otherwise in floating point; indicates a bug, not a user error.
class NumericalContradiction : public Error {
public:
  explicit NumericalContradiction(const std::string& what) : Error(what) {}
};

class DegenerateEigenbasis : public NumericalContradiction {
public:
  explicit DegenerateEigenbasis(const std::string& what)
      : NumericalContradiction(what) {}
};

class Overflow : public Error {
public:
  explicit Overflow(const std::string& what) : Error(what) {}
};

// Blow-up detected while time stepping (non-finite state or norm beyond the
// configured threshold).
class NonFinite : public Error {
public:
  explicit NonFinite(const std::string& what) : Error(what) {}
};

class BadAmplitude : public Error {
public:
  explicit BadAmplitude(const std::string& what) : Error(what) {}
};

class StableRegime : public Error {
public:
  explicit StableRegime(const std::string& what) : Error(what) {}
};

class InsufficientSamples : public Error {
public:
  explicit InsufficientSamples(const std::string& what) : Error(what) {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace ks
