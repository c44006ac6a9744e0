#pragma once

#include <stdexcept>
#include <string>

namespace krf {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent configuration (basis mismatch, missing pairings, parse errors).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Input outside an operation's domain (class outside its cone, T infinite where finite is required).
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& msg) : Error(msg) {}
};

/// Kähler positivity violated at a grid node.
class GeometryError : public Error {
 public:
  GeometryError(const std::string& msg, std::ptrdiff_t node) : Error(msg), node_(node) {}
  std::ptrdiff_t node() const { return node_; }

 private:
  std::ptrdiff_t node_;
};

/// Power-law regression could not be performed.
class FitError : public Error {
 public:
  explicit FitError(const std::string& msg) : Error(msg) {}
};

/// A CSV file whose columns do not match the expected schema.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& msg) : Error(msg) {}
};

/// File could not be read or written.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& msg) : Error(msg) {}
};

}  // namespace krf
