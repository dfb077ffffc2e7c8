#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqdesign {

// Root of every error raised by the library. Subclasses name the failure
// category so callers (notably the CLI) can map them to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A required column is absent or the schema itself is inconsistent.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& column, const std::string& message)
      : Error(message), column_(column) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& message)
      : Error(message), row_(row), column_(column) {}
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

// Non-finite values or out-of-domain data.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Reference set larger than the regressor backend accepts.
class CapacityError : public Error {
 public:
  CapacityError(std::size_t rows, std::size_t capacity, const std::string& message)
      : Error(message), rows_(rows), capacity_(capacity) {}
  std::size_t rows() const { return rows_; }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t rows_;
  std::size_t capacity_;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

// The remote service answered with something that violates the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A metric is mathematically undefined for the given inputs.
class MetricError : public Error {
 public:
  using Error::Error;
};

// Sequential generation aborted at a given step; no partial result exists.
class GenerationError : public Error {
 public:
  GenerationError(std::size_t step, const std::string& message)
      : Error(message), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace seqdesign
