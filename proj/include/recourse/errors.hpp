#ifndef RECOURSE_ERRORS_HPP
#define RECOURSE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace recourse {

// Root of every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid option, unknown identifier, or inconsistent configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

// A CSV cell or file could not be read as numeric tabular data.
class IngestionError : public Error {
public:
  using Error::Error;
};

// Required column or document field is absent, or a version does not match.
class SchemaError : public Error {
public:
  using Error::Error;
};

// One or more features have zero variance and cannot be standardized.
class DegenerateFeatureError : public Error {
public:
  using Error::Error;
};

class IndexError : public Error {
public:
  using Error::Error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

// The model or generator lacks a capability the operation needs (e.g. gradients on trees).
class CapabilityError : public Error {
public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
  using Error::Error;
};

// Non-finite value encountered during counterfactual search.
class NumericError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class UnsupportedKindError : public Error {
public:
  using Error::Error;
};

}  // namespace recourse

#endif  // RECOURSE_ERRORS_HPP
