#ifndef CONCEPTAG_ERRORS_H_
#define CONCEPTAG_ERRORS_H_

#include <stdexcept>
#include <string>

namespace conceptag {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed dataset line. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(size_t line, const std::string &what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  // Same error with `context` prepended to the message.
  ParseError(const std::string &context, const ParseError &inner)
      : Error(context + inner.what()), line_(inner.line_) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

class EncodingError : public Error {
 public:
  using Error::Error;
};

// Malformed serialized artifact (embeddings, models, checkpoints).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameter or model construction argument.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A feature template or architecture cannot be used with the given data.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class OptimizationError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// Recipe failed validation before any training started.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace conceptag

#endif  // CONCEPTAG_ERRORS_H_
