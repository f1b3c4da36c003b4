#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ltc {

// Base of every recoverable failure raised by the library. The CLI maps the
// three families below onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or flags. Exit code 2.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed or unusable input data, files, checkpoints. Exit code 3.
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or likelihood. Exit code 4.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyCorpusError : public DataError {
 public:
  using DataError::DataError;
};

class StratificationError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyClassError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyVocabularyError : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  FormatError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class VersionMismatchError : public DataError {
 public:
  using DataError::DataError;
};

class HashMismatchError : public DataError {
 public:
  using DataError::DataError;
};

class TruncatedFileError : public DataError {
 public:
  using DataError::DataError;
};

// A model with no usable class was asked to predict.
class StateError : public DataError {
 public:
  using DataError::DataError;
};

// Caller broke a documented precondition (shape mismatch, out-of-range id).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ltc
