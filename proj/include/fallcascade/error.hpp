#pragma once

#include <exception>
#include <string>
#include <utility>

namespace fallcascade {

// Base of every error raised by the library. The optional stage tag is
// prepended to the message when a pipeline stage rethrows.
class Error : public std::exception {
 public:
  explicit Error(std::string message) : message_(std::move(message)) {}

  const char* what() const noexcept override { return rendered_.empty() ? message_.c_str() : rendered_.c_str(); }

  const std::string& message() const noexcept { return message_; }
  const std::string& stage() const noexcept { return stage_; }

  void set_stage(std::string stage) {
    stage_ = std::move(stage);
    rendered_ = "[" + stage_ + "] " + message_;
  }

 private:
  std::string message_;
  std::string stage_;
  std::string rendered_;
};

// Invalid configuration or arguments (CLI exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bad input data (CLI exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class LoadError : public DataError {
 public:
  using DataError::DataError;
};

class UnsupportedVersionError : public LoadError {
 public:
  using LoadError::LoadError;
};

// Optimization failed or training data cannot be trained on (CLI exit code 3).
class TrainingError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage produced an unusable intermediate result (CLI exit code 3).
class PipelineError : public TrainingError {
 public:
  using TrainingError::TrainingError;
};

// Broken internal contract, e.g. a cache used with the wrong network.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fallcascade
