#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace totopo {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unparseable input. `line()` is 1-based, 0 when not tied to a line.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Lengths or dimensions that do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value or unknown name.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Precondition on an argument violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Training diverged (non-finite loss).
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Failure inside the end-to-end pipeline, tagged with the stage that raised it.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace totopo
