#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dlmparse {

// Base of every error thrown by the library. `kind()` is a short stable token
// used in machine-readable CLI error lines.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Malformed CoNLL line. `line` is 1-based; `source` names the file when known.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& msg, const std::string& source = "")
      : Error("parse", (source.empty() ? "line " : source + ":") + std::to_string(line) + ": " + msg),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Structurally invalid sentence (cycle, out-of-range head, bad ids).
// `sentence` is the 0-based index within the treebank.
class ValidationError : public Error {
 public:
  ValidationError(std::size_t sentence, const std::string& msg, const std::string& source = "")
      : Error("validation", (source.empty() ? "" : source + ": ") + "sentence " +
                                std::to_string(sentence) + ": " + msg),
        sentence_(sentence) {}
  std::size_t sentence() const noexcept { return sentence_; }

 private:
  std::size_t sentence_;
};

class SerializationError : public Error {
 public:
  explicit SerializationError(const std::string& msg) : Error("serialization", msg) {}
};

// Bad DLM table or model file. `line` is 0 when not line-specific.
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& msg)
      : Error("format", line ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class VersionError : public Error {
 public:
  explicit VersionError(const std::string& msg) : Error("version", msg) {}
};

// Precondition of an API call was violated by the caller.
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& msg) : Error("contract", msg) {}
};

class OracleError : public Error {
 public:
  explicit OracleError(const std::string& msg) : Error("oracle", msg) {}
};

// Two corpora that should be sentence/token aligned are not.
class AlignmentError : public Error {
 public:
  AlignmentError(std::size_t sentence, const std::string& msg)
      : Error("alignment", "sentence " + std::to_string(sentence) + ": " + msg),
        sentence_(sentence) {}
  std::size_t sentence() const noexcept { return sentence_; }

 private:
  std::size_t sentence_;
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& msg) : Error("training", msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error("io", msg) {}
};

}  // namespace dlmparse
