#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace tdrepair {

// Root of every error the library raises on purpose. Callers that only want
// to report and continue can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed corpus record. Carries the 1-based line and, when known, the id.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, std::string record_id, const std::string& what)
      : Error("line " + std::to_string(line) +
              (record_id.empty() ? "" : " (id " + record_id + ")") + ": " + what),
        line_(line),
        record_id_(std::move(record_id)) {}

  std::size_t line() const { return line_; }
  const std::string& record_id() const { return record_id_; }

 private:
  std::size_t line_;
  std::string record_id_;
};

class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition (e.g. distilling a passing report).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

enum class RejectReason { kParseError, kNotAssert, kMultipleStatements, kForbiddenConstruct };

const char* to_string(RejectReason reason);

class ValidationError : public Error {
 public:
  ValidationError(RejectReason reason, const std::string& detail)
      : Error(std::string(to_string(reason)) + ": " + detail), reason_(reason) {}

  RejectReason reason() const { return reason_; }

 private:
  RejectReason reason_;
};

class TemplateError : public Error {
 public:
  TemplateError(std::string placeholder, const std::string& what)
      : Error(what), placeholder_(std::move(placeholder)) {}

  const std::string& placeholder() const { return placeholder_; }

 private:
  std::string placeholder_;
};

// Transport or provider failure after retries were exhausted (or for a
// non-retryable status).
class BackendError : public Error {
 public:
  BackendError(const std::string& what, std::optional<int> last_status = std::nullopt)
      : Error(what), last_status_(last_status) {}

  std::optional<int> last_status() const { return last_status_; }

 private:
  std::optional<int> last_status_;
};

class CredentialError : public BackendError {
 public:
  using BackendError::BackendError;
};

class EmptyGenerationError : public Error {
 public:
  using Error::Error;
};

class TestgenFormatError : public Error {
 public:
  using Error::Error;
};

// The runner could not be spawned, exited nonzero, or broke the wire
// protocol. Never a test outcome.
class InfrastructureError : public Error {
 public:
  enum class Kind { kSpawnFailure, kRunnerFailure, kProtocolViolation };

  InfrastructureError(Kind kind, const std::string& what, std::string raw_payload = {})
      : Error(what), kind_(kind), raw_payload_(std::move(raw_payload)) {}

  Kind kind() const { return kind_; }
  const std::string& raw_payload() const { return raw_payload_; }

 private:
  Kind kind_;
  std::string raw_payload_;
};

}  // namespace tdrepair
