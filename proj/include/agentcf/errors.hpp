#pragma once

#include <stdexcept>
#include <string>

namespace agentcf {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (bad paths, unmapped routes, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (unreadable files, bad records, precondition violations).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Failures talking to an LLM backend.
class GatewayError : public Error {
 public:
  using Error::Error;
};

/// A non-retryable or exhausted-retries HTTP failure. Carries status and body.
class HttpError : public GatewayError {
 public:
  HttpError(int status, std::string body)
      : GatewayError("HTTP error " + std::to_string(status) + ": " + body),
        status_(status),
        body_(std::move(body)) {}

  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};

/// Request not present in the replay store while running in strict-replay mode.
class ReplayMissError : public GatewayError {
 public:
  explicit ReplayMissError(std::string digest)
      : GatewayError("replay miss for request digest " + digest),
        digest_(std::move(digest)) {}

  const std::string& digest() const { return digest_; }

 private:
  std::string digest_;
};

/// Base class for structured-output parse failures. Carries the raw text.
class ParseError : public Error {
 public:
  ParseError(std::string what, std::string raw)
      : Error(std::move(what)), raw_(std::move(raw)) {}

  const std::string& raw_text() const { return raw_; }

 private:
  std::string raw_;
};

class UnparsableChoice : public ParseError {
 public:
  explicit UnparsableChoice(std::string raw)
      : ParseError("no candidate matched the choice response", std::move(raw)) {}
};

class UnparsableRanking : public ParseError {
 public:
  explicit UnparsableRanking(std::string raw)
      : ParseError("no candidate matched the ranking response", std::move(raw)) {}
};

/// Snapshot/trace documents with a schema version this build does not speak.
class SnapshotError : public Error {
 public:
  using Error::Error;
};

}  // namespace agentcf
