#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace ssdsim {

// Broad failure classes; the CLI maps each one to an exit code.
enum class ErrorCategory { Config, Workload, Request, Invariant };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string &what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

// Malformed configuration text.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string &what)
      : Error(ErrorCategory::Config, what) {}
};

// A configuration value violates a documented invariant. key() names it.
class ValidationError : public Error {
 public:
  ValidationError(std::string key, const std::string &what)
      : Error(ErrorCategory::Config, key + ": " + what), key_(std::move(key)) {}

  const std::string &key() const noexcept { return key_; }

 private:
  std::string key_;
};

class TraceParseError : public Error {
 public:
  TraceParseError(std::size_t line, const std::string &what)
      : Error(ErrorCategory::Workload,
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class OrderError : public Error {
 public:
  OrderError(std::size_t line, const std::string &what)
      : Error(ErrorCategory::Workload,
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class OutOfRange : public Error {
 public:
  explicit OutOfRange(const std::string &what)
      : Error(ErrorCategory::Request, what) {}
};

class UnknownRequest : public Error {
 public:
  explicit UnknownRequest(const std::string &what)
      : Error(ErrorCategory::Request, what) {}
};

class UnmappedRead : public Error {
 public:
  explicit UnmappedRead(const std::string &what)
      : Error(ErrorCategory::Request, what) {}
};

// Internal invariant failures. These indicate a broken model or a
// configuration that slipped past validation, and are never recoverable.
class DeviceFull : public Error {
 public:
  explicit DeviceFull(const std::string &what)
      : Error(ErrorCategory::Invariant, what) {}
};

class NoVictim : public Error {
 public:
  explicit NoVictim(const std::string &what)
      : Error(ErrorCategory::Invariant, what) {}
};

class EmptyPool : public Error {
 public:
  explicit EmptyPool(const std::string &what)
      : Error(ErrorCategory::Invariant, what) {}
};

class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string &what)
      : Error(ErrorCategory::Invariant, what) {}
};

}  // namespace ssdsim
