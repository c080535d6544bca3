#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aortamc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
  SyntaxError(const std::string& what, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line), column_(column), message_(what) {}

  /// Same error, attributed to a file.
  SyntaxError(const SyntaxError& inner, const std::string& file)
      : Error(file + ":" + inner.what()), line_(inner.line_), column_(inner.column_),
        message_(inner.message_) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

// Query evaluation reached a negated or inequality conjunct that still has variables.
class NonGroundNegation : public Error {
public:
  using Error::Error;
};

class UnboundActionVariable : public Error {
public:
  using Error::Error;
};

class UnknownRecipient : public Error {
public:
  using Error::Error;
};

class UnsupportedFeature : public Error {
public:
  using Error::Error;
};

class InvalidOrgSpec : public Error {
public:
  using Error::Error;
};

class UnknownRoleInSpec : public InvalidOrgSpec {
public:
  using InvalidOrgSpec::InvalidOrgSpec;
};

class DuplicateAgentName : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class InactiveAgentChosen : public Error {
public:
  using Error::Error;
};

class UnknownAgent : public Error {
public:
  using Error::Error;
};

class NonGroundAtom : public Error {
public:
  using Error::Error;
};

class MalformedModel : public Error {
public:
  using Error::Error;
};

/// Exploration exceeded the configured state cap. Not a verdict.
class ResourceLimit : public Error {
public:
  using Error::Error;
};

} // namespace aortamc
