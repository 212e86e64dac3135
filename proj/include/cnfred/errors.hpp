#pragma once

#include <stdexcept>
#include <string>

namespace cnfred {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ParseErrorKind {
  malformed_header,
  literal_out_of_range,
  tautology,
  truncated_clause,
  clause_count_mismatch,
  bad_token,
};

const char *to_string(ParseErrorKind kind);

class ParseError : public Error {
public:
  ParseError(ParseErrorKind kind, int line, const std::string &detail)
      : Error(std::string(to_string(kind)) + " (line " + std::to_string(line) +
              "): " + detail),
        kind_(kind), line_(line) {}

  ParseErrorKind kind() const { return kind_; }
  int line() const { return line_; }

private:
  ParseErrorKind kind_;
  int line_;
};

// A decomposition that does not fit the graph it claims to decompose.
class ValidationError : public Error {
public:
  using Error::Error;
};

// Inputs that violate an operation's structural precondition.
class PreconditionError : public Error {
public:
  using Error::Error;
};

class LimitError : public Error {
public:
  using Error::Error;
};

} // namespace cnfred
