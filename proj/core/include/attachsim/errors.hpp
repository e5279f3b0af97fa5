#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace attachsim {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration, profile, channel or policy.
class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// A log line that cannot be decoded; line numbers are 1-based.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

class MalformedRecord : public Error {
public:
  using Error::Error;
};

class EmptyWindow : public Error {
public:
  using Error::Error;
};

class DegenerateInput : public Error {
public:
  using Error::Error;
};

}  // namespace attachsim
