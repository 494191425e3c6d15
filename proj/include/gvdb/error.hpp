#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace gvdb {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class EncodingError : public Error {
public:
  EncodingError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// Carries the offending parameter name so callers (the HTTP layer in
// particular) can report it in a machine-readable way.
class InvalidParameter : public Error {
public:
  InvalidParameter(std::string param, const std::string& what)
      : Error(param + ": " + what), param_(std::move(param)) {}

  const std::string& param() const noexcept { return param_; }

private:
  std::string param_;
};

class ContractViolation : public Error {
public:
  using Error::Error;
};

// Store errors name the section (e.g. "node table") they concern.
class StoreError : public Error {
public:
  StoreError(std::string section, const std::string& what)
      : Error(section + ": " + what), section_(std::move(section)) {}

  const std::string& section() const noexcept { return section_; }

private:
  std::string section_;
};

class IoError : public StoreError {
public:
  using StoreError::StoreError;
};

class ChecksumError : public StoreError {
public:
  using StoreError::StoreError;
};

class VersionError : public StoreError {
public:
  using StoreError::StoreError;
};

class MissingManifestError : public StoreError {
public:
  using StoreError::StoreError;
};

}  // namespace gvdb
