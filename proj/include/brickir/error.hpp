#ifndef BRICKIR_ERROR_HPP
#define BRICKIR_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace brickir {

/// Base class for every error raised by the library. `code()` is a short,
/// stable, machine-readable identifier ("non-finite-angle", "parse", ...).
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

/// Malformed LDraw input. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
  ParseError(std::string code, const std::string& message, std::size_t line = 0)
      : Error(std::move(code), line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Missing or inconsistent catalog / annotation data.
class CatalogError : public Error {
public:
  using Error::Error;
};

}  // namespace brickir

#endif  // BRICKIR_ERROR_HPP
