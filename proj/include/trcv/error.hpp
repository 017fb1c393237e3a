#pragma once

#include <stdexcept>
#include <string>

namespace trcv {

enum class ErrorKind {
  dimension,  // shape mismatch between arguments
  numeric,    // backend failure, non-finite values, degenerate statistics
  singular,   // a correction block or operator could not be inverted
  rank,       // rank-deficient input where full rank is required
  contract,   // caller violated a documented precondition
  input,      // malformed or inconsistent input files
  config,     // invalid run configuration
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error{what}, kind_{kind} {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace trcv
