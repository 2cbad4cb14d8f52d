// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace rase {

/// Failure category. Each category maps onto one CLI exit code.
enum class ErrorKind {
  Domain,      // argument outside its admissible range
  Config,      // malformed or inconsistent configuration
  Io,          // cannot open/write a path
  Format,      // malformed shot file or CSV
  Convention,  // Intrinsic/Measured mix-up
  Numeric,     // invalid state, factorization, calibration or fit failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace rase
