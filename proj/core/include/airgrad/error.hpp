// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace airgrad {

/// Invalid experiment or model configuration (bad K, nonpositive variance, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input file does not follow the expected binary layout.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two inputs that must agree (e.g. image and label files) do not.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a function precondition (shape mismatch, empty batch, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw ContractViolation(what);
}

}  // namespace airgrad
