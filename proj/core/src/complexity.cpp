// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#include "airgrad/complexity.hpp"

#include "airgrad/error.hpp"

namespace airgrad {

namespace {

void check_dims(double K, double M, double I) {
  require(K >= 1 && M >= 1, "complexity: K and M must be at least 1");
  require(I >= 0, "complexity: stop index must be nonnegative");
}

}  // namespace

long proposed_multiplications(long K, long M, long I) {
  check_dims(K, M, I);
  // I(I+17) is always even.
  return I * I * M + I * (12 * M * M + 2 * K * M + 11 * M + K) + I * (I + 17) / 2 +
         12 * M * M + 4 * K * M + 10 * M + 2 * K + 7;
}

long mrc_multiplications(long K, long M) {
  check_dims(K, M, 0);
  return 4 * K * M + K;
}

long lmmse_multiplications(long K, long M) {
  check_dims(K, M, 0);
  return 8 * K * M * M - 4 * M * M + 6 * K * M + 2 * M;
}

double proposed_multiplications(double K, double M, double I) {
  check_dims(K, M, I);
  return I * I * (M + 0.5) + I * (12 * M * M + 2 * K * M + 11 * M + K + 8.5) + 12 * M * M +
         4 * K * M + 10 * M + 2 * K + 7;
}

double proposed_multiplications_large(double K, double M, double I) {
  check_dims(K, M, I);
  return I * I * M + I * (12 * M * M + 2 * K * M) + 12 * M * M + 4 * K * M;
}

double mrc_multiplications_large(double K, double M) {
  check_dims(K, M, 0);
  return 4 * K * M;
}

double lmmse_multiplications_large(double K, double M) {
  check_dims(K, M, 0);
  return 8 * K * M * M;
}

double complexity_ratio(double K, double M, double I) {
  const double lmmse = 8 * K * M * M - 4 * M * M + 6 * K * M + 2 * M;
  return proposed_multiplications(K, M, I) / lmmse;
}

double complexity_ratio_large(double K, double M, double I) {
  check_dims(K, M, I);
  return I * I / (8 * K * M) + 3 * I / (2 * K) + I / (4 * M);
}

double complexity_ratio_limit(double M, double I) {
  check_dims(1, M, I);
  return I / (4 * M);
}

}  // namespace airgrad
