// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace airgrad {

// Real-multiplication counts per received vector. K devices, M antennas,
// I = stop index of the iterative recovery.

long proposed_multiplications(long K, long M, long I);
long mrc_multiplications(long K, long M);
long lmmse_multiplications(long K, long M);

/// Same polynomial with a fractional (averaged) stop index.
double proposed_multiplications(double K, double M, double I);

// Leading terms only.
double proposed_multiplications_large(double K, double M, double I);
double mrc_multiplications_large(double K, double M);
double lmmse_multiplications_large(double K, double M);

/// proposed / LMMSE with the full polynomials.
double complexity_ratio(double K, double M, double I);
/// I^2/(8KM) + 3I/(2K) + I/(4M).
double complexity_ratio_large(double K, double M, double I);
/// Limit of the large-scale ratio as I/K -> 0 with I and M fixed.
double complexity_ratio_limit(double M, double I);

}  // namespace airgrad
