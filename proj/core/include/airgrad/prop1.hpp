// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace airgrad {

/// Relation between the selected support S and the true support.
///   kMissing:   S is a proper subset of the true support.
///   kExact:     S equals the true support.
///   kOvershoot: S is the true support plus one extra device, selected last.
enum class SupportCase { kMissing = 1, kExact = 2, kOvershoot = 3 };

struct SupportModel {
  Eigen::MatrixXd channels;         // 2M x K
  std::vector<int> true_support;    // devices with x_k = +-sqrt(alpha_k)
  Eigen::VectorXd alpha;            // length K; used on true support and selected devices
};

/// Omega for the given ordered selection, built by the rank-one recursion from I / sigma^2.
Eigen::MatrixXd omega_for_support(const Eigen::MatrixXd& channels, const Eigen::VectorXd& alpha,
                                  const std::vector<int>& selected, double noise_var);

/// Closed-form E||r_i||^2 for the given case. Throws ContractViolation when the
/// selection does not have the relation to the true support that `c` names.
double expected_residual_energy(SupportCase c, const SupportModel& model,
                                const std::vector<int>& selected, double noise_var);

struct Prop1Config {
  int antennas = 16;
  int devices = 8;
  int support_size = 3;
  long trials = 100000;
  std::uint64_t seed = 1;
  double noise_var = 0.5;
};

struct Prop1Row {
  SupportCase which = SupportCase::kExact;
  double analytical = 0.0;
  double empirical = 0.0;
  double relative_error = 0.0;
};

/// Draws one channel and one set of signal powers, then for each constructible
/// case averages ||r||^2 over `trials` independent signal and noise draws.
/// With an empty true support only the exact and overshoot cases exist.
std::vector<Prop1Row> run_prop1(const Prop1Config& cfg);

}  // namespace airgrad
