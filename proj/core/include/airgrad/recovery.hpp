// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace airgrad {

/// Server-side reconstruction strategies. `kPerfect` bypasses the channel.
enum class Method { kProposed, kMrc, kLmmse, kPerfect };

std::string_view to_string(Method m);
/// Accepts "proposed", "mrc", "lmmse", "perfect". Throws ConfigError otherwise.
Method parse_method(std::string_view name);

// ---------------------------------------------------------------------------
// Building blocks of the iterative LMMSE recovery
// ---------------------------------------------------------------------------

struct Selection {
  int index = -1;       // chosen device, -1 when every candidate is excluded
  double metric = 0.0;  // |h_k^T r|^2 / ||h_k||^2
  double correlation = 0.0;  // h_k^T r
};

/// Picks argmax over non-excluded k of |h_k^T r|^2 / ||h_k||^2. Ties go to the
/// smallest index. Zero-norm columns are never chosen. Throws ContractViolation
/// if no candidate remains.
Selection select_index(const Eigen::MatrixXd& channels, const Eigen::VectorXd& residual,
                       const std::vector<bool>& excluded);

/// |h^T r|^2 / ||h||^4, the large-array estimate of |x_k|^2.
double alpha_estimate(const Eigen::VectorXd& h, const Eigen::VectorXd& residual);

/// Sherman-Morrison step: (Omega^-1 + alpha h h^T)^-1 from Omega.
Eigen::MatrixXd omega_update(const Eigen::MatrixXd& omega_prev, const Eigen::VectorXd& h,
                             double alpha);

/// r = sigma^2 Omega y, equal to y - H_S x_hat_S for the current support.
Eigen::VectorXd residual(const Eigen::MatrixXd& omega, const Eigen::VectorXd& y,
                         double noise_var);

/// sigma^4 [Tr(Omega_i) - (Tr(Omega_{i-1}) - Tr(Omega_i)) / (2 (1 + quad))],
/// where quad = alpha h^T Omega_{i-1} h for the last selected device.
double stopping_threshold(double trace_prev, double trace_curr, double quad, double noise_var);

double stopping_threshold(const Eigen::MatrixXd& omega_prev, const Eigen::MatrixXd& omega_curr,
                          double alpha_last, const Eigen::VectorXd& h_last, double noise_var);

// ---------------------------------------------------------------------------
// Full recovery
// ---------------------------------------------------------------------------

struct CsOptions {
  /// Apply the residual-energy stopping rule. When false the loop runs to the end.
  bool stopping = true;
  /// Replace argmax selection with this sequence of device indices (0-based).
  std::vector<int> forced_support;
  /// Keep per-iteration Omega and residual snapshots in the result.
  bool trace = false;
};

struct IterationTrace {
  int device = -1;
  double alpha = 0.0;
  Eigen::MatrixXd omega;
  Eigen::VectorXd residual;
  double residual_energy = 0.0;
  double threshold = 0.0;
};

struct RecoveryResult {
  Eigen::VectorXd x_hat;      // length K, zero off the support
  std::vector<int> support;   // S_{I*}, in selection order
  std::vector<double> alphas; // alpha per support entry
  int stop_index = 0;         // I*
  long multiplications = 0;   // measured count, informational
  std::vector<double> residual_energies;  // ||r_i||^2 for every iteration run
  std::vector<double> thresholds;         // E_th^(i) for every iteration run
  std::vector<int> skipped;               // zero-norm channel columns
  std::vector<IterationTrace> trace;
};

/// Per-channel state for the iterative LMMSE recovery. Column norms are
/// computed once and reused for every received vector that shares H.
class CsRecovery {
 public:
  CsRecovery(Eigen::MatrixXd channels, double noise_var);

  RecoveryResult recover(const Eigen::VectorXd& y, const CsOptions& options = {}) const;

  const Eigen::MatrixXd& channels() const { return h_; }
  double noise_var() const { return noise_var_; }

 private:
  Eigen::MatrixXd h_;
  Eigen::VectorXd norms2_;
  double noise_var_;
};

RecoveryResult cs_recover(const Eigen::VectorXd& y, const Eigen::MatrixXd& channels,
                          double noise_var, const CsOptions& options = {});

/// x_hat_k = h_k^T y / ||h_k||^2. Zero-norm columns yield 0 and are listed in `skipped`.
class MrcCombiner {
 public:
  explicit MrcCombiner(const Eigen::MatrixXd& channels);
  Eigen::VectorXd recover(const Eigen::VectorXd& y) const;
  const std::vector<int>& skipped() const { return skipped_; }

 private:
  Eigen::MatrixXd combiner_;  // K x 2M
  std::vector<int> skipped_;
};

Eigen::VectorXd mrc_recover(const Eigen::VectorXd& y, const Eigen::MatrixXd& channels);

/// x_hat = H^T (H H^T + sigma^2 I)^-1 y (zero prior mean, identity prior covariance).
/// The filter is formed once per channel, in whichever of the two equivalent
/// shapes needs the smaller inverse.
class LmmseFilter {
 public:
  LmmseFilter(const Eigen::MatrixXd& channels, double noise_var);
  Eigen::VectorXd recover(const Eigen::VectorXd& y) const { return filter_ * y; }
  const Eigen::MatrixXd& filter() const { return filter_; }

 private:
  Eigen::MatrixXd filter_;  // K x 2M
};

Eigen::VectorXd lmmse_recover(const Eigen::VectorXd& y, const Eigen::MatrixXd& channels,
                              double noise_var);

// ---------------------------------------------------------------------------
// Uniform interface used by the training loop
// ---------------------------------------------------------------------------

struct Detection {
  Eigen::VectorXd x_hat;
  std::optional<int> stop_index;  // only the iterative method reports I*
  long multiplications = 0;
  std::vector<double> residual_energies;
  std::vector<double> thresholds;
};

class Detector {
 public:
  virtual ~Detector() = default;
  virtual Method method() const = 0;
  /// Called once per distinct channel matrix before any detect().
  virtual void set_channel(const Eigen::MatrixXd& channels) = 0;
  virtual Detection detect(const Eigen::VectorXd& y) const = 0;
};

/// Throws ContractViolation for Method::kPerfect, which never touches the channel.
std::unique_ptr<Detector> make_detector(Method method, double noise_var);

}  // namespace airgrad
