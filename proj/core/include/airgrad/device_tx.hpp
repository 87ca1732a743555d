// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "airgrad/mlp.hpp"

namespace airgrad {

/// Bijection on gradient positions. Transmit position n carries gradient
/// entry source[n], i.e. (P g)_n = g_{source[n]}.
struct Permutation {
  int device = 0;
  std::uint64_t seed = 0;
  std::vector<Eigen::Index> source;

  Eigen::Index size() const { return static_cast<Eigen::Index>(source.size()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& g) const;    // P g
  Eigen::VectorXd inverse(const Eigen::VectorXd& x) const;  // P^T x
};

/// Uniform permutation from an unbiased shuffle of the (shared_seed, k)
/// substream. The server calls this with the same arguments to rebuild it.
Permutation make_permutation(std::uint64_t shared_seed, int device, Eigen::Index length);

Permutation identity_permutation(int device, Eigen::Index length);

struct TransmitSignal {
  Eigen::VectorXd x;
  bool silent = false;  // gradient was exactly zero; x is all zeros
};

/// x = sqrt(N_w / ||g||^2) P g, so that ||x||^2 = N_w.
TransmitSignal build_transmit_signal(const Eigen::VectorXd& g, const Permutation& perm);

/// g_hat = sqrt(||g||^2 / N_w) P^T x_hat. A zero norm yields the zero vector.
Eigen::VectorXd invert_permutation(const Eigen::VectorXd& x_hat, const Permutation& perm,
                                   double grad_norm);

/// Per-device signals for one round: column n holds x[t, n] across devices.
struct TransmitFrame {
  Eigen::MatrixXd x;  // K x N_w
  std::vector<double> grad_norms;
  std::vector<int> batch_sizes;
  std::vector<bool> silent;

  int devices() const { return static_cast<int>(x.rows()); }
};

TransmitFrame build_frame(const std::vector<GradientVector>& grads,
                          const std::vector<Permutation>& perms);

/// xi_k = |x_k| / max_k' |x_k'|; all zeros when the input is all zeros.
Eigen::VectorXd magnitude_ratio(const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace airgrad
