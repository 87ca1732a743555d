// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#include "airgrad/device_tx.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "airgrad/error.hpp"
#include "airgrad/rng.hpp"

namespace airgrad {

Eigen::VectorXd Permutation::apply(const Eigen::VectorXd& g) const {
  require(g.size() == size(), "permutation length mismatch");
  Eigen::VectorXd x(g.size());
  for (Eigen::Index n = 0; n < size(); ++n) x[n] = g[source[static_cast<std::size_t>(n)]];
  return x;
}

Eigen::VectorXd Permutation::inverse(const Eigen::VectorXd& x) const {
  require(x.size() == size(), "permutation length mismatch");
  Eigen::VectorXd g(x.size());
  for (Eigen::Index n = 0; n < size(); ++n) g[source[static_cast<std::size_t>(n)]] = x[n];
  return g;
}

Permutation make_permutation(std::uint64_t shared_seed, int device, Eigen::Index length) {
  require(length >= 1, "permutation length must be positive");
  Permutation p = identity_permutation(device, length);
  p.seed = shared_seed;
  auto rng = substream(shared_seed, Stream::kPermutation, static_cast<std::uint64_t>(device));
  std::shuffle(p.source.begin(), p.source.end(), rng);
  return p;
}

Permutation identity_permutation(int device, Eigen::Index length) {
  Permutation p;
  p.device = device;
  p.source.resize(static_cast<std::size_t>(length));
  std::iota(p.source.begin(), p.source.end(), Eigen::Index{0});
  return p;
}

TransmitSignal build_transmit_signal(const Eigen::VectorXd& g, const Permutation& perm) {
  require(g.size() == perm.size(), "gradient length must match the permutation");
  TransmitSignal out;
  const double energy = g.squaredNorm();
  if (energy == 0.0) {
    out.x = Eigen::VectorXd::Zero(g.size());
    out.silent = true;
    return out;
  }
  out.x = std::sqrt(static_cast<double>(g.size()) / energy) * perm.apply(g);
  return out;
}

Eigen::VectorXd invert_permutation(const Eigen::VectorXd& x_hat, const Permutation& perm,
                                   double grad_norm) {
  require(x_hat.size() == perm.size(), "estimate length must match the permutation");
  if (grad_norm == 0.0) return Eigen::VectorXd::Zero(x_hat.size());
  return (grad_norm / std::sqrt(static_cast<double>(x_hat.size()))) * perm.inverse(x_hat);
}

TransmitFrame build_frame(const std::vector<GradientVector>& grads,
                          const std::vector<Permutation>& perms) {
  require(!grads.empty() && grads.size() == perms.size(), "one permutation per device");
  const auto k_count = static_cast<Eigen::Index>(grads.size());
  const auto length = grads.front().g.size();
  TransmitFrame frame;
  frame.x.resize(k_count, length);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const auto& gv = grads[static_cast<std::size_t>(k)];
    auto sig = build_transmit_signal(gv.g, perms[static_cast<std::size_t>(k)]);
    frame.x.row(k) = sig.x.transpose();
    frame.grad_norms.push_back(gv.norm);
    frame.batch_sizes.push_back(gv.batch_size);
    frame.silent.push_back(sig.silent);
  }
  return frame;
}

Eigen::VectorXd magnitude_ratio(const Eigen::Ref<const Eigen::VectorXd>& x) {
  require(x.size() >= 1, "need at least one device");
  const double peak = x.cwiseAbs().maxCoeff();
  if (peak == 0.0) return Eigen::VectorXd::Zero(x.size());
  return x.cwiseAbs() / peak;
}

}  // namespace airgrad
