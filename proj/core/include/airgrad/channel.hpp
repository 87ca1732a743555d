// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "airgrad/rng.hpp"

namespace airgrad {

using Complex = std::complex<double>;

/// L-tap impulse response of one device-to-antenna link.
struct Cir {
  std::vector<Complex> taps;
  int device = 0;
  int antenna = 0;
  long round = 0;
};

/// i.i.d. circularly symmetric Gaussian taps, each with the given variance.
Cir draw_cir(int num_taps, double per_tap_variance, Rng& rng);

/// Response at 0-based subcarrier f: sum_l taps[l] exp(-j 2 pi f l / N_sub).
Complex frequency_response_at(std::span<const Complex> taps, long subcarrier, long num_subcarriers);

/// Response at every subcarrier. Requires taps.size() <= N_sub.
std::vector<Complex> frequency_response(const Cir& cir, long num_subcarriers);

/// Complex noise variance sigma_c^2 and its per-real-dimension half.
struct NoiseModel {
  double complex_variance = 1.0;
  double real_variance() const { return complex_variance / 2.0; }
};

/// Complex per-device responses at one radio resource and the stacked real
/// 2M x K matrix; column k is [Re(h_k); Im(h_k)].
struct ResourceChannel {
  long round = 0;
  long resource = 0;
  std::vector<Eigen::VectorXcd> responses;
  Eigen::MatrixXd real;
};

ResourceChannel assemble_real_channel(std::vector<Eigen::VectorXcd> responses, int antennas,
                                      int devices);

/// 1-based (subcarrier f_n, OFDM symbol u_n) carrying resource n.
struct ResourceLocation {
  long subcarrier = 1;
  long symbol = 1;
};

ResourceLocation resource_index_map(long n, long num_subcarriers, long num_resources);
long resource_index(ResourceLocation loc, long num_subcarriers);

/// y = H x + z with z ~ N(0, noise_var I).
Eigen::VectorXd transmit_over_resource(const Eigen::MatrixXd& channel, const Eigen::VectorXd& x,
                                       double noise_var, Rng& rng);

struct ChannelConfig {
  int antennas = 25;
  int taps = 10;
  double tap_variance = 0.1;
  long num_subcarriers = 1024;
  NoiseModel noise{};

  void validate() const;
};

/// Every device/antenna CIR for one communication round. Draws come from the
/// (seed, round, device) substream, so the realization for a device does not
/// depend on how many other devices exist.
class RoundChannel {
 public:
  RoundChannel(const ChannelConfig& cfg, int devices, std::uint64_t seed, long round);

  int devices() const { return devices_; }
  int antennas() const { return cfg_.antennas; }
  const Cir& cir(int device, int antenna) const;

  /// Real-domain 2M x K matrix at 0-based subcarrier f.
  Eigen::MatrixXd real_matrix(long subcarrier) const;

  /// Complex responses (one length-M vector per device) at 0-based subcarrier f.
  std::vector<Eigen::VectorXcd> responses(long subcarrier) const;

 private:
  ChannelConfig cfg_;
  int devices_;
  std::vector<Cir> cirs_;  // device-major
};

}  // namespace airgrad
