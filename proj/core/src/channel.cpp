// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#include "airgrad/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "airgrad/error.hpp"

namespace airgrad {

Cir draw_cir(int num_taps, double per_tap_variance, Rng& rng) {
  if (num_taps < 1) throw ConfigError("CIR needs at least one tap");
  if (!(per_tap_variance > 0.0)) throw ConfigError("CIR tap variance must be positive");
  std::normal_distribution<double> gauss(0.0, std::sqrt(per_tap_variance / 2.0));
  Cir cir;
  cir.taps.reserve(static_cast<std::size_t>(num_taps));
  for (int l = 0; l < num_taps; ++l) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    cir.taps.emplace_back(re, im);
  }
  return cir;
}

Complex frequency_response_at(std::span<const Complex> taps, long subcarrier,
                              long num_subcarriers) {
  Complex acc{0.0, 0.0};
  for (std::size_t l = 0; l < taps.size(); ++l) {
    // Reduce the phase index first so that large f*l keeps full precision.
    const long k = (subcarrier * static_cast<long>(l)) % num_subcarriers;
    const double phase = -2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(num_subcarriers);
    acc += taps[l] * std::polar(1.0, phase);
  }
  return acc;
}

std::vector<Complex> frequency_response(const Cir& cir, long num_subcarriers) {
  if (num_subcarriers < 1 || static_cast<long>(cir.taps.size()) > num_subcarriers) {
    throw ConfigError("CIR length exceeds the number of subcarriers");
  }
  std::vector<Complex> out(static_cast<std::size_t>(num_subcarriers));
  for (long f = 0; f < num_subcarriers; ++f) {
    out[static_cast<std::size_t>(f)] = frequency_response_at(cir.taps, f, num_subcarriers);
  }
  return out;
}

ResourceChannel assemble_real_channel(std::vector<Eigen::VectorXcd> responses, int antennas,
                                      int devices) {
  require(static_cast<int>(responses.size()) == devices, "expected one response per device");
  ResourceChannel rc;
  rc.real.resize(2 * antennas, devices);
  for (int k = 0; k < devices; ++k) {
    const auto& h = responses[static_cast<std::size_t>(k)];
    require(h.size() == antennas, "response length must equal the antenna count");
    rc.real.col(k).head(antennas) = h.real();
    rc.real.col(k).tail(antennas) = h.imag();
  }
  rc.responses = std::move(responses);
  return rc;
}

ResourceLocation resource_index_map(long n, long num_subcarriers, long num_resources) {
  require(num_subcarriers >= 1, "need at least one subcarrier");
  require(n >= 1 && n <= num_resources, "resource index out of range");
  ResourceLocation loc;
  loc.symbol = (n + num_subcarriers - 1) / num_subcarriers;
  loc.subcarrier = n - (loc.symbol - 1) * num_subcarriers;
  return loc;
}

long resource_index(ResourceLocation loc, long num_subcarriers) {
  return (loc.symbol - 1) * num_subcarriers + loc.subcarrier;
}

Eigen::VectorXd transmit_over_resource(const Eigen::MatrixXd& channel, const Eigen::VectorXd& x,
                                       double noise_var, Rng& rng) {
  require(channel.cols() == x.size(), "transmit vector length must equal the device count");
  require(noise_var >= 0.0, "noise variance must be nonnegative");
  Eigen::VectorXd y = channel * x;
  if (noise_var > 0.0) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise_var));
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += gauss(rng);
  }
  return y;
}

void ChannelConfig::validate() const {
  if (antennas < 1) throw ConfigError("M must be at least 1");
  if (taps < 1) throw ConfigError("L must be at least 1");
  if (num_subcarriers < taps) throw ConfigError("N_sub must be at least L");
  if (!(tap_variance > 0.0)) throw ConfigError("tap variance must be positive");
  if (!(noise.complex_variance > 0.0)) throw ConfigError("noise variance must be positive");
}

RoundChannel::RoundChannel(const ChannelConfig& cfg, int devices, std::uint64_t seed, long round)
    : cfg_(cfg), devices_(devices) {
  cfg_.validate();
  require(devices >= 1, "need at least one device");
  cirs_.reserve(static_cast<std::size_t>(devices) * static_cast<std::size_t>(cfg.antennas));
  for (int k = 0; k < devices; ++k) {
    auto rng = substream(seed, Stream::kChannel, static_cast<std::uint64_t>(round),
                         static_cast<std::uint64_t>(k));
    for (int m = 0; m < cfg.antennas; ++m) {
      Cir c = draw_cir(cfg.taps, cfg.tap_variance, rng);
      c.device = k;
      c.antenna = m;
      c.round = round;
      cirs_.push_back(std::move(c));
    }
  }
}

const Cir& RoundChannel::cir(int device, int antenna) const {
  require(device >= 0 && device < devices_ && antenna >= 0 && antenna < cfg_.antennas,
          "CIR index out of range");
  return cirs_[static_cast<std::size_t>(device) * static_cast<std::size_t>(cfg_.antennas) +
               static_cast<std::size_t>(antenna)];
}

Eigen::MatrixXd RoundChannel::real_matrix(long subcarrier) const {
  require(subcarrier >= 0 && subcarrier < cfg_.num_subcarriers, "subcarrier out of range");
  const int m_count = cfg_.antennas;
  std::vector<Complex> twiddle(static_cast<std::size_t>(cfg_.taps));
  for (int l = 0; l < cfg_.taps; ++l) {
    const long k = (subcarrier * l) % cfg_.num_subcarriers;
    twiddle[static_cast<std::size_t>(l)] =
        std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                            static_cast<double>(cfg_.num_subcarriers));
  }
  Eigen::MatrixXd h(2 * m_count, devices_);
  for (int k = 0; k < devices_; ++k) {
    for (int m = 0; m < m_count; ++m) {
      const auto& taps = cir(k, m).taps;
      Complex acc{0.0, 0.0};
      for (std::size_t l = 0; l < taps.size(); ++l) acc += taps[l] * twiddle[l];
      h(m, k) = acc.real();
      h(m_count + m, k) = acc.imag();
    }
  }
  return h;
}

std::vector<Eigen::VectorXcd> RoundChannel::responses(long subcarrier) const {
  require(subcarrier >= 0 && subcarrier < cfg_.num_subcarriers, "subcarrier out of range");
  std::vector<Eigen::VectorXcd> out(static_cast<std::size_t>(devices_),
                                    Eigen::VectorXcd(cfg_.antennas));
  for (int k = 0; k < devices_; ++k) {
    for (int m = 0; m < cfg_.antennas; ++m) {
      out[static_cast<std::size_t>(k)][m] =
          frequency_response_at(cir(k, m).taps, subcarrier, cfg_.num_subcarriers);
    }
  }
  return out;
}

}  // namespace airgrad
