// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#include "airgrad/orchestrator.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "airgrad/error.hpp"
#include "airgrad/rng.hpp"

namespace airgrad {

namespace {

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) {
    throw ConfigError("batch: bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

BatchPolicy BatchPolicy::parse(std::string_view text) {
  if (text == "stochastic") return stochastic();
  constexpr std::string_view prefix = "minibatch:";
  if (text.substr(0, prefix.size()) != prefix) {
    throw ConfigError("batch: expected 'stochastic' or 'minibatch:lo,hi', got '" +
                      std::string(text) + "'");
  }
  auto rest = text.substr(prefix.size());
  const auto comma = rest.find(',');
  if (comma == std::string_view::npos) throw ConfigError("batch: minibatch needs 'lo,hi'");
  auto p = minibatch(parse_int(rest.substr(0, comma), "lower bound"),
                     parse_int(rest.substr(comma + 1), "upper bound"));
  p.validate();
  return p;
}

std::string BatchPolicy::to_string() const {
  if (mode == Mode::kStochastic) return "stochastic";
  return "minibatch:" + std::to_string(lo) + "," + std::to_string(hi);
}

void BatchPolicy::validate() const {
  if (mode == Mode::kStochastic) {
    if (lo != 1 || hi != 1) throw ConfigError("batch: stochastic mode uses size 1");
    return;
  }
  if (lo < 1 || hi < lo) throw ConfigError("batch: need 1 <= lo <= hi");
}

std::vector<int> draw_batch_sizes(const BatchPolicy& policy, int devices, std::uint64_t seed,
                                  long round) {
  policy.validate();
  std::vector<int> sizes(static_cast<std::size_t>(devices), 1);
  if (policy.mode == BatchPolicy::Mode::kStochastic) return sizes;
  const auto r = static_cast<std::uint64_t>(policy.fixed ? 0 : round);
  for (int k = 0; k < devices; ++k) {
    auto rng = substream(seed, Stream::kBatchSize, r, static_cast<std::uint64_t>(k));
    sizes[static_cast<std::size_t>(k)] = std::uniform_int_distribution<int>(policy.lo, policy.hi)(rng);
  }
  return sizes;
}

Eigen::VectorXd aggregate(const std::vector<Eigen::VectorXd>& estimates,
                          const std::vector<int>& batch_sizes) {
  require(!estimates.empty() && estimates.size() == batch_sizes.size(),
          "aggregate: one batch size per device");
  long total = 0;
  for (int b : batch_sizes) {
    require(b >= 0, "aggregate: negative batch size");
    total += b;
  }
  require(total > 0, "aggregate: all batch sizes are zero");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(estimates.front().size());
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    require(estimates[k].size() == out.size(), "aggregate: length mismatch");
    if (batch_sizes[k] == 0) continue;
    out.noalias() += (static_cast<double>(batch_sizes[k]) / static_cast<double>(total)) * estimates[k];
  }
  return out;
}

void TrainingConfig::validate() const {
  if (devices < 1) throw ConfigError("K must be at least 1");
  channel.validate();
  batch.validate();
}

Federation::Federation(TrainingConfig cfg, const Dataset& train, const Dataset* test)
    : cfg_(std::move(cfg)), train_(train), test_(test) {
  cfg_.validate();
  auto rng = substream(cfg_.seed, Stream::kPartition);
  local_ = partition_non_iid(train_, cfg_.devices, rng, cfg_.partition);
  perms_.reserve(static_cast<std::size_t>(cfg_.devices));
  for (int k = 0; k < cfg_.devices; ++k) {
    perms_.push_back(cfg_.permute ? make_permutation(cfg_.seed, k, kNumParams)
                                  : identity_permutation(k, kNumParams));
  }
}

ModelState Federation::initial_model() const {
  auto rng = substream(cfg_.seed, Stream::kInit);
  return init_model(rng);
}

std::vector<GradientVector> Federation::local_gradients(const Eigen::VectorXd& w,
                                                        long round) const {
  const auto sizes = draw_batch_sizes(cfg_.batch, cfg_.devices, cfg_.seed, round);
  std::vector<GradientVector> grads;
  grads.reserve(local_.size());
  std::vector<std::size_t> batch;
  for (const auto& dev : local_) {
    const auto want = static_cast<std::size_t>(sizes[static_cast<std::size_t>(dev.device)]);
    require(want <= dev.indices.size(), "batch larger than the local dataset");
    auto rng = substream(cfg_.seed, Stream::kBatch, static_cast<std::uint64_t>(round),
                         static_cast<std::uint64_t>(dev.device));
    batch.clear();
    std::sample(dev.indices.begin(), dev.indices.end(), std::back_inserter(batch), want, rng);
    grads.push_back(local_gradient(w, train_, batch));
  }
  return grads;
}

double Federation::test_accuracy(const Eigen::VectorXd& w) const {
  return test_ ? evaluate_accuracy(w, *test_) : kNaN;
}

RoundOutcome Federation::run_round(const ModelState& state, long round, Method method,
                                   const ResourceObserver& observer) const {
  const auto start = std::chrono::steady_clock::now();
  const int k_count = cfg_.devices;
  const long n_w = kNumParams;
  const long n_sub = cfg_.channel.num_subcarriers;

  RoundRecord rec;
  rec.round = round;
  rec.method = method;

  const auto grads = local_gradients(state.w, round);
  const TransmitFrame frame = build_frame(grads, perms_);
  rec.grad_norms = frame.grad_norms;
  rec.batch_sizes = frame.batch_sizes;

  Eigen::MatrixXd x_hat;
  long stop_sum = 0;
  if (method == Method::kPerfect) {
    x_hat = frame.x;
    if (observer) {
      for (long n0 = 0; n0 < n_w; ++n0) {
        observer({round, n0 + 1, resource_index_map(n0 + 1, n_sub, n_w), frame.x.col(n0), nullptr});
      }
    }
  } else {
    x_hat = Eigen::MatrixXd::Zero(k_count, n_w);
    const double noise_var = cfg_.channel.noise.real_variance();
    const RoundChannel channel(cfg_.channel, k_count, cfg_.seed, round);
    auto detector = make_detector(method, noise_var);
    // The channel only depends on the subcarrier, so each H is built once and
    // reused for every OFDM symbol that carries that subcarrier.
    for (long f0 = 0; f0 < std::min(n_sub, n_w); ++f0) {
      const Eigen::MatrixXd h = channel.real_matrix(f0);
      detector->set_channel(h);
      for (long n0 = f0; n0 < n_w; n0 += n_sub) {
        auto rng = substream(cfg_.seed, Stream::kNoise, static_cast<std::uint64_t>(round),
                             static_cast<std::uint64_t>(n0 + 1));
        const Eigen::VectorXd x = frame.x.col(n0);
        const Eigen::VectorXd y = transmit_over_resource(h, x, noise_var, rng);
        const Detection det = detector->detect(y);
        x_hat.col(n0) = det.x_hat;
        if (det.stop_index) stop_sum += *det.stop_index;
        ++rec.resources;
        if (observer) observer({round, n0 + 1, resource_index_map(n0 + 1, n_sub, n_w), x, &det});
      }
    }
  }
  if (method == Method::kPerfect) rec.resources = n_w;
  rec.mean_stop_index = method == Method::kProposed
                            ? static_cast<double>(stop_sum) / static_cast<double>(rec.resources)
                            : kNaN;

  std::vector<Eigen::VectorXd> estimates;
  estimates.reserve(static_cast<std::size_t>(k_count));
  double mse_sum = 0.0;
  int mse_count = 0;
  for (int k = 0; k < k_count; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    estimates.push_back(invert_permutation(x_hat.row(k).transpose(), perms_[ks], frame.grad_norms[ks]));
    if (frame.silent[ks]) {
      rec.reconstruction_mse.push_back(kNaN);
      continue;
    }
    const double mse = (estimates.back() - grads[ks].g).squaredNorm() / grads[ks].g.squaredNorm();
    rec.reconstruction_mse.push_back(mse);
    mse_sum += mse;
    ++mse_count;
  }
  rec.mean_reconstruction_mse = mse_count > 0 ? mse_sum / mse_count : 0.0;
  rec.global_gradient = aggregate(estimates, frame.batch_sizes);

  RoundOutcome out{adam_step(state, rec.global_gradient, cfg_.adam), {}};
  rec.accuracy = test_accuracy(out.state.w);
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  out.record = std::move(rec);
  return out;
}

ExperimentRun run_experiment(const Federation& fed, Method method, long rounds,
                             const RoundSink& sink, const ResourceObserver& observer) {
  if (rounds < 0) throw ConfigError("T must be nonnegative");
  ExperimentRun run;
  run.final_state = fed.initial_model();
  run.initial_accuracy = fed.test_accuracy(run.final_state.w);
  if (sink) {
    RoundRecord zero;
    zero.round = 0;
    zero.method = method;
    zero.mean_reconstruction_mse = kNaN;
    zero.mean_stop_index = kNaN;
    zero.accuracy = run.initial_accuracy;
    sink(zero);
  }
  for (long t = 1; t <= rounds; ++t) {
    auto out = fed.run_round(run.final_state, t, method, observer);
    run.final_state = std::move(out.state);
    if (sink) sink(out.record);
    run.rounds.push_back(std::move(out.record));
  }
  return run;
}

}  // namespace airgrad
