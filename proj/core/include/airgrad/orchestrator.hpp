// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "airgrad/channel.hpp"
#include "airgrad/device_tx.hpp"
#include "airgrad/mlp.hpp"
#include "airgrad/mnist.hpp"
#include "airgrad/recovery.hpp"

namespace airgrad {

/// How many local samples each device uses per round.
struct BatchPolicy {
  enum class Mode { kStochastic, kMinibatch };
  Mode mode = Mode::kStochastic;
  int lo = 1;
  int hi = 1;
  /// Draw the sizes once for the whole run instead of once per round.
  bool fixed = false;

  static BatchPolicy stochastic() { return {}; }
  static BatchPolicy minibatch(int lo, int hi, bool fixed = false) {
    return {Mode::kMinibatch, lo, hi, fixed};
  }
  /// "stochastic" or "minibatch:lo,hi". Throws ConfigError.
  static BatchPolicy parse(std::string_view text);
  std::string to_string() const;
  void validate() const;
};

/// Realized sizes for one round, uniform integers in [lo, hi].
std::vector<int> draw_batch_sizes(const BatchPolicy& policy, int devices, std::uint64_t seed,
                                  long round);

/// sum_k |B_k| g_k / sum_j |B_j|.
Eigen::VectorXd aggregate(const std::vector<Eigen::VectorXd>& estimates,
                          const std::vector<int>& batch_sizes);

struct TrainingConfig {
  int devices = 75;
  ChannelConfig channel{};
  BatchPolicy batch{};
  bool permute = true;
  std::uint64_t seed = 1;
  PartitionOptions partition{};
  AdamConfig adam{};

  void validate() const;
};

struct RoundRecord {
  long round = 0;
  Method method = Method::kPerfect;
  std::vector<double> grad_norms;
  std::vector<int> batch_sizes;
  std::vector<double> reconstruction_mse;  // per device, NaN for silent devices
  double mean_reconstruction_mse = 0.0;
  double mean_stop_index = 0.0;  // averaged over resources; NaN unless proposed
  long resources = 0;            // resources transmitted this round
  Eigen::VectorXd global_gradient;
  double accuracy = 0.0;  // NaN when no test set is attached
  double wall_ms = 0.0;
};

/// Seen once per radio resource, after detection.
struct ResourceEvent {
  long round = 0;
  long resource = 0;  // 1-based n
  ResourceLocation location{};
  Eigen::Ref<const Eigen::VectorXd> x;  // transmitted values, one per device
  const Detection* detection = nullptr;  // null on the perfect path
};

using ResourceObserver = std::function<void(const ResourceEvent&)>;
using RoundSink = std::function<void(const RoundRecord&)>;

struct RoundOutcome {
  ModelState state;
  RoundRecord record;
};

/// Devices, their local data, and the shared permutations for one training run.
class Federation {
 public:
  Federation(TrainingConfig cfg, const Dataset& train, const Dataset* test = nullptr);

  const TrainingConfig& config() const { return cfg_; }
  const std::vector<LocalDataset>& local_data() const { return local_; }
  const Permutation& permutation(int device) const {
    return perms_[static_cast<std::size_t>(device)];
  }

  ModelState initial_model() const;

  /// Local gradients of every device for `round` at parameters w.
  std::vector<GradientVector> local_gradients(const Eigen::VectorXd& w, long round) const;

  RoundOutcome run_round(const ModelState& state, long round, Method method,
                         const ResourceObserver& observer = {}) const;

  double test_accuracy(const Eigen::VectorXd& w) const;

 private:
  TrainingConfig cfg_;
  const Dataset& train_;
  const Dataset* test_;
  std::vector<LocalDataset> local_;
  std::vector<Permutation> perms_;
};

struct ExperimentRun {
  double initial_accuracy = 0.0;
  std::vector<RoundRecord> rounds;
  ModelState final_state;
};

/// Runs rounds 1..T. The sink first receives a round-0 record holding the
/// initial accuracy, then one record per round as it completes.
ExperimentRun run_experiment(const Federation& fed, Method method, long rounds,
                             const RoundSink& sink = {}, const ResourceObserver& observer = {});

}  // namespace airgrad
