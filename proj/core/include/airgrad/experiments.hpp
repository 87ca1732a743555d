// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "airgrad/orchestrator.hpp"
#include "airgrad/prop1.hpp"
#include "airgrad/rng.hpp"

namespace airgrad {

struct ExperimentConfig {
  int devices = 75;                 // K
  int antennas = 25;                // M
  int taps = 10;                    // L
  long subcarriers = 1024;          // N_sub
  double noise = 1.0;               // complex noise variance
  long rounds = 30;                 // T
  BatchPolicy batch{};
  std::vector<Method> methods{Method::kProposed, Method::kLmmse, Method::kMrc, Method::kPerfect};
  std::uint64_t seed = 1;
  std::filesystem::path mnist_dir;
  std::filesystem::path out_dir = "out";
  long trials = 100000;
  bool permute = true;
  int support_size = 3;   // prop1
  bool timing = false;    // write wall-clock times (breaks byte-identical reruns)
  bool dump_recovery = false;
  bool dump_channel = false;
  bool dump_xi = false;

  // complexity
  std::vector<int> device_grid{100, 150, 200};
  std::vector<int> antenna_grid{25, 50, 100};
  /// Fixed stop index; when empty the average measured over a proposed-method run is used.
  std::optional<double> fixed_stop_index;

  void validate() const;
  TrainingConfig training() const;
};

/// Reads keys matching the long flag names (K, M, L, nsub, noise, T, batch,
/// methods, seed, out, trials, ...). Unknown keys are a ConfigError.
ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base = {});
std::string config_to_json(const ExperimentConfig& cfg);

std::vector<Method> parse_methods(const std::string& list);

/// Exact CDF of xi on the grid 0, 0.01, ..., 1 via per-bin counts.
class XiHistogram {
 public:
  static constexpr int kGridPoints = 101;

  void add(double xi);
  void add(const Eigen::Ref<const Eigen::VectorXd>& xi);

  long long count() const { return total_; }
  long long exact_zeros() const { return zeros_; }
  double zero_fraction() const;
  /// Fraction of samples with xi <= j / 100.
  double cdf(int j) const;
  std::array<double, kGridPoints> cdf_grid() const;

 private:
  std::array<long long, kGridPoints> bins_{};
  long long total_ = 0;
  long long zeros_ = 0;
};

/// Uniform subsample of a stream (Algorithm R), for raw xi dumps.
class Reservoir {
 public:
  struct Sample {
    long round;
    long resource;
    int device;
    double xi;
  };
  Reservoir(std::size_t capacity, Rng rng) : capacity_(capacity), rng_(std::move(rng)) {}
  void offer(const Sample& s);
  const std::vector<Sample>& samples() const { return samples_; }
  long long seen() const { return seen_; }

 private:
  std::size_t capacity_;
  Rng rng_;
  std::vector<Sample> samples_;
  long long seen_ = 0;
};

inline constexpr std::size_t kXiReservoirCap = 1000000;

struct MethodSummary {
  Method method;
  double initial_accuracy = 0.0;
  double final_accuracy = 0.0;
  double mean_stop_index = 0.0;  // averaged over rounds; NaN unless proposed
  std::vector<RoundRecord> rounds;
};

/// Trains once per configured method. Writes metrics.csv and manifest.json
/// (plus optional dumps) under out_dir when `write` is set.
std::vector<MethodSummary> cmd_train(const ExperimentConfig& cfg, const Dataset& train,
                                     const Dataset& test, std::ostream* log = nullptr,
                                     bool write = true);

struct SparsityResult {
  XiHistogram permuted;
  XiHistogram unpermuted;
};

/// Trains with the first configured method twice (permutation on and off)
/// and writes sparsity_cdf.csv and sparsity.json.
SparsityResult cmd_sparsity(const ExperimentConfig& cfg, const Dataset& train,
                            std::ostream* log = nullptr, bool write = true);

/// Writes prop1.csv.
std::vector<Prop1Row> cmd_prop1(const ExperimentConfig& cfg, bool write = true);

struct ComplexityRow {
  int devices = 0;
  int antennas = 0;
  double stop_index = 0.0;
  double proposed = 0.0;
  double lmmse = 0.0;
  double mrc = 0.0;
  double ratio = 0.0;        // general form
  double ratio_large = 0.0;  // leading-term form
};

/// Writes complexity.csv. `train` may be null when a fixed stop index is configured.
std::vector<ComplexityRow> cmd_complexity(const ExperimentConfig& cfg, const Dataset* train,
                                          std::ostream* log = nullptr, bool write = true);

}  // namespace airgrad
