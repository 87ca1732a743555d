// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "airgrad/rng.hpp"

namespace airgrad {

inline constexpr int kImageSide = 28;
inline constexpr int kImagePixels = kImageSide * kImageSide;
inline constexpr int kNumDigits = 10;

/// IDX magic numbers (big-endian on disk).
inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

enum class Split { kTrain, kTest };

using ImageMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Images one per row, pixels scaled to [0, 1].
struct Dataset {
  ImageMatrix images;
  std::vector<std::uint8_t> labels;
  Split split = Split::kTrain;

  std::size_t size() const { return labels.size(); }
  auto image(std::size_t i) const { return images.row(static_cast<Eigen::Index>(i)); }
};

/// Reads an IDX image/label pair. Throws FormatError on bad magic or
/// truncated payload and ConsistencyError when the two counts differ.
Dataset load_mnist(const std::filesystem::path& images_path,
                   const std::filesystem::path& labels_path, Split split = Split::kTrain);

/// Loads `<dir>/{train,t10k}-{images-idx3,labels-idx1}-ubyte`.
Dataset load_mnist_dir(const std::filesystem::path& dir, Split split);

/// Training samples held by one device. All indices carry label `digit`.
struct LocalDataset {
  int device = 0;  // 0-based
  int digit = 0;
  std::vector<std::size_t> indices;
};

/// Digit assigned to 0-based device `k` out of `num_devices`: floor(10 k / K).
/// Equals floor(k / (K/10)) whenever K is a multiple of ten.
int device_digit(int k, int num_devices);

struct PartitionOptions {
  std::size_t samples_per_device = 1000;
  /// Reject K that is not a multiple of ten instead of using the floor(10k/K) fallback.
  bool require_divisible = false;
};

/// Non-IID split: each device draws `samples_per_device` distinct indices of
/// its digit uniformly at random.
std::vector<LocalDataset> partition_non_iid(const Dataset& dataset, int num_devices, Rng& rng,
                                            const PartitionOptions& options = {});

}  // namespace airgrad
