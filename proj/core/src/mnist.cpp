// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#include "airgrad/mnist.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <string>

#include "airgrad/error.hpp"

namespace airgrad {
namespace {

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw FormatError("truncated IDX header in " + path.string());
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

}  // namespace

Dataset load_mnist(const std::filesystem::path& images_path,
                   const std::filesystem::path& labels_path, Split split) {
  auto img = open_binary(images_path);
  auto lab = open_binary(labels_path);

  const auto img_magic = read_be32(img, images_path);
  if (img_magic != kIdxImagesMagic) {
    throw FormatError("bad image magic " + std::to_string(img_magic) + " in " +
                      images_path.string() + " (expected 2051)");
  }
  const auto lab_magic = read_be32(lab, labels_path);
  if (lab_magic != kIdxLabelsMagic) {
    throw FormatError("bad label magic " + std::to_string(lab_magic) + " in " +
                      labels_path.string() + " (expected 2049)");
  }

  const auto n_images = read_be32(img, images_path);
  const auto rows = read_be32(img, images_path);
  const auto cols = read_be32(img, images_path);
  const auto n_labels = read_be32(lab, labels_path);
  if (rows != kImageSide || cols != kImageSide) {
    throw FormatError("unexpected image size " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " in " + images_path.string());
  }
  if (n_images != n_labels) {
    throw ConsistencyError("image count " + std::to_string(n_images) +
                           " does not match label count " + std::to_string(n_labels));
  }

  Dataset ds;
  ds.split = split;
  ds.labels.resize(n_labels);
  if (!lab.read(reinterpret_cast<char*>(ds.labels.data()), n_labels)) {
    throw FormatError("truncated label payload in " + labels_path.string());
  }
  for (auto l : ds.labels) {
    if (l >= kNumDigits) throw FormatError("label out of range in " + labels_path.string());
  }

  std::vector<unsigned char> raw(static_cast<std::size_t>(n_images) * kImagePixels);
  if (!img.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw FormatError("truncated image payload in " + images_path.string());
  }
  ds.images.resize(n_images, kImagePixels);
  double* dst = ds.images.data();
  for (std::size_t i = 0; i < raw.size(); ++i) dst[i] = raw[i] / 255.0;
  return ds;
}

Dataset load_mnist_dir(const std::filesystem::path& dir, Split split) {
  const std::string prefix = split == Split::kTrain ? "train" : "t10k";
  return load_mnist(dir / (prefix + "-images-idx3-ubyte"), dir / (prefix + "-labels-idx1-ubyte"),
                    split);
}

int device_digit(int k, int num_devices) {
  require(num_devices >= 1 && k >= 0 && k < num_devices, "device index out of range");
  return static_cast<int>((static_cast<long long>(kNumDigits) * k) / num_devices);
}

std::vector<LocalDataset> partition_non_iid(const Dataset& dataset, int num_devices, Rng& rng,
                                            const PartitionOptions& options) {
  if (num_devices < 1) throw ConfigError("K must be at least 1");
  if (options.require_divisible && num_devices % kNumDigits != 0) {
    throw ConfigError("K=" + std::to_string(num_devices) + " is not divisible by 10");
  }

  std::array<std::vector<std::size_t>, kNumDigits> by_digit;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_digit[dataset.labels[i]].push_back(i);

  std::vector<LocalDataset> out;
  out.reserve(static_cast<std::size_t>(num_devices));
  for (int k = 0; k < num_devices; ++k) {
    LocalDataset local;
    local.device = k;
    local.digit = device_digit(k, num_devices);
    const auto& pool = by_digit[static_cast<std::size_t>(local.digit)];
    if (pool.size() < options.samples_per_device) {
      throw ConfigError("digit " + std::to_string(local.digit) + " has only " +
                        std::to_string(pool.size()) + " samples");
    }
    local.indices.resize(options.samples_per_device);
    std::sample(pool.begin(), pool.end(), local.indices.begin(), options.samples_per_device, rng);
    out.push_back(std::move(local));
  }
  return out;
}

}  // namespace airgrad
