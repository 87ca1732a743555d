// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace airgrad {

using Rng = std::mt19937_64;

/// Consumers of randomness. Each purpose owns a disjoint family of substreams
/// so that adding or removing one consumer never shifts another's draws.
enum class Stream : std::uint64_t {
  kInit = 1,
  kPartition = 2,
  kBatch = 3,
  kChannel = 4,
  kNoise = 5,
  kPermutation = 6,
  kProp1 = 7,
  kSynthetic = 8,
  kBatchSize = 9,
};

/// SplitMix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed derived from (master, purpose, a, b). Pure function of its inputs.
std::uint64_t derive_seed(std::uint64_t master, Stream purpose, std::uint64_t a = 0,
                          std::uint64_t b = 0) noexcept;

/// Independent generator for one (purpose, a, b) cell of the master seed.
Rng substream(std::uint64_t master, Stream purpose, std::uint64_t a = 0, std::uint64_t b = 0);

}  // namespace airgrad
