// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#include "airgrad/rng.hpp"

namespace airgrad {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, Stream purpose, std::uint64_t a,
                          std::uint64_t b) noexcept {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ static_cast<std::uint64_t>(purpose));
  h = mix64(h ^ a);
  h = mix64(h ^ (b + 0x632be59bd9b4e019ULL));
  return h;
}

Rng substream(std::uint64_t master, Stream purpose, std::uint64_t a, std::uint64_t b) {
  return Rng(derive_seed(master, purpose, a, b));
}

}  // namespace airgrad
