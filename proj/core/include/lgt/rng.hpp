#pragma once

#include <cstdint>
#include <random>

namespace lgt {

// splitmix64 finalizer; good avalanche, used to whiten stream coordinates.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Deterministic per-task engine derived from a base seed and up to three
// stream coordinates (e.g. trial, gene, purpose). Streams with distinct
// coordinates are independent for practical purposes, and results never
// depend on scheduling order.
inline std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t a = 0,
                                  std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(seed);
  s = mix64(s ^ mix64(a + 1));
  s = mix64(s ^ mix64(b + 2));
  s = mix64(s ^ mix64(c + 3));
  return std::mt19937_64(s);
}

// Stable purpose tags for derived streams.
namespace stream {
constexpr std::uint64_t species = 0x5350;     // species tree generation
constexpr std::uint64_t events = 0x4556;      // LGT event sampling
constexpr std::uint64_t sampling = 0x5441;    // taxon sampling
constexpr std::uint64_t highway = 0x4857;     // highway placement/assignment
constexpr std::uint64_t sequence = 0x5351;    // sequence evolution
constexpr std::uint64_t misc = 0x4D49;
}  // namespace stream

}  // namespace lgt
