#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace genreforge {

// 64-bit FNV-1a.
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t basis = kFnvOffset) {
  std::uint64_t h = basis;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

// SplitMix64 finalizer; used to decorrelate seeds and hash bits.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded string hash: FNV-1a over the bytes starting from a seed-dependent
// basis, then finalized.
constexpr std::uint64_t seeded_hash(std::string_view bytes,
                                    std::uint64_t seed) {
  return mix64(fnv1a64(bytes, kFnvOffset ^ mix64(seed)));
}

std::string to_hex(std::uint64_t v);

// Named PRNG for every seeded operation. std::mt19937_64 is fully specified
// by the standard, so streams are identical across platforms and releases.
// Only the raw engine output is used; std distributions are
// implementation-defined and are avoided.
inline constexpr const char* kPrngName = "mt19937_64";
using Prng = std::mt19937_64;

// Uniform integer in [0, bound) by rejection sampling.
std::uint64_t uniform_below(Prng& rng, std::uint64_t bound);

// Uniform double in [0, 1) from the top 53 bits.
double uniform_unit(Prng& rng);

// Fisher-Yates shuffle driven by uniform_below.
template <typename T>
void seeded_shuffle(std::vector<T>& items, Prng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

// SHA-256 hex digest of a byte string / file contents.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

}  // namespace genreforge
