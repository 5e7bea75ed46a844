#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace localboost {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and a path of stream tags,
/// so that adding a consumer never shifts the draws of another.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = mix64(master);
  for (auto t : tags) s = mix64(s ^ mix64(t + 0x632be59bd9b4e019ULL));
  return s;
}

// Stream tags used across the library.
enum class Stream : std::uint64_t {
  kGenerator = 1,
  kCondFn = 2,
  kLearner = 3,
  kPerturb = 4,
  kDistance = 5,
  kCleanSubset = 6,
};

inline std::uint64_t derive_seed(std::uint64_t master, Stream stream) {
  return derive_seed(master, {static_cast<std::uint64_t>(stream)});
}

inline std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index) {
  return derive_seed(master, {static_cast<std::uint64_t>(stream), index});
}

}  // namespace localboost
