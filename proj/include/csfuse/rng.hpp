#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace csfuse {

using Rng = std::mt19937_64;

namespace seed_tag {
inline constexpr std::uint64_t kH0 = 0;
inline constexpr std::uint64_t kH1 = 1;
inline constexpr std::uint64_t kProjection = 0x70726f6aULL;
inline constexpr std::uint64_t kCopulaFit = 0x636f7075ULL;
inline constexpr std::uint64_t kRetry = 0x72657472ULL;
inline constexpr std::uint64_t kBootstrap = 0x626f6f74ULL;
inline constexpr std::uint64_t kBench = 0x62656e63ULL;
inline constexpr std::uint64_t kCalibrate = 0x63616c69ULL;
}  // namespace seed_tag

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and a tag path
/// (trial index, hypothesis, frame, ...). Order of tags matters.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
  for (auto t : tags) h = mix64(h ^ mix64(t + 0x3c6ef372fe94f82bULL));
  return h;
}

}  // namespace csfuse
