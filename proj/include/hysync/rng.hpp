#ifndef HYSYNC_RNG_HPP_
#define HYSYNC_RNG_HPP_

#include <cstdint>
#include <string_view>

namespace hysync {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based parameter draws. Every scalar parameter owns a stream keyed by
/// (seed, name, i, j), so a draw never depends on how many other draws happened first:
///
///   key    = splitmix64(splitmix64(splitmix64(seed ^ fnv1a(name)) ^ i) ^ j)
///   sample = mt19937_64(key), first output, top 53 bits scaled to [0, 1)
///
/// Both generators are fully specified, so draws are identical across platforms.
class ParameterStreams {
 public:
  explicit ParameterStreams(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform on [0, 1).
  double unit(std::string_view name, std::uint64_t i = 0, std::uint64_t j = 0) const;
  /// Uniform on [lo, hi].
  double uniform(std::string_view name, double lo, double hi, std::uint64_t i = 0, std::uint64_t j = 0) const;

 private:
  std::uint64_t seed_;
};

}  // namespace hysync

#endif  // HYSYNC_RNG_HPP_
