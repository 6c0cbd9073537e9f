#include "hysync/rng.hpp"

#include <random>

namespace hysync {

double ParameterStreams::unit(std::string_view name, std::uint64_t i, std::uint64_t j) const {
  const std::uint64_t key = splitmix64(splitmix64(splitmix64(seed_ ^ fnv1a(name)) ^ i) ^ j);
  std::mt19937_64 engine(key);
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

double ParameterStreams::uniform(std::string_view name, double lo, double hi, std::uint64_t i, std::uint64_t j) const {
  return lo + (hi - lo) * unit(name, i, j);
}

}  // namespace hysync
