#ifndef CODESIGN_RNG_HPP
#define CODESIGN_RNG_HPP

#include <cmath>
#include <cstdint>

namespace codesign {

// xoshiro256** seeded through splitmix64. We roll our own instead of using
// <random> because std distributions are implementation-defined: the same
// seed must give byte-identical artifacts across compilers and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      w = z ^ (z >> 31);
    }
  }

  std::uint64_t u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // [0, 1), 53-bit resolution
  double real01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * real01(); }

  // inclusive range, unbiased (rejection on the wraparound remainder)
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(u64());  // full 64-bit span
    const std::uint64_t reject_below = (-range) % range;
    std::uint64_t x;
    do {
      x = u64();
    } while (x < reject_below);
    return lo + static_cast<std::int64_t>(x % range);
  }

  bool bernoulli(double p) { return real01() < p; }

  // Box-Muller; the spare is discarded so every call consumes exactly two
  // uniforms (keeps the stream position independent of call history).
  double gaussian() {
    double u1 = real01();
    double u2 = real01();
    while (u1 <= 0.0) u1 = real01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// FNV-1a, used for config provenance hashes in output files.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace codesign

#endif  // CODESIGN_RNG_HPP
