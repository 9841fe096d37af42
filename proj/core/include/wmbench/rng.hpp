#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace wmbench {

/// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t salt) {
  return mix_seed(parent ^ mix_seed(salt));
}

constexpr std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

/// mt19937_64 with distribution mappings written out explicitly, because
/// the std distributions are not specified bit-for-bit across standard
/// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n > 0 (Lemire-free modulo; bias < 2^-40 for small n).
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  int range(int lo, int hi_inclusive) {
    return lo + int(below(std::uint64_t(hi_inclusive - lo + 1)));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace wmbench
