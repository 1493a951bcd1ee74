#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace innodiff {

/// One step of the SplitMix64 generator. Advances `state`.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// 64-bit FNV-1a hash of a byte string; used to turn stream names into keys.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Derives a child seed from a master seed and a path of keys.
///
/// The mix is: state = master; for each key k: state ^= k * 0x9E3779B97F4A7C15,
/// then state = splitmix64(state). The returned seed is the final splitmix64
/// output. It is a pure function of its arguments and is the only way seeds
/// are split in this library (no hidden global generator).
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) noexcept;

/// Named-stream convenience: derive_seed(master, {keys..., fnv1a64(name)}).
std::uint64_t derive_stream(std::uint64_t master, std::string_view name,
                            std::initializer_list<std::uint64_t> keys = {}) noexcept;

/// Seeded random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are not portable across library
/// implementations, so the variates below are computed here from raw engine
/// output to keep results bit-identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). Unbiased (rejection on the top range).
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t integer(std::int64_t lo, std::int64_t hi);
  /// Standard normal via Box-Muller; always consumes exactly two uniforms.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Normal(mean, sd) truncated to [lo, hi] by rejection. Falls back to
  /// clamping the last draw after 1000 rejections (only reachable for
  /// windows many standard deviations away from the mean).
  double truncated_normal(double mean, double sd, double lo, double hi);

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<int> permutation(int n);
  /// k distinct indices from 0..n-1 (partial Fisher-Yates), in draw order.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace innodiff
