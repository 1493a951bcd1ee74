#include "innodiff/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "innodiff/error.hpp"

namespace innodiff {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::OutOfRange: return "out_of_range";
    case ErrorCode::NonFinite: return "non_finite";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Io: return "io";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::StructureMismatch: return "structure_mismatch";
  }
  return "unknown";
}

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t state = master;
  for (std::uint64_t key : path) {
    state ^= key * 0x9E3779B97F4A7C15ULL;
    state = splitmix64(state);
  }
  return splitmix64(state);
}

std::uint64_t derive_stream(std::uint64_t master, std::string_view name,
                            std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t state = master;
  for (std::uint64_t key : keys) {
    state ^= key * 0x9E3779B97F4A7C15ULL;
    state = splitmix64(state);
  }
  return derive_seed(state, {fnv1a64(name)});
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "Rng::below called with n = 0");
  // Reject the incomplete top bucket so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

std::int64_t Rng::integer(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw Error(ErrorCode::InvalidArgument, "Rng::integer with hi < lo");
  return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::truncated_normal(double mean, double sd, double lo, double hi) {
  if (!(lo <= hi)) throw Error(ErrorCode::InvalidArgument, "truncated_normal: lo > hi");
  if (sd <= 0.0) return std::clamp(mean, lo, hi);
  double x = mean;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    x = normal(mean, sd);
    if (x >= lo && x <= hi) return x;
  }
  return std::clamp(x, lo, hi);
}

std::vector<int> Rng::permutation(int n) {
  std::vector<int> order(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

std::vector<int> Rng::sample_without_replacement(int n, int k) {
  if (k < 0 || k > n) {
    throw Error(ErrorCode::InvalidArgument, "sample_without_replacement: k outside [0, n]");
  }
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[i] = i;
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

}  // namespace innodiff
