#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "innodiff/population.hpp"

namespace innodiff {

/// How two agents' reach circles combine into an undirected candidate pair.
enum class ReachRule : std::uint8_t {
  Either,  ///< distance <= max(r_i, r_j)
  Both,    ///< distance <= min(r_i, r_j)
};

/// Normalizer of the tie weight: the largest dissimilarity in the whole
/// population, or the larger of the two agents' largest dissimilarity
/// within their own reach.
enum class MaxDeltaScope : std::uint8_t { Global, PerReach };

struct GraphOptions {
  ReachRule reach = ReachRule::Either;
  /// Multiplies every social radius before the reach test.
  double radius_scale = 1.0;
  MaxDeltaScope max_delta_scope = MaxDeltaScope::Global;

  friend bool operator==(const GraphOptions&, const GraphOptions&) = default;
};

/// Normalized socio-demographic space: age, gender, income, education,
/// modernity, consumption.
struct SimilaritySpace {
  static constexpr int kDimensions = 6;

  std::array<double, kDimensions> max_dist{};
  double max_delta = 0.0;

  static std::array<double, kDimensions> coordinates(const Demographics& d);
  /// Per-dimension ranges over the population and the global max distance.
  static SimilaritySpace build(const Population& pop);
};

/// Euclidean distance of range-normalized coordinates. A dimension with zero
/// range contributes nothing.
double similarity(const SimilaritySpace& space, const Agent& a, const Agent& b);

/// delta = 1 - distance / max_delta. Throws when distance exceeds max_delta.
/// When max_delta is 0 every agent is identical and the weight is 1.
double tie_weight(const SimilaritySpace& space, double distance);
double tie_weight(double distance, double max_delta);

double geographic_distance(const Agent& a, const Agent& b);
bool within_reach(const Agent& a, const Agent& b, const GraphOptions& options);

/// Static undirected graph stored as sorted adjacency lists.
class SocialGraph {
 public:
  using Edge = std::pair<int, int>;

  SocialGraph() = default;
  /// Edges may come in any order or orientation; self-loops and duplicates
  /// are rejected.
  SocialGraph(int n, std::vector<Edge> edges);

  int size() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  /// (i, j) with i < j, lexicographically sorted.
  std::span<const Edge> edges() const { return edges_; }
  /// Sorted neighbor ids; throws Error(OutOfRange) for an invalid id.
  std::span<const int> neighbors(int i) const;
  bool connected(int i, int j) const;

  friend bool operator==(const SocialGraph& a, const SocialGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> offsets_;
  std::vector<int> adjacency_;
};

/// Visits pairs i < j in order; each pair within reach draws one uniform R
/// from stream "graph" of `seed` and becomes a tie iff R < delta_ij.
SocialGraph build_graph(const Population& pop, std::uint64_t seed,
                        const GraphOptions& options = {});

/// One "i j" line per edge.
std::string format_edge_list(const SocialGraph& graph);
void write_edge_list(const SocialGraph& graph, const std::filesystem::path& path);

}  // namespace innodiff
