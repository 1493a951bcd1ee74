#include "innodiff/socialnet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "innodiff/error.hpp"
#include "innodiff/rng.hpp"
#include "json_util.hpp"

namespace innodiff {

std::array<double, SimilaritySpace::kDimensions> SimilaritySpace::coordinates(
    const Demographics& d) {
  return {static_cast<double>(d.age),       static_cast<double>(d.gender),
          static_cast<double>(d.income),    static_cast<double>(d.education),
          d.modernity,                      d.consumption};
}

SimilaritySpace SimilaritySpace::build(const Population& pop) {
  SimilaritySpace space;
  if (pop.agents.empty()) return space;
  auto lo = coordinates(pop.agents.front().demographics);
  auto hi = lo;
  for (const Agent& a : pop.agents) {
    const auto c = coordinates(a.demographics);
    for (int m = 0; m < kDimensions; ++m) {
      lo[m] = std::min(lo[m], c[m]);
      hi[m] = std::max(hi[m], c[m]);
    }
  }
  for (int m = 0; m < kDimensions; ++m) space.max_dist[m] = hi[m] - lo[m];

  for (std::size_t i = 0; i < pop.agents.size(); ++i) {
    for (std::size_t j = i + 1; j < pop.agents.size(); ++j) {
      space.max_delta = std::max(space.max_delta, similarity(space, pop.agents[i], pop.agents[j]));
    }
  }
  return space;
}

double similarity(const SimilaritySpace& space, const Agent& a, const Agent& b) {
  const auto ca = SimilaritySpace::coordinates(a.demographics);
  const auto cb = SimilaritySpace::coordinates(b.demographics);
  double sum = 0.0;
  for (int m = 0; m < SimilaritySpace::kDimensions; ++m) {
    if (space.max_dist[m] <= 0.0) continue;
    const double term = (ca[m] - cb[m]) / space.max_dist[m];
    sum += term * term;
  }
  return std::sqrt(sum);
}

double tie_weight(double distance, double max_delta) {
  if (!(distance >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tie_weight: distance must be non-negative");
  }
  if (max_delta <= 0.0) {
    if (distance > 0.0) {
      throw Error(ErrorCode::StructureMismatch,
                  "tie_weight: positive distance in a space with zero max distance");
    }
    return 1.0;
  }
  if (distance > max_delta) {
    throw Error(ErrorCode::StructureMismatch,
                "tie_weight: distance " + std::to_string(distance) + " exceeds max " +
                    std::to_string(max_delta) + " (population/space mismatch)");
  }
  return 1.0 - distance / max_delta;
}

double tie_weight(const SimilaritySpace& space, double distance) {
  return tie_weight(distance, space.max_delta);
}

double geographic_distance(const Agent& a, const Agent& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

bool within_reach(const Agent& a, const Agent& b, const GraphOptions& options) {
  const double ra = a.social_radius * options.radius_scale;
  const double rb = b.social_radius * options.radius_scale;
  const double reach = options.reach == ReachRule::Either ? std::max(ra, rb) : std::min(ra, rb);
  return geographic_distance(a, b) <= reach;
}

SocialGraph::SocialGraph(int n, std::vector<Edge> edges) : n_(n) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "graph size must be non-negative");
  for (auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw Error(ErrorCode::OutOfRange, "edge (" + std::to_string(i) + ", " + std::to_string(j) +
                                             ") references a missing agent");
    }
    if (i == j) throw Error(ErrorCode::InvalidArgument, "self-loop at " + std::to_string(i));
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw Error(ErrorCode::InvalidArgument, "duplicate edge in graph");
  }
  edges_ = std::move(edges);

  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  for (const auto& [i, j] : edges_) {
    ++degree[i];
    ++degree[j];
  }
  offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.assign(static_cast<std::size_t>(offsets_[n]), 0);
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [i, j] : edges_) {
    adjacency_[fill[i]++] = j;
    adjacency_[fill[j]++] = i;
  }
  for (int i = 0; i < n; ++i) {
    std::sort(adjacency_.begin() + offsets_[i], adjacency_.begin() + offsets_[i + 1]);
  }
}

std::span<const int> SocialGraph::neighbors(int i) const {
  if (i < 0 || i >= n_) {
    throw Error(ErrorCode::OutOfRange, "agent id " + std::to_string(i) + " not in graph");
  }
  return std::span<const int>(adjacency_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

bool SocialGraph::connected(int i, int j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

SocialGraph build_graph(const Population& pop, std::uint64_t seed, const GraphOptions& options) {
  const int n = pop.size();
  const SimilaritySpace space = SimilaritySpace::build(pop);

  std::vector<double> reach_max;
  if (options.max_delta_scope == MaxDeltaScope::PerReach) {
    reach_max.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (!within_reach(pop.agents[i], pop.agents[j], options)) continue;
        const double d = similarity(space, pop.agents[i], pop.agents[j]);
        reach_max[i] = std::max(reach_max[i], d);
        reach_max[j] = std::max(reach_max[j], d);
      }
    }
  }

  Rng rng(derive_stream(seed, "graph"));
  std::vector<SocialGraph::Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Agent& a = pop.agents[i];
      const Agent& b = pop.agents[j];
      if (!within_reach(a, b, options)) continue;
      const double r = rng.uniform();
      const double distance = similarity(space, a, b);
      const double normalizer = options.max_delta_scope == MaxDeltaScope::Global
                                    ? space.max_delta
                                    : std::max(reach_max[i], reach_max[j]);
      if (r < tie_weight(distance, normalizer)) edges.emplace_back(i, j);
    }
  }
  return SocialGraph(n, std::move(edges));
}

std::string format_edge_list(const SocialGraph& graph) {
  std::ostringstream out;
  for (const auto& [i, j] : graph.edges()) out << i << ' ' << j << '\n';
  return out.str();
}

void write_edge_list(const SocialGraph& graph, const std::filesystem::path& path) {
  detail::write_file(path, format_edge_list(graph));
}

}  // namespace innodiff
