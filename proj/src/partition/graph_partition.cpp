#include <algorithm>
#include <deque>
#include <limits>
#include <set>
#include <string>

#include "treepart/partition/partition.hpp"

namespace treepart::partition {

namespace {

constexpr std::int64_t kUnreached = std::numeric_limits<std::int64_t>::max();

// Multi-source BFS; unreachable vertices keep kUnreached.
std::vector<std::int64_t> distances(const mesh::Graph& g, const std::vector<std::size_t>& sources) {
  std::vector<std::int64_t> dist(g.vertex_count(), kUnreached);
  std::deque<std::size_t> queue;
  for (auto s : sources) {
    dist[s] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    for (auto u : g.neighbors(v)) {
      if (dist[u] == kUnreached) {
        dist[u] = dist[v] + 1;
        queue.push_back(static_cast<std::size_t>(u));
      }
    }
  }
  return dist;
}

std::vector<std::size_t> farthest_seeds(const mesh::Graph& g, int parts) {
  std::vector<std::size_t> seeds;
  std::vector<std::size_t> sources{0};
  for (int p = 0; p < parts; ++p) {
    const auto dist = distances(g, sources);
    std::size_t best = 0;
    for (std::size_t v = 1; v < dist.size(); ++v) {
      if (dist[v] > dist[best]) best = v;
    }
    seeds.push_back(best);
    if (p == 0) sources.clear();
    sources.push_back(best);
  }
  return seeds;
}

void check_graph_request(const mesh::Graph& g, int parts, double tolerance) {
  check(PartitionRequest{parts, Method::graph, tolerance});
  if (static_cast<std::size_t>(parts) > g.vertex_count()) {
    throw InputError("graph partition: " + std::to_string(parts) + " parts exceed " +
                     std::to_string(g.vertex_count()) + " vertices");
  }
}

}  // namespace

std::vector<int> grow_parts(const mesh::Graph& g, int parts, double tolerance) {
  check_graph_request(g, parts, tolerance);
  const auto n = g.vertex_count();
  std::vector<int> part(n, -1);
  if (parts == 1) {
    std::fill(part.begin(), part.end(), 0);
    return part;
  }
  const double cap = tolerance * g.total_weight() / parts;
  const auto seeds = farthest_seeds(g, parts);
  double remaining = g.total_weight();
  std::size_t unassigned = n;

  auto free_neighbors = [&](std::size_t v) {
    int c = 0;
    for (auto u : g.neighbors(v)) c += part[u] < 0;
    return c;
  };
  auto restart_vertex = [&]() {
    std::size_t best = n;
    int best_free = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (part[v] >= 0) continue;
      const int f = free_neighbors(v);
      if (best == n || f < best_free) {
        best = v;
        best_free = f;
      }
    }
    return best;
  };

  for (int p = 0; p + 1 < parts; ++p) {
    // Leave at least one vertex for each later part.
    const std::size_t keep = static_cast<std::size_t>(parts - p - 1);
    const double target = remaining / (parts - p);
    double weight = 0.0;
    std::size_t size = 0;
    std::vector<int> inside(n, 0);  // edges from v into part p
    std::set<std::size_t> frontier;

    auto take = [&](std::size_t v) {
      part[v] = p;
      weight += g.weight(v);
      ++size;
      --unassigned;
      frontier.erase(v);
      for (auto u : g.neighbors(v)) {
        ++inside[u];
        if (part[u] < 0) frontier.insert(static_cast<std::size_t>(u));
      }
    };

    std::size_t start = part[seeds[p]] < 0 ? seeds[p] : restart_vertex();
    take(start);
    while (weight < target && unassigned > keep) {
      if (frontier.empty()) {
        const auto v = restart_vertex();
        if (weight + g.weight(v) > cap) break;
        take(v);
        continue;
      }
      std::size_t best = *frontier.begin();
      std::int64_t best_gain = std::numeric_limits<std::int64_t>::min();
      for (auto v : frontier) {
        const std::int64_t gain = 2 * inside[v] - static_cast<std::int64_t>(g.neighbors(v).size());
        if (gain > best_gain) {
          best = v;
          best_gain = gain;
        }
      }
      const double w = g.weight(best);
      if (weight + w > cap || weight + w - target > target - weight) break;
      take(best);
    }
    remaining -= weight;
  }
  for (auto& x : part) {
    if (x < 0) x = parts - 1;
  }
  return part;
}

int refine_boundary(const mesh::Graph& g, std::vector<int>& part, int parts, double tolerance) {
  const double cap = tolerance * g.total_weight() / parts;
  std::vector<double> weight(parts, 0.0);
  std::vector<std::size_t> size(parts, 0);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    weight[part[v]] += g.weight(v);
    ++size[part[v]];
  }
  int moves = 0;
  std::vector<int> links(parts, 0);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const int p = part[v];
    if (size[p] <= 1) continue;
    std::fill(links.begin(), links.end(), 0);
    for (auto u : g.neighbors(v)) ++links[part[u]];
    int best = p;
    int best_gain = 0;
    for (int q = 0; q < parts; ++q) {
      if (q == p || links[q] == 0) continue;
      const int gain = links[q] - links[p];
      if (gain > best_gain && weight[q] + g.weight(v) <= cap) {
        best = q;
        best_gain = gain;
      }
    }
    if (best == p) continue;
    part[v] = best;
    weight[p] -= g.weight(v);
    weight[best] += g.weight(v);
    --size[p];
    ++size[best];
    ++moves;
  }
  return moves;
}

std::vector<int> graph_partition(const mesh::Graph& g, int parts, double tolerance) {
  auto part = grow_parts(g, parts, tolerance);
  refine_boundary(g, part, parts, tolerance);
  return part;
}

}  // namespace treepart::partition
