#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "treepart/mesh/dual_graph.hpp"
#include "treepart/partition/partition.hpp"

namespace treepart::partition {

std::string_view to_string(Method method) { return method == Method::rcb ? "rcb" : "graph"; }

std::optional<Method> parse_method(std::string_view name) {
  if (name == "rcb") return Method::rcb;
  if (name == "graph") return Method::graph;
  return std::nullopt;
}

void check(const PartitionRequest& request) {
  if (request.parts < 1) {
    throw InputError("partition: part count must be >= 1, got " + std::to_string(request.parts));
  }
  if (!(request.tolerance >= 1.0)) {
    throw InputError("partition: tolerance must be >= 1, got " + std::to_string(request.tolerance));
  }
}

namespace {

void bisect(std::span<const WeightedPoint> points, std::vector<std::size_t> idx, int parts,
            int offset, std::vector<int>& out) {
  if (parts == 1) {
    for (auto i : idx) out[i] = offset;
    return;
  }
  const std::size_t n = idx.size();
  if (n < static_cast<std::size_t>(parts)) {
    throw InputError("rcb: " + std::to_string(n) + " points cannot fill " +
                     std::to_string(parts) + " parts");
  }
  Point lo = points[idx[0]].x;
  Point hi = lo;
  for (auto i : idx) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], points[i].x[a]);
      hi[a] = std::max(hi[a], points[i].x[a]);
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].x[axis] != points[b].x[axis]) return points[a].x[axis] < points[b].x[axis];
    return points[a].id < points[b].id;
  });

  const int kl = parts / 2;
  const int kr = parts - kl;
  double total = 0.0;
  for (auto i : idx) total += points[i].weight;
  const double target = total * kl / parts;

  double before = 0.0;
  std::size_t s_hi = 0;
  double at = 0.0;
  while (s_hi < n) {
    at = before + points[idx[s_hi]].weight;
    ++s_hi;
    if (at >= target) break;
    before = at;
  }
  std::size_t s = std::abs(before - target) <= std::abs(at - target) ? s_hi - 1 : s_hi;
  s = std::clamp(s, static_cast<std::size_t>(kl), n - static_cast<std::size_t>(kr));

  std::vector<std::size_t> left(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s));
  std::vector<std::size_t> right(idx.begin() + static_cast<std::ptrdiff_t>(s), idx.end());
  bisect(points, std::move(left), kl, offset, out);
  bisect(points, std::move(right), kr, offset + kl, out);
}

}  // namespace

std::vector<int> rcb(std::span<const WeightedPoint> points, int parts) {
  check(PartitionRequest{parts, Method::rcb, 1.0});
  for (const auto& p : points) {
    if (!(p.weight > 0.0)) {
      throw InputError("rcb: element " + std::to_string(p.id) + " has non-positive weight");
    }
  }
  std::vector<int> out(points.size(), 0);
  if (parts == 1) return out;
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);
  bisect(points, std::move(idx), parts, 0, out);
  return out;
}

std::vector<ElementSummary> summarize(const mesh::MeshChunk& chunk, bool with_nodes) {
  std::vector<ElementSummary> out;
  out.reserve(chunk.elements.size());
  for (const auto& e : chunk.elements) {
    ElementSummary s{e.id, chunk.centroid(e), e.weight, {}};
    if (with_nodes) s.nodes = e.nodes;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<int> partition_summaries(std::span<const ElementSummary> elements,
                                     mesh::ElementKind kind, const PartitionRequest& request) {
  check(request);
  if (request.method == Method::rcb) {
    std::vector<WeightedPoint> points;
    points.reserve(elements.size());
    for (const auto& e : elements) points.push_back({e.id, e.centroid, e.weight});
    return rcb(points, request.parts);
  }
  mesh::MeshChunk chunk;
  chunk.kind = kind;
  for (const auto& e : elements) chunk.elements.push_back({e.id, e.nodes, e.weight});
  return graph_partition(mesh::to_local_graph(mesh::local_dual_graph(chunk)), request.parts,
                         request.tolerance);
}

std::vector<int> partition_chunk(const mesh::MeshChunk& chunk, const PartitionRequest& request) {
  return partition_summaries(summarize(chunk, request.method == Method::graph), chunk.kind,
                             request);
}

}  // namespace treepart::partition
