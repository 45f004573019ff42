#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "treepart/mesh/graph.hpp"
#include "treepart/mesh/mesh.hpp"

namespace treepart::partition {

using mesh::ElementId;
using mesh::NodeId;
using mesh::Point;

enum class Method { rcb, graph };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

struct PartitionRequest {
  int parts = 1;
  Method method = Method::rcb;
  double tolerance = 1.02;
};

/// Throws InputError unless parts >= 1 and tolerance >= 1.
void check(const PartitionRequest& request);

struct WeightedPoint {
  ElementId id = 0;
  Point x{};
  double weight = 1.0;
};

/**
 * Recursive coordinate bisection. Each step sorts the current set by
 * (coordinate, id) along its axis of largest extent (lowest axis on ties) and
 * cuts where the left weight is closest to floor(k/2)/k of the total, keeping
 * at least one point per remaining part. Returns the part of each input point.
 */
std::vector<int> rcb(std::span<const WeightedPoint> points, int parts);

/**
 * Greedy graph growing from farthest-point seeds, one part at a time, then a
 * single boundary refinement sweep. Part weights stay within
 * tolerance * total / parts whenever the growth order allows it.
 */
std::vector<int> graph_partition(const mesh::Graph& graph, int parts, double tolerance = 1.02);

/// The growth stage alone.
std::vector<int> grow_parts(const mesh::Graph& graph, int parts, double tolerance);

/**
 * One sweep in vertex order: a boundary vertex moves to the adjacent part that
 * removes the most cut edges, if that count is positive, the destination stays
 * within the weight cap and the source part keeps a vertex. Returns the moves made.
 */
int refine_boundary(const mesh::Graph& graph, std::vector<int>& part, int parts, double tolerance);

/// What a partitioner needs to know about one element.
struct ElementSummary {
  ElementId id = 0;
  Point centroid{};
  double weight = 1.0;
  std::vector<NodeId> nodes;  // needed by the graph method only
};

std::vector<ElementSummary> summarize(const mesh::MeshChunk& chunk, bool with_nodes);

/// Sequential partition of a summary list; returns the part of each entry.
std::vector<int> partition_summaries(std::span<const ElementSummary> elements,
                                     mesh::ElementKind kind, const PartitionRequest& request);

std::vector<int> partition_chunk(const mesh::MeshChunk& chunk, const PartitionRequest& request);

}  // namespace treepart::partition
