#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "treepart/error.hpp"
#include "treepart/hwtopo/topology.hpp"
#include "treepart/simrt/runtime.hpp"

namespace treepart::mesh {

using NodeId = std::int64_t;
using ElementId = std::int64_t;
using hwtopo::Rank;
using Point = std::array<double, 3>;

enum class ElementKind : std::uint8_t { triangle, tetrahedron };

int nodes_per_element(ElementKind kind);
/// Nodes on one face: 2 for triangle edges, 3 for tetrahedron faces.
int face_size(ElementKind kind);
int dimension(ElementKind kind);
std::string_view to_string(ElementKind kind);
std::optional<ElementKind> parse_kind(std::string_view name);

struct Node {
  NodeId id = 0;
  Point x{};

  bool operator==(const Node&) const = default;
};

struct Element {
  ElementId id = 0;
  std::vector<NodeId> nodes;
  double weight = 1.0;

  bool operator==(const Element&) const = default;
};

/// A boundary face travels with `element`, the lowest-id element containing all its nodes.
struct BoundaryFace {
  int tag = 0;
  std::vector<NodeId> nodes;
  ElementId element = -1;

  bool operator==(const BoundaryFace&) const = default;
  auto operator<=>(const BoundaryFace& other) const {
    if (element != other.element) return element <=> other.element;
    if (tag != other.tag) return tag <=> other.tag;
    return nodes <=> other.nodes;
  }
};

/**
 * A set of elements with the node records they reference and their attached
 * boundary faces. The whole mesh is the chunk holding every element.
 *
 * Normalised form: nodes sorted by id and unique, elements sorted by id,
 * boundary sorted by (element, tag, nodes).
 */
struct MeshChunk {
  ElementKind kind = ElementKind::triangle;
  std::int64_t global_nodes = 0;
  std::int64_t global_elements = 0;
  std::vector<Node> nodes;
  std::vector<Element> elements;
  std::vector<BoundaryFace> boundary;

  int dimension() const { return mesh::dimension(kind); }
  const Node* find_node(NodeId id) const;
  Point centroid(const Element& element) const;
  std::vector<ElementId> element_ids() const;
  double total_weight() const;
  /// Empty chunk carrying the same kind and global sizes.
  MeshChunk empty_like() const;
  void normalize();

  bool operator==(const MeshChunk&) const = default;
};

using Mesh = MeshChunk;

/// Checks a whole mesh: dense unique ids, node counts per kind, resolvable references.
void validate(const Mesh& mesh);

/// Fills BoundaryFace::element for every face; throws InputError for an orphan face.
void attach_boundary(Mesh& mesh);

/// Sub-chunk with the given elements, their nodes, and their boundary faces.
MeshChunk extract(const Mesh& mesh, std::span<const ElementId> elements);

/// Elements with ids in the `index`-th of `parts` contiguous id blocks.
MeshChunk block_chunk(const Mesh& mesh, int parts, int index);

/// Union of chunks; node records shared between chunks are kept once.
MeshChunk merge(std::span<const MeshChunk> chunks);

/// Chunk split by a per-element part id, one chunk per part in [0, parts).
std::vector<MeshChunk> split(const MeshChunk& chunk, std::span<const int> part_of, int parts);

simrt::Bytes pack(const MeshChunk& chunk);
MeshChunk unpack(std::span<const std::byte> bytes);

/// Root receives the merged mesh; other ranks an empty chunk.
MeshChunk gather_mesh(simrt::Communicator& comm, const MeshChunk& local, int root = 0);

/// Total map from element id to part. Unassigned entries hold kUnassigned.
class Assignment {
 public:
  static constexpr int kUnassigned = -1;

  Assignment() = default;
  explicit Assignment(std::size_t elements, int part = kUnassigned) : parts_(elements, part) {}
  explicit Assignment(std::vector<int> parts) : parts_(std::move(parts)) {}

  std::size_t size() const { return parts_.size(); }
  /// Part of `element`; throws InputError when out of range or unassigned.
  int at(ElementId element) const;
  int operator[](ElementId element) const { return parts_[static_cast<std::size_t>(element)]; }
  void set(ElementId element, int part);
  bool total() const;
  /// One past the largest part id.
  int part_count() const;
  const std::vector<int>& parts() const { return parts_; }

  bool operator==(const Assignment&) const = default;

 private:
  std::vector<int> parts_;
};

/// Root receives element -> holder world rank for every element held anywhere.
Assignment gather_assignment(simrt::Communicator& comm, const MeshChunk& local,
                             std::int64_t elements, int root = 0);

/// Contiguous groups of `block_size` local elements in local order; the last may be shorter.
std::vector<std::vector<ElementId>> cache_block_groups(std::span<const ElementId> elements,
                                                       std::size_t block_size);

}  // namespace treepart::mesh
