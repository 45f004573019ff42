#include "treepart/mesh/mesh.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>

#include "treepart/simrt/collectives.hpp"

namespace treepart::mesh {

int nodes_per_element(ElementKind kind) { return kind == ElementKind::triangle ? 3 : 4; }
int face_size(ElementKind kind) { return kind == ElementKind::triangle ? 2 : 3; }
int dimension(ElementKind kind) { return kind == ElementKind::triangle ? 2 : 3; }

std::string_view to_string(ElementKind kind) {
  return kind == ElementKind::triangle ? "triangle" : "tetrahedron";
}

std::optional<ElementKind> parse_kind(std::string_view name) {
  if (name == "triangle") return ElementKind::triangle;
  if (name == "tetrahedron") return ElementKind::tetrahedron;
  return std::nullopt;
}

const Node* MeshChunk::find_node(NodeId id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const Node& n, NodeId v) { return n.id < v; });
  return it != nodes.end() && it->id == id ? &*it : nullptr;
}

Point MeshChunk::centroid(const Element& element) const {
  Point c{};
  for (NodeId id : element.nodes) {
    const Node* n = find_node(id);
    if (n == nullptr) {
      throw InvariantViolation("element " + std::to_string(element.id) + " references node " +
                               std::to_string(id) + " missing from its chunk");
    }
    for (int d = 0; d < 3; ++d) c[d] += n->x[d];
  }
  for (double& v : c) v /= static_cast<double>(element.nodes.size());
  return c;
}

std::vector<ElementId> MeshChunk::element_ids() const {
  std::vector<ElementId> ids;
  ids.reserve(elements.size());
  for (const auto& e : elements) ids.push_back(e.id);
  return ids;
}

double MeshChunk::total_weight() const {
  double sum = 0.0;
  for (const auto& e : elements) sum += e.weight;
  return sum;
}

MeshChunk MeshChunk::empty_like() const {
  MeshChunk out;
  out.kind = kind;
  out.global_nodes = global_nodes;
  out.global_elements = global_elements;
  return out;
}

void MeshChunk::normalize() {
  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [](const Node& a, const Node& b) { return a.id == b.id; }),
              nodes.end());
  std::sort(elements.begin(), elements.end(),
            [](const Element& a, const Element& b) { return a.id < b.id; });
  std::sort(boundary.begin(), boundary.end());
}

void validate(const Mesh& mesh) {
  const auto per = static_cast<std::size_t>(nodes_per_element(mesh.kind));
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    if (mesh.nodes[i].id != static_cast<NodeId>(i)) {
      throw InputError("nodes: record " + std::to_string(i) + " has id " +
                       std::to_string(mesh.nodes[i].id) + "; ids must be unique and dense from 0");
    }
  }
  for (std::size_t i = 0; i < mesh.elements.size(); ++i) {
    const auto& e = mesh.elements[i];
    if (e.id != static_cast<ElementId>(i)) {
      throw InputError("elements: record " + std::to_string(i) + " has id " +
                       std::to_string(e.id) + "; ids must be unique and dense from 0");
    }
    if (e.nodes.size() != per) {
      throw InputError("elements: element " + std::to_string(e.id) + " has " +
                       std::to_string(e.nodes.size()) + " nodes, expected " + std::to_string(per) +
                       " for " + std::string(to_string(mesh.kind)));
    }
    for (NodeId n : e.nodes) {
      if (n < 0 || n >= static_cast<NodeId>(mesh.nodes.size())) {
        throw InputError("elements: element " + std::to_string(e.id) + " references unknown node " +
                         std::to_string(n));
      }
    }
    if (!(e.weight > 0.0)) {
      throw InputError("elements: element " + std::to_string(e.id) + " has non-positive weight");
    }
  }
  for (std::size_t i = 0; i < mesh.boundary.size(); ++i) {
    const auto& f = mesh.boundary[i];
    if (f.nodes.size() != static_cast<std::size_t>(face_size(mesh.kind))) {
      throw InputError("boundary: record " + std::to_string(i) + " has " +
                       std::to_string(f.nodes.size()) + " nodes, expected " +
                       std::to_string(face_size(mesh.kind)));
    }
  }
  if (mesh.global_nodes != static_cast<std::int64_t>(mesh.nodes.size()) ||
      mesh.global_elements != static_cast<std::int64_t>(mesh.elements.size())) {
    throw InputError("mesh: global sizes disagree with record counts");
  }
}

void attach_boundary(Mesh& mesh) {
  std::unordered_map<NodeId, std::vector<ElementId>> incident;
  for (const auto& e : mesh.elements) {
    for (NodeId n : e.nodes) incident[n].push_back(e.id);
  }
  for (std::size_t i = 0; i < mesh.boundary.size(); ++i) {
    auto& face = mesh.boundary[i];
    std::vector<ElementId> common;
    for (std::size_t k = 0; k < face.nodes.size(); ++k) {
      auto it = incident.find(face.nodes[k]);
      if (it == incident.end()) {
        common.clear();
        break;
      }
      std::vector<ElementId> sorted = it->second;
      std::sort(sorted.begin(), sorted.end());
      if (k == 0) {
        common = std::move(sorted);
      } else {
        std::vector<ElementId> next;
        std::set_intersection(common.begin(), common.end(), sorted.begin(), sorted.end(),
                              std::back_inserter(next));
        common = std::move(next);
      }
    }
    if (common.empty()) {
      throw InputError("boundary: record " + std::to_string(i) +
                       " is not a face of any element");
    }
    face.element = common.front();
  }
  std::sort(mesh.boundary.begin(), mesh.boundary.end());
}

MeshChunk extract(const Mesh& mesh, std::span<const ElementId> elements) {
  MeshChunk out = mesh.empty_like();
  std::vector<NodeId> used;
  std::vector<char> wanted(mesh.elements.size(), 0);
  for (ElementId id : elements) {
    if (id < 0 || id >= static_cast<ElementId>(mesh.elements.size())) {
      throw InputError("extract: unknown element " + std::to_string(id));
    }
    wanted[id] = 1;
  }
  for (const auto& e : mesh.elements) {
    if (!wanted[e.id]) continue;
    out.elements.push_back(e);
    used.insert(used.end(), e.nodes.begin(), e.nodes.end());
  }
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  out.nodes.reserve(used.size());
  for (NodeId n : used) out.nodes.push_back(*mesh.find_node(n));
  for (const auto& f : mesh.boundary) {
    if (f.element >= 0 && wanted[f.element]) out.boundary.push_back(f);
  }
  out.normalize();
  return out;
}

MeshChunk block_chunk(const Mesh& mesh, int parts, int index) {
  const auto n = static_cast<std::int64_t>(mesh.elements.size());
  const std::int64_t first = n * index / parts;
  const std::int64_t last = n * (index + 1) / parts;
  std::vector<ElementId> ids;
  for (std::int64_t i = first; i < last; ++i) ids.push_back(mesh.elements[i].id);
  return extract(mesh, ids);
}

MeshChunk merge(std::span<const MeshChunk> chunks) {
  if (chunks.empty()) return {};
  MeshChunk out = chunks.front().empty_like();
  for (const auto& c : chunks) {
    out.nodes.insert(out.nodes.end(), c.nodes.begin(), c.nodes.end());
    out.elements.insert(out.elements.end(), c.elements.begin(), c.elements.end());
    out.boundary.insert(out.boundary.end(), c.boundary.begin(), c.boundary.end());
  }
  out.normalize();
  return out;
}

std::vector<MeshChunk> split(const MeshChunk& chunk, std::span<const int> part_of, int parts) {
  if (part_of.size() != chunk.elements.size()) {
    throw InvariantViolation("split: part list does not match element count");
  }
  std::vector<std::vector<ElementId>> ids(parts);
  for (std::size_t i = 0; i < part_of.size(); ++i) {
    if (part_of[i] < 0 || part_of[i] >= parts) {
      throw InputError("split: element " + std::to_string(chunk.elements[i].id) +
                       " has invalid part " + std::to_string(part_of[i]));
    }
    ids[part_of[i]].push_back(chunk.elements[i].id);
  }
  // extract() expects dense ids; index through a local map instead.
  std::unordered_map<ElementId, std::size_t> local;
  for (std::size_t i = 0; i < chunk.elements.size(); ++i) local[chunk.elements[i].id] = i;
  std::multimap<ElementId, const BoundaryFace*> faces;
  for (const auto& f : chunk.boundary) faces.emplace(f.element, &f);

  std::vector<MeshChunk> out;
  out.reserve(parts);
  for (int p = 0; p < parts; ++p) {
    MeshChunk c = chunk.empty_like();
    std::vector<NodeId> used;
    for (ElementId id : ids[p]) {
      const auto& e = chunk.elements[local[id]];
      c.elements.push_back(e);
      used.insert(used.end(), e.nodes.begin(), e.nodes.end());
      auto [lo, hi] = faces.equal_range(id);
      for (auto it = lo; it != hi; ++it) c.boundary.push_back(*it->second);
    }
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    for (NodeId n : used) {
      const Node* node = chunk.find_node(n);
      if (node == nullptr) {
        throw InvariantViolation("split: node " + std::to_string(n) + " missing from chunk");
      }
      c.nodes.push_back(*node);
    }
    c.normalize();
    out.push_back(std::move(c));
  }
  return out;
}

simrt::Bytes pack(const MeshChunk& chunk) {
  simrt::ByteWriter w;
  w.put(static_cast<std::uint8_t>(chunk.kind));
  w.put(chunk.global_nodes).put(chunk.global_elements);
  w.put<std::uint64_t>(chunk.nodes.size());
  for (const auto& n : chunk.nodes) w.put(n.id).put(n.x);
  const int per = nodes_per_element(chunk.kind);
  w.put<std::uint64_t>(chunk.elements.size());
  for (const auto& e : chunk.elements) {
    w.put(e.id).put(e.weight);
    for (int k = 0; k < per; ++k) w.put(e.nodes[k]);
  }
  const int fs = face_size(chunk.kind);
  w.put<std::uint64_t>(chunk.boundary.size());
  for (const auto& f : chunk.boundary) {
    w.put(f.tag).put(f.element);
    for (int k = 0; k < fs; ++k) w.put(f.nodes[k]);
  }
  return w.take();
}

MeshChunk unpack(std::span<const std::byte> bytes) {
  simrt::ByteReader r(bytes);
  MeshChunk c;
  c.kind = static_cast<ElementKind>(r.get<std::uint8_t>());
  c.global_nodes = r.get<std::int64_t>();
  c.global_elements = r.get<std::int64_t>();
  c.nodes.resize(r.get<std::uint64_t>());
  for (auto& n : c.nodes) {
    n.id = r.get<NodeId>();
    n.x = r.get<Point>();
  }
  const int per = nodes_per_element(c.kind);
  c.elements.resize(r.get<std::uint64_t>());
  for (auto& e : c.elements) {
    e.id = r.get<ElementId>();
    e.weight = r.get<double>();
    e.nodes.resize(per);
    for (auto& n : e.nodes) n = r.get<NodeId>();
  }
  const int fs = face_size(c.kind);
  c.boundary.resize(r.get<std::uint64_t>());
  for (auto& f : c.boundary) {
    f.tag = r.get<int>();
    f.element = r.get<ElementId>();
    f.nodes.resize(fs);
    for (auto& n : f.nodes) n = r.get<NodeId>();
  }
  return c;
}

MeshChunk gather_mesh(simrt::Communicator& comm, const MeshChunk& local, int root) {
  auto parts = simrt::gather(comm, pack(local), root);
  if (comm.rank() != root) return local.empty_like();
  std::vector<MeshChunk> chunks;
  chunks.reserve(parts.size());
  for (const auto& p : parts) chunks.push_back(unpack(p));
  return merge(chunks);
}

int Assignment::at(ElementId element) const {
  if (element < 0 || element >= static_cast<ElementId>(parts_.size())) {
    throw InputError("assignment: element " + std::to_string(element) + " out of range");
  }
  const int part = parts_[element];
  if (part == kUnassigned) {
    throw InputError("assignment: element " + std::to_string(element) + " is unassigned");
  }
  return part;
}

void Assignment::set(ElementId element, int part) {
  if (element < 0 || element >= static_cast<ElementId>(parts_.size())) {
    throw InputError("assignment: element " + std::to_string(element) + " out of range");
  }
  parts_[element] = part;
}

bool Assignment::total() const {
  return std::none_of(parts_.begin(), parts_.end(), [](int p) { return p == kUnassigned; });
}

int Assignment::part_count() const {
  int count = 0;
  for (int p : parts_) count = std::max(count, p + 1);
  return count;
}

Assignment gather_assignment(simrt::Communicator& comm, const MeshChunk& local,
                             std::int64_t elements, int root) {
  auto parts = simrt::gather(comm, simrt::ByteWriter().put_vector(local.element_ids()).take(), root);
  Assignment out;
  if (comm.rank() != root) return out;
  out = Assignment(static_cast<std::size_t>(elements));
  for (int r = 0; r < comm.size(); ++r) {
    for (ElementId id : simrt::ByteReader(parts[r]).get_vector<ElementId>()) {
      if (id < 0 || id >= elements) {
        throw InvariantViolation("element " + std::to_string(id) + " outside the mesh");
      }
      if (out[id] != Assignment::kUnassigned) {
        throw InvariantViolation("element " + std::to_string(id) + " held by two ranks");
      }
      out.set(id, comm.world_rank_of(r));
    }
  }
  return out;
}

std::vector<std::vector<ElementId>> cache_block_groups(std::span<const ElementId> elements,
                                                       std::size_t block_size) {
  if (block_size == 0) throw InputError("cache blocks: block size must be >= 1");
  std::vector<std::vector<ElementId>> groups;
  for (std::size_t i = 0; i < elements.size(); i += block_size) {
    const auto end = std::min(elements.size(), i + block_size);
    groups.emplace_back(elements.begin() + i, elements.begin() + end);
  }
  return groups;
}

}  // namespace treepart::mesh
