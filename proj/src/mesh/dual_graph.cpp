#include "treepart/mesh/dual_graph.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "treepart/odd/directory.hpp"
#include "treepart/simrt/collectives.hpp"

namespace treepart::mesh {

namespace {

using Incidence = std::unordered_map<NodeId, std::vector<ElementId>>;

const std::vector<ElementId>& incident(const Incidence& inc, NodeId node) {
  static const std::vector<ElementId> none;
  auto it = inc.find(node);
  return it == inc.end() ? none : it->second;
}

// Faces are the element's node tuple with one node left out.
DualGraphPart face_adjacency(const MeshChunk& chunk, const Incidence& inc) {
  DualGraphPart out;
  out.vertices.reserve(chunk.elements.size());
  out.adjacency.reserve(chunk.elements.size());
  std::vector<NodeId> face;
  std::vector<ElementId> common;
  std::vector<ElementId> scratch;
  for (const auto& e : chunk.elements) {
    std::vector<ElementId> adj;
    for (std::size_t skip = 0; skip < e.nodes.size(); ++skip) {
      face.clear();
      for (std::size_t k = 0; k < e.nodes.size(); ++k) {
        if (k != skip) face.push_back(e.nodes[k]);
      }
      common = incident(inc, face[0]);
      for (std::size_t k = 1; k < face.size() && !common.empty(); ++k) {
        const auto& other = incident(inc, face[k]);
        scratch.clear();
        std::set_intersection(common.begin(), common.end(), other.begin(), other.end(),
                              std::back_inserter(scratch));
        common.swap(scratch);
      }
      if (common.size() > 2 && common.front() == e.id) {
        std::sort(face.begin(), face.end());
        out.non_manifold.push_back({face, common});
      }
      for (ElementId c : common) {
        if (c != e.id) adj.push_back(c);
      }
    }
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    out.vertices.push_back(e.id);
    out.adjacency.push_back(std::move(adj));
    out.weights.push_back(e.weight);
  }
  std::sort(out.non_manifold.begin(), out.non_manifold.end(),
            [](const NonManifoldFace& a, const NonManifoldFace& b) { return a.nodes < b.nodes; });
  return out;
}

}  // namespace

DualGraphPart build_dual_graph(simrt::Communicator& comm, const MeshChunk& local) {
  std::vector<odd::Entry> entries;
  std::vector<odd::Key> wanted;
  for (const auto& e : local.elements) {
    for (NodeId n : e.nodes) {
      entries.push_back({static_cast<odd::Key>(n), simrt::ByteWriter().put(e.id).take()});
      wanted.push_back(static_cast<odd::Key>(n));
    }
  }
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

  auto directory =
      odd::Directory::build(comm, entries, static_cast<odd::Key>(local.global_nodes));
  Incidence inc;
  for (auto& result : directory.query(wanted)) {
    auto& list = inc[static_cast<NodeId>(result.key)];
    list.reserve(result.values.size());
    for (const auto& v : result.values) list.push_back(simrt::ByteReader(v).get<ElementId>());
    std::sort(list.begin(), list.end());
  }
  return face_adjacency(local, inc);
}

DualGraphPart local_dual_graph(const MeshChunk& chunk) {
  Incidence inc;
  for (const auto& e : chunk.elements) {
    for (NodeId n : e.nodes) inc[n].push_back(e.id);
  }
  for (auto& [node, list] : inc) std::sort(list.begin(), list.end());
  return face_adjacency(chunk, inc);
}

Graph gather_dual_graph(simrt::Communicator& comm, const DualGraphPart& part,
                        std::int64_t elements, int root) {
  simrt::ByteWriter w;
  w.put<std::uint64_t>(part.vertices.size());
  for (std::size_t i = 0; i < part.vertices.size(); ++i) {
    w.put(part.vertices[i]).put(part.weights[i]).put_vector(part.adjacency[i]);
  }
  auto parts = simrt::gather(comm, w.take(), root);
  if (comm.rank() != root) return {};

  std::vector<std::vector<std::int64_t>> lists(static_cast<std::size_t>(elements));
  std::vector<double> weights(static_cast<std::size_t>(elements), 1.0);
  for (const auto& bytes : parts) {
    simrt::ByteReader r(bytes);
    const auto n = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto v = r.get<ElementId>();
      weights[v] = r.get<double>();
      lists[v] = r.get_vector<ElementId>();
    }
  }
  return Graph::from_adjacency(lists, std::move(weights));
}

Graph to_local_graph(const DualGraphPart& part) {
  std::unordered_map<ElementId, std::int64_t> index;
  for (std::size_t i = 0; i < part.vertices.size(); ++i) index[part.vertices[i]] = static_cast<std::int64_t>(i);
  std::vector<std::vector<std::int64_t>> lists(part.vertices.size());
  for (std::size_t i = 0; i < part.vertices.size(); ++i) {
    for (ElementId u : part.adjacency[i]) {
      if (auto it = index.find(u); it != index.end()) lists[i].push_back(it->second);
    }
  }
  return Graph::from_adjacency(lists, part.weights);
}

}  // namespace treepart::mesh
