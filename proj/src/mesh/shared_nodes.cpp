#include "treepart/mesh/shared_nodes.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "treepart/odd/directory.hpp"
#include "treepart/simrt/collectives.hpp"

namespace treepart::mesh {

namespace {
constexpr int kSharedTag = simrt::kReservedTagBase + 64;
}

void SharedNodeTable::normalize() {
  for (auto it = entries_.begin(); it != entries_.end();) {
    auto& list = it->second;
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    it = list.empty() ? entries_.erase(it) : std::next(it);
  }
}

std::vector<NodeId> SharedNodeTable::between(int p, int q) const {
  auto it = entries_.find({p, q});
  return it == entries_.end() ? std::vector<NodeId>{} : it->second;
}

std::vector<int> SharedNodeTable::neighbors(int p) const {
  std::vector<int> out;
  for (auto it = entries_.lower_bound({p, std::numeric_limits<int>::min()});
       it != entries_.end() && it->first.first == p; ++it) {
    out.push_back(it->first.second);
  }
  return out;
}

bool SharedNodeTable::symmetric() const {
  for (const auto& [key, nodes] : entries_) {
    auto it = entries_.find({key.second, key.first});
    if (it == entries_.end() || it->second != nodes) return false;
  }
  return true;
}

void SharedNodeTable::merge(const SharedNodeTable& other) {
  for (const auto& [key, nodes] : other.entries_) {
    auto& list = entries_[key];
    list.insert(list.end(), nodes.begin(), nodes.end());
  }
  normalize();
}

SharedNodeTable find_shared_nodes(simrt::Communicator& comm, const MeshChunk& local,
                                  const Assignment& assignment) {
  std::set<std::pair<NodeId, int>> incidences;
  for (const auto& e : local.elements) {
    const int part = assignment.at(e.id);
    if (part >= comm.size()) {
      throw InputError("shared nodes: part " + std::to_string(part) + " of element " +
                       std::to_string(e.id) + " is not a rank of the communicator");
    }
    for (NodeId n : e.nodes) incidences.insert({n, part});
  }
  std::vector<odd::Entry> entries;
  entries.reserve(incidences.size());
  for (const auto& [node, part] : incidences) {
    entries.push_back({static_cast<odd::Key>(node), simrt::ByteWriter().put(part).take()});
  }
  auto directory =
      odd::Directory::build(comm, entries, static_cast<odd::Key>(local.global_nodes));

  // Owner side: nodes with two or more distinct parts are reported to each sharer.
  std::map<int, simrt::ByteWriter> writers;
  std::map<int, std::uint64_t> counts;
  for (const auto& [key, values] : directory.shard()) {
    std::vector<int> parts;
    for (const auto& v : values) parts.push_back(simrt::ByteReader(v).get<int>());
    std::sort(parts.begin(), parts.end());
    parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
    if (parts.size() < 2) continue;
    for (int p : parts) {
      writers[p].put(static_cast<NodeId>(key)).put_vector(parts);
      ++counts[p];
    }
  }
  std::map<int, simrt::Bytes> outgoing;
  for (auto& [dest, w] : writers) {
    auto body = w.take();
    auto framed = simrt::ByteWriter().put(counts[dest]).take();
    framed.insert(framed.end(), body.begin(), body.end());
    outgoing[dest] = std::move(framed);
  }

  SharedNodeTable rows;
  const int me = comm.rank();
  for (const auto& msg : odd::blind_exchange(comm, std::move(outgoing), kSharedTag)) {
    simrt::ByteReader r(msg.bytes);
    const auto n = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto node = r.get<NodeId>();
      for (int q : r.get_vector<int>()) {
        if (q != me) rows.add(me, q, node);
      }
    }
  }
  rows.normalize();
  return rows;
}

SharedNodeTable find_shared_nodes(simrt::Communicator& comm, const MeshChunk& local) {
  Assignment holder(static_cast<std::size_t>(local.global_elements));
  for (const auto& e : local.elements) holder.set(e.id, comm.rank());
  return find_shared_nodes(comm, local, holder);
}

SharedNodeTable gather_shared_nodes(simrt::Communicator& comm, const SharedNodeTable& rows,
                                    int root) {
  simrt::ByteWriter w;
  w.put<std::uint64_t>(rows.entries().size());
  for (const auto& [key, nodes] : rows.entries()) {
    w.put(key.first).put(key.second).put_vector(nodes);
  }
  auto parts = simrt::gather(comm, w.take(), root);
  SharedNodeTable table;
  for (const auto& bytes : parts) {
    simrt::ByteReader r(bytes);
    const auto n = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n; ++i) {
      const int p = r.get<int>();
      const int q = r.get<int>();
      table.set(p, q, r.get_vector<NodeId>());
    }
  }
  table.normalize();
  return table;
}

double halo_growth(const Graph& dual, const Assignment& assignment, int layers) {
  if (layers != 1 && layers != 2) {
    throw InputError("halo growth: layers must be 1 or 2, got " + std::to_string(layers));
  }
  const auto n = dual.vertex_count();
  if (assignment.size() != n) throw InputError("halo growth: assignment size mismatch");
  if (n == 0) return 0.0;
  const int parts = assignment.part_count();
  std::vector<std::vector<std::int64_t>> members(parts);
  for (std::size_t v = 0; v < n; ++v) members[assignment.at(static_cast<ElementId>(v))].push_back(v);

  std::vector<int> stamp(n, -1);
  std::int64_t grown = 0;
  for (int p = 0; p < parts; ++p) {
    std::vector<std::int64_t> frontier = members[p];
    for (auto v : frontier) stamp[v] = p;
    std::int64_t size = static_cast<std::int64_t>(frontier.size());
    for (int layer = 0; layer < layers; ++layer) {
      std::vector<std::int64_t> next;
      for (auto v : frontier) {
        for (auto u : dual.neighbors(v)) {
          if (stamp[u] != p) {
            stamp[u] = p;
            next.push_back(u);
          }
        }
      }
      size += static_cast<std::int64_t>(next.size());
      frontier.swap(next);
    }
    grown += size;
  }
  return static_cast<double>(grown - static_cast<std::int64_t>(n)) / static_cast<double>(n) * 100.0;
}

}  // namespace treepart::mesh
