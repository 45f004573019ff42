#include "treepart/partition/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "treepart/mesh/dual_graph.hpp"
#include "treepart/simrt/collectives.hpp"

namespace treepart::partition {

namespace {

constexpr int kResultTag = simrt::kReservedTagBase + 81;

struct Key {
  double c = 0.0;
  ElementId id = 0;

  auto operator<=>(const Key&) const = default;
};

struct Extent {
  double lo[3];
  double hi[3];
  std::int64_t count;
  double weight;
};

Extent merge_extent(const Extent& a, const Extent& b) {
  Extent out{};
  for (int i = 0; i < 3; ++i) {
    out.lo[i] = std::min(a.lo[i], b.lo[i]);
    out.hi[i] = std::max(a.hi[i], b.hi[i]);
  }
  out.count = a.count + b.count;
  out.weight = a.weight + b.weight;
  return out;
}

struct Tally {
  std::int64_t count_lt;
  std::int64_t count_le;
  double weight_lt;
  double weight_le;
};

Tally add_tally(const Tally& a, const Tally& b) {
  return {a.count_lt + b.count_lt, a.count_le + b.count_le, a.weight_lt + b.weight_lt,
          a.weight_le + b.weight_le};
}

struct Candidate {
  Key key;
  std::int64_t count;
};

class Bisector {
 public:
  Bisector(simrt::Communicator& comm, std::span<const WeightedPoint> points, std::vector<int>& out)
      : comm_(comm), points_(points), out_(out) {}

  void run(std::vector<std::size_t> idx, int parts, int offset) {
    if (parts == 1) {
      for (auto i : idx) out_[i] = offset;
      return;
    }
    Extent local{};
    for (int a = 0; a < 3; ++a) {
      local.lo[a] = std::numeric_limits<double>::infinity();
      local.hi[a] = -std::numeric_limits<double>::infinity();
    }
    local.count = static_cast<std::int64_t>(idx.size());
    local.weight = 0.0;
    for (auto i : idx) {
      for (int a = 0; a < 3; ++a) {
        local.lo[a] = std::min(local.lo[a], points_[i].x[a]);
        local.hi[a] = std::max(local.hi[a], points_[i].x[a]);
      }
      local.weight += points_[i].weight;
    }
    const Extent global = simrt::allreduce(comm_, local, merge_extent);
    if (global.count < parts) {
      throw InputError("rcb: " + std::to_string(global.count) + " points cannot fill " +
                       std::to_string(parts) + " parts");
    }
    axis_ = 0;
    for (int a = 1; a < 3; ++a) {
      if (global.hi[a] - global.lo[a] > global.hi[axis_] - global.lo[axis_]) axis_ = a;
    }
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    prefix_.assign(idx.size() + 1, 0.0);
    for (std::size_t i = 0; i < idx.size(); ++i) prefix_[i + 1] = prefix_[i] + points_[idx[i]].weight;

    const int kl = parts / 2;
    const int kr = parts - kl;
    const double target = global.weight * kl / parts;
    Tally t{};
    const Key pivot = select(idx, true, target, t);
    std::int64_t s = std::abs(t.weight_lt - target) <= std::abs(t.weight_le - target) ? t.count_lt
                                                                                       : t.count_le;
    s = std::clamp<std::int64_t>(s, kl, global.count - kr);

    Key bound = pivot;
    bool inclusive = true;
    if (s == t.count_lt) {
      inclusive = false;
    } else if (s != t.count_le) {
      Tally ignored{};
      bound = select(idx, false, static_cast<double>(s), ignored);
    }
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto i : idx) {
      const bool goes_left = inclusive ? key(i) <= bound : key(i) < bound;
      (goes_left ? left : right).push_back(i);
    }
    run(std::move(left), kl, offset);
    run(std::move(right), kr, offset + kl);
  }

 private:
  Key key(std::size_t i) const { return {points_[i].x[axis_], points_[i].id}; }

  // Key K with measure(< K) < goal <= measure(<= K); idx is sorted by key.
  Key select(const std::vector<std::size_t>& idx, bool by_weight, double goal, Tally& at) {
    std::size_t lo = 0;
    std::size_t hi = idx.size();
    auto position = [&](const Key& k, bool inclusive) {
      auto it = inclusive ? std::upper_bound(idx.begin(), idx.end(), k,
                                             [&](const Key& v, std::size_t i) { return v < key(i); })
                          : std::lower_bound(idx.begin(), idx.end(), k,
                                             [&](std::size_t i, const Key& v) { return key(i) < v; });
      return static_cast<std::size_t>(it - idx.begin());
    };
    while (true) {
      Candidate mine{{}, static_cast<std::int64_t>(hi - lo)};
      if (hi > lo) mine.key = key(idx[lo + (hi - lo - 1) / 2]);
      auto medians = simrt::gather(comm_, simrt::ByteWriter().put(mine).take());
      simrt::Bytes chosen;
      if (comm_.rank() == 0) chosen = simrt::ByteWriter().put(pick(medians)).take();
      const Key pivot = simrt::ByteReader(simrt::broadcast(comm_, std::move(chosen))).get<Key>();

      const std::size_t lt = position(pivot, false);
      const std::size_t le = position(pivot, true);
      Tally local{static_cast<std::int64_t>(lt), static_cast<std::int64_t>(le), prefix_[lt],
                  prefix_[le]};
      at = simrt::allreduce(comm_, local, add_tally);
      const double below = by_weight ? at.weight_lt : static_cast<double>(at.count_lt);
      const double upto = by_weight ? at.weight_le : static_cast<double>(at.count_le);
      if (upto < goal) {
        lo = std::max(lo, le);
      } else if (below >= goal) {
        hi = std::min(hi, lt);
      } else {
        return pivot;
      }
      lo = std::min(lo, hi);
    }
  }

  // Median of the local medians, weighted by candidate counts.
  static Key pick(const std::vector<simrt::Bytes>& medians) {
    std::vector<Candidate> c;
    std::int64_t total = 0;
    for (const auto& bytes : medians) {
      auto m = simrt::ByteReader(bytes).get<Candidate>();
      if (m.count > 0) {
        c.push_back(m);
        total += m.count;
      }
    }
    if (c.empty()) throw InvariantViolation("rcb: selection ran out of candidates");
    std::sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) { return a.key < b.key; });
    std::int64_t acc = 0;
    for (const auto& m : c) {
      acc += m.count;
      if (2 * acc >= total) return m.key;
    }
    return c.back().key;
  }

  simrt::Communicator& comm_;
  std::span<const WeightedPoint> points_;
  std::vector<int>& out_;
  int axis_ = 0;
  std::vector<double> prefix_;
};

std::vector<int> distributed_graph(simrt::Communicator& comm, const mesh::MeshChunk& local,
                                   const PartitionRequest& request) {
  const auto rows = mesh::build_dual_graph(comm, local);
  simrt::ByteWriter w;
  w.put<std::uint64_t>(rows.vertices.size());
  for (std::size_t i = 0; i < rows.vertices.size(); ++i) {
    w.put(rows.vertices[i]).put(rows.weights[i]).put_vector(rows.adjacency[i]);
  }
  auto gathered = simrt::gather(comm, w.take());
  if (comm.rank() == 0) {
    std::vector<std::vector<ElementId>> owned(comm.size());
    std::vector<std::tuple<ElementId, double, std::vector<ElementId>>> all;
    for (int r = 0; r < comm.size(); ++r) {
      simrt::ByteReader reader(gathered[r]);
      const auto n = reader.get<std::uint64_t>();
      for (std::uint64_t i = 0; i < n; ++i) {
        const auto id = reader.get<ElementId>();
        const auto weight = reader.get<double>();
        all.emplace_back(id, weight, reader.get_vector<ElementId>());
        owned[r].push_back(id);
      }
    }
    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    mesh::DualGraphPart merged;
    for (auto& [id, weight, adj] : all) {
      merged.vertices.push_back(id);
      merged.weights.push_back(weight);
      merged.adjacency.push_back(std::move(adj));
    }
    const auto part =
        graph_partition(mesh::to_local_graph(merged), request.parts, request.tolerance);
    std::unordered_map<ElementId, int> part_of;
    for (std::size_t i = 0; i < merged.vertices.size(); ++i) part_of[merged.vertices[i]] = part[i];
    std::vector<int> mine;
    for (int r = 0; r < comm.size(); ++r) {
      std::vector<int> dest;
      for (auto id : owned[r]) dest.push_back(part_of.at(id));
      if (r == 0) {
        mine = std::move(dest);
      } else {
        comm.send(r, kResultTag, simrt::ByteWriter().put_vector(dest).take());
      }
    }
    return mine;
  }
  return simrt::ByteReader(comm.recv(0, kResultTag).bytes).get_vector<int>();
}

}  // namespace

std::vector<int> distributed_rcb(simrt::Communicator& comm, std::span<const WeightedPoint> local,
                                 int parts) {
  check(PartitionRequest{parts, Method::rcb, 1.0});
  for (const auto& p : local) {
    if (!(p.weight > 0.0)) {
      throw InputError("rcb: element " + std::to_string(p.id) + " has non-positive weight");
    }
  }
  std::vector<int> out(local.size(), 0);
  if (parts == 1) return out;
  std::vector<std::size_t> idx(local.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Bisector(comm, local, out).run(std::move(idx), parts, 0);
  return out;
}

std::vector<int> partition_distributed(simrt::Communicator& comm, const mesh::MeshChunk& local,
                                       const PartitionRequest& request) {
  check(request);
  if (request.method == Method::graph) return distributed_graph(comm, local, request);
  std::vector<WeightedPoint> points;
  points.reserve(local.elements.size());
  for (const auto& e : local.elements) points.push_back({e.id, local.centroid(e), e.weight});
  return distributed_rcb(comm, points, request.parts);
}

}  // namespace treepart::partition
