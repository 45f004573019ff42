#include "treepart/odd/directory.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace treepart::odd {

namespace {

constexpr int kBuildTag = simrt::kReservedTagBase + 32;
constexpr int kQueryTag = simrt::kReservedTagBase + 33;
constexpr int kReplyTag = simrt::kReservedTagBase + 34;
constexpr int kRangeTag = simrt::kReservedTagBase + 35;
constexpr int kRangeReplyTag = simrt::kReservedTagBase + 36;

}  // namespace

OwnerMap::OwnerMap(Key key_space, int ranks) : key_space_(key_space), ranks_(ranks) {
  if (ranks < 1) throw InputError("owner map: rank count must be >= 1");
  block_ = std::max<Key>(1, (key_space + ranks - 1) / ranks);
}

int OwnerMap::owner(Key key) const {
  if (key >= key_space_) {
    throw InputError("owner: key " + std::to_string(key) + " outside [0, " +
                     std::to_string(key_space_) + ")");
  }
  return static_cast<int>(std::min<Key>(key / block_, ranks_ - 1));
}

std::pair<Key, Key> OwnerMap::interval(int rank) const {
  const Key lo = std::min<Key>(static_cast<Key>(rank) * block_, key_space_);
  const Key hi = rank == ranks_ - 1 ? key_space_
                                    : std::min<Key>(static_cast<Key>(rank + 1) * block_, key_space_);
  return {lo, std::max(lo, hi)};
}

std::vector<int> OwnerMap::owners_of_range(Key lo, Key hi) const {
  if (lo > hi || hi > key_space_) {
    throw InputError("range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                     ") is inverted or exceeds the key space");
  }
  std::vector<int> out;
  if (lo == hi) return out;
  for (int r = owner(lo); r <= owner(hi - 1); ++r) out.push_back(r);
  return out;
}

std::vector<simrt::Message> blind_exchange(simrt::Communicator& comm,
                                           std::map<int, Bytes> outgoing, int tag) {
  const int me = comm.rank();
  std::vector<int> targets;
  for (const auto& [dest, bytes] : outgoing) {
    if (dest != me) targets.push_back(dest);
  }
  const int expected = comm.blind_count(targets);

  std::vector<simrt::Message> received;
  received.reserve(expected + 1);
  if (auto self = outgoing.find(me); self != outgoing.end()) {
    received.push_back({me, tag, std::move(self->second)});
    outgoing.erase(self);
  }
  for (auto& [dest, bytes] : outgoing) comm.send(dest, tag, std::move(bytes));

  for (int i = 0; i < expected; ++i) {
    const auto status = comm.probe(simrt::kAnySource, tag);
    received.push_back(comm.recv(status.source, status.tag));
  }
  std::stable_sort(received.begin(), received.end(),
                   [](const simrt::Message& a, const simrt::Message& b) { return a.source < b.source; });
  return received;
}

void Directory::check_key(Key key, const char* op) const {
  if (key >= owners_.key_space()) {
    throw InputError(std::string("directory ") + op + ": key " + std::to_string(key) +
                     " outside [0, " + std::to_string(owners_.key_space()) + ")");
  }
}

Directory Directory::build(simrt::Communicator comm, std::span<const Entry> pairs, Key key_space) {
  Directory dir(comm, OwnerMap(key_space, comm.size()));

  std::map<int, simrt::ByteWriter> writers;
  std::map<int, std::uint64_t> counts;
  for (const auto& e : pairs) {
    dir.check_key(e.key, "build");
    const int dest = dir.owners_.owner(e.key);
    writers[dest].put(e.key).put_bytes(e.value);
    ++counts[dest];
  }
  std::map<int, Bytes> outgoing;
  for (auto& [dest, w] : writers) {
    simrt::ByteWriter framed;
    framed.put(counts[dest]);
    auto body = w.take();
    auto head = framed.take();
    head.insert(head.end(), body.begin(), body.end());
    outgoing[dest] = std::move(head);
  }

  for (const auto& msg : blind_exchange(dir.comm_, std::move(outgoing), kBuildTag)) {
    simrt::ByteReader r(msg.bytes);
    const auto n = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n; ++i) {
      const Key key = r.get<Key>();
      dir.shard_[key].push_back(r.get_bytes());
    }
  }
  return dir;
}

std::vector<QueryResult> Directory::query(std::span<const Key> keys) {
  std::map<int, std::set<Key>> wanted;
  for (Key k : keys) {
    check_key(k, "query");
    wanted[owners_.owner(k)].insert(k);
  }
  std::map<int, Bytes> requests;
  for (const auto& [dest, ks] : wanted) {
    requests[dest] = simrt::ByteWriter().put_vector(std::vector<Key>(ks.begin(), ks.end())).take();
  }

  const int me = comm_.rank();
  std::map<Key, std::vector<Bytes>> answers;
  auto absorb = [&answers](const Bytes& reply) {
    simrt::ByteReader r(reply);
    const auto n = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n; ++i) {
      const Key key = r.get<Key>();
      const auto m = r.get<std::uint64_t>();
      auto& values = answers[key];
      for (std::uint64_t j = 0; j < m; ++j) values.push_back(r.get_bytes());
    }
  };

  for (const auto& msg : blind_exchange(comm_, std::move(requests), kQueryTag)) {
    const auto asked = simrt::ByteReader(msg.bytes).get_vector<Key>();
    simrt::ByteWriter w;
    w.put<std::uint64_t>(asked.size());
    for (Key k : asked) {
      w.put(k);
      auto it = shard_.find(k);
      if (it == shard_.end()) {
        w.put<std::uint64_t>(0);
        continue;
      }
      w.put<std::uint64_t>(it->second.size());
      for (const auto& v : it->second) w.put_bytes(v);
    }
    if (msg.source == me) {
      absorb(w.take());
    } else {
      comm_.send(msg.source, kReplyTag, w.take());
    }
  }
  for (const auto& [owner, ks] : wanted) {
    if (owner != me) absorb(comm_.recv(owner, kReplyTag).bytes);
  }

  std::vector<QueryResult> out;
  out.reserve(keys.size());
  for (Key k : keys) {
    auto it = answers.find(k);
    out.push_back({k, it == answers.end() ? std::vector<Bytes>{} : it->second});
  }
  return out;
}

std::vector<Entry> Directory::range_query(Key lo, Key hi) {
  const auto owners = owners_.owners_of_range(lo, hi);
  std::map<int, Bytes> requests;
  for (int r : owners) requests[r] = simrt::ByteWriter().put(lo).put(hi).take();

  const int me = comm_.rank();
  std::map<int, Bytes> replies;
  for (const auto& msg : blind_exchange(comm_, std::move(requests), kRangeTag)) {
    simrt::ByteReader r(msg.bytes);
    const Key a = r.get<Key>();
    const Key b = r.get<Key>();
    simrt::ByteWriter w;
    std::uint64_t n = 0;
    for (auto it = shard_.lower_bound(a); it != shard_.end() && it->first < b; ++it) {
      n += it->second.size();
    }
    w.put(n);
    for (auto it = shard_.lower_bound(a); it != shard_.end() && it->first < b; ++it) {
      for (const auto& v : it->second) w.put(it->first).put_bytes(v);
    }
    if (msg.source == me) {
      replies[me] = w.take();
    } else {
      comm_.send(msg.source, kRangeReplyTag, w.take());
    }
  }
  for (int r : owners) {
    if (r != me) replies[r] = comm_.recv(r, kRangeReplyTag).bytes;
  }

  std::vector<Entry> out;
  for (const auto& [owner, bytes] : replies) {
    simrt::ByteReader r(bytes);
    const auto n = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n; ++i) {
      Entry e;
      e.key = r.get<Key>();
      e.value = r.get_bytes();
      out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace treepart::odd
