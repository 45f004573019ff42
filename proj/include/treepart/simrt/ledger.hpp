#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "treepart/hwtopo/topology.hpp"

namespace treepart::simrt {

using hwtopo::Rank;

enum class Channel { message, accumulate, shared_copy };
enum class Locality { intranode, internode };

std::string_view to_string(Channel channel);
std::string_view to_string(Locality locality);

struct TrafficCounter {
  std::uint64_t count = 0;
  std::uint64_t bytes = 0;

  TrafficCounter& operator+=(const TrafficCounter& other) {
    count += other.count;
    bytes += other.bytes;
    return *this;
  }
  bool operator==(const TrafficCounter&) const = default;
};

struct TrafficRecord {
  std::string phase;
  Rank from = 0;
  Rank to = 0;
  Channel channel = Channel::message;
  Locality locality = Locality::intranode;
  TrafficCounter counter;
};

/// Every field left empty matches everything. `phase_prefix` matches phases starting with it.
struct TrafficFilter {
  std::optional<std::string> phase_prefix;
  std::optional<Rank> from;
  std::optional<Rank> to;
  std::optional<Channel> channel;
  std::optional<Locality> locality;
};

/**
 * Counts messages, one-sided accumulates and shared-memory copies per
 * (phase, source, destination, channel). Locality is a pure function of the
 * topology: intranode iff both ranks sit under the same level-0 subtree.
 *
 * Shared-memory copies never touch the network; `network()` excludes them.
 */
class TrafficLedger {
 public:
  explicit TrafficLedger(hwtopo::TopologyTree tree) : tree_(std::move(tree)) {}

  void record(std::string_view phase, Rank from, Rank to, Channel channel, std::uint64_t bytes);

  Locality locality(Rank a, Rank b) const {
    return tree_.same_node(a, b) ? Locality::intranode : Locality::internode;
  }

  TrafficCounter total(const TrafficFilter& filter = {}) const;
  /// Message + accumulate traffic matching the filter (its channel field is ignored).
  TrafficCounter network(TrafficFilter filter = {}) const;

  std::vector<TrafficRecord> records() const;
  std::vector<std::string> phases() const;
  void clear() { counters_.clear(); }

 private:
  using Key = std::tuple<std::string, Rank, Rank, Channel>;

  hwtopo::TopologyTree tree_;
  std::map<Key, TrafficCounter> counters_;
};

}  // namespace treepart::simrt
