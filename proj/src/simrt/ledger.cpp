#include "treepart/simrt/ledger.hpp"

#include <set>

namespace treepart::simrt {

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::message: return "message";
    case Channel::accumulate: return "accumulate";
    case Channel::shared_copy: return "shared_copy";
  }
  return "?";
}

std::string_view to_string(Locality locality) {
  return locality == Locality::intranode ? "intranode" : "internode";
}

void TrafficLedger::record(std::string_view phase, Rank from, Rank to, Channel channel,
                           std::uint64_t bytes) {
  auto& counter = counters_[Key{std::string(phase), from, to, channel}];
  counter.count += 1;
  counter.bytes += bytes;
}

TrafficCounter TrafficLedger::total(const TrafficFilter& filter) const {
  TrafficCounter sum;
  for (const auto& [key, counter] : counters_) {
    const auto& [phase, from, to, channel] = key;
    if (filter.phase_prefix && phase.rfind(*filter.phase_prefix, 0) != 0) continue;
    if (filter.from && *filter.from != from) continue;
    if (filter.to && *filter.to != to) continue;
    if (filter.channel && *filter.channel != channel) continue;
    if (filter.locality && *filter.locality != locality(from, to)) continue;
    sum += counter;
  }
  return sum;
}

TrafficCounter TrafficLedger::network(TrafficFilter filter) const {
  filter.channel = Channel::message;
  TrafficCounter sum = total(filter);
  filter.channel = Channel::accumulate;
  sum += total(filter);
  return sum;
}

std::vector<TrafficRecord> TrafficLedger::records() const {
  std::vector<TrafficRecord> out;
  out.reserve(counters_.size());
  for (const auto& [key, counter] : counters_) {
    const auto& [phase, from, to, channel] = key;
    out.push_back({phase, from, to, channel, locality(from, to), counter});
  }
  return out;
}

std::vector<std::string> TrafficLedger::phases() const {
  std::set<std::string> names;
  for (const auto& [key, counter] : counters_) names.insert(std::get<0>(key));
  return {names.begin(), names.end()};
}

}  // namespace treepart::simrt
