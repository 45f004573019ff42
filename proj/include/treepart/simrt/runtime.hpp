#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "treepart/error.hpp"
#include "treepart/hwtopo/topology.hpp"
#include "treepart/simrt/bytes.hpp"
#include "treepart/simrt/ledger.hpp"

namespace treepart::simrt {

inline constexpr int kAnySource = -1;
inline constexpr int kAnyTag = -1;

/// Tags at or above this value are reserved for library protocols.
inline constexpr int kReservedTagBase = 1 << 24;

struct Message {
  int source = 0;  // rank within the receiving communicator
  int tag = 0;
  Bytes bytes;
};

struct ProbeStatus {
  int source = 0;
  int tag = 0;
  std::size_t size = 0;

  bool operator==(const ProbeStatus&) const = default;
};

/// Every unfinished rank is blocked; `report` lists what each one waits for.
class DeadlockError : public InvariantViolation {
 public:
  DeadlockError(const std::string& report, std::vector<Rank> blocked)
      : InvariantViolation("deadlock: " + report), blocked_(std::move(blocked)) {}
  const std::vector<Rank>& blocked_ranks() const { return blocked_; }

 private:
  std::vector<Rank> blocked_;
};

/// A one-sided operation outside an open epoch, or fences that do not match across ranks.
class EpochViolation : public InvariantViolation {
 public:
  using InvariantViolation::InvariantViolation;
};

struct RuntimeOptions {
  /// Seeds the scheduler's choice of the next runnable rank and of any-source matches.
  std::uint64_t seed = 0;
};

namespace detail {
class Engine;
}

class Window;

/**
 * A rank's handle on a group of simulated ranks. Point-to-point ranks are
 * local to the communicator; traffic is isolated from other communicators.
 */
class Communicator {
 public:
  int rank() const { return rank_; }
  int size() const { return static_cast<int>(members_.size()); }
  Rank world_rank() const { return members_[rank_]; }
  Rank world_rank_of(int local) const { return members_.at(local); }
  const std::vector<Rank>& members() const { return members_; }
  const hwtopo::TopologyTree& topology() const;

  void send(int dest, int tag, Bytes bytes);
  Message recv(int source = kAnySource, int tag = kAnyTag);
  /// Reports a pending message without consuming it; a following recv(source, tag)
  /// returns exactly that message.
  ProbeStatus probe(int source = kAnySource, int tag = kAnyTag);
  void barrier();

  /// Collective. The window holds one integer cell per rank, initially zero.
  Window create_window();

  /**
   * Collective: returns how many ranks listed this rank in their `targets`.
   * Uses a persistent accumulate window opened and closed by a fence pair.
   */
  int blind_count(std::span<const int> targets);
  /// Same contract with a window created and freed per call.
  int blind_count_transient(std::span<const int> targets);

  /// Must be called by exactly the ranks in `world_members` (which must include this rank).
  Communicator subset(std::vector<Rank> world_members, std::uint64_t purpose) const;

  /// Copies into `dest`'s preallocated receive buffer. Intranode only; no network bytes.
  void shared_copy(int dest, int tag, Bytes bytes);
  /// Pops a buffer written by `source`; the writer must have passed a barrier shared with us.
  Bytes take_shared(int source, int tag);

  void set_phase(std::string phase);
  const std::string& phase() const;

 private:
  friend class detail::Engine;
  friend class Window;

  Communicator(detail::Engine* engine, std::uint64_t context, std::vector<Rank> members, int rank)
      : engine_(engine), context_(context), members_(std::move(members)), rank_(rank) {}

  detail::Engine* engine_;
  std::uint64_t context_;
  std::vector<Rank> members_;
  int rank_;
};

/// One integer cell per rank with MPI_SUM accumulate between fences.
class Window {
 public:
  /// Collective barrier over the window's communicator; closes one epoch and opens the next.
  void fence();
  void accumulate(int target, int increment);
  int local_value() const;
  void reset_local(int value = 0);
  /// Ends the epoch sequence for this rank; later accumulates are epoch violations.
  void free();

 private:
  friend class Communicator;
  Window(Communicator comm, int id) : comm_(std::move(comm)), id_(id) {}

  Communicator comm_;
  int id_;
};

/// RAII phase label for traffic attribution.
class PhaseScope {
 public:
  PhaseScope(Communicator& comm, std::string phase) : comm_(comm), previous_(comm.phase()) {
    comm_.set_phase(std::move(phase));
  }
  ~PhaseScope() { comm_.set_phase(previous_); }
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  Communicator& comm_;
  std::string previous_;
};

/**
 * Runs one activity per leaf of the topology. Exactly one activity executes at
 * a time; control passes at blocking calls and at every send/accumulate, with
 * the next rank chosen by a seeded generator. When all unfinished ranks are
 * blocked the run aborts with DeadlockError (or EpochViolation when the stuck
 * ranks wait on a fence that a finished rank never reached).
 */
class Runtime {
 public:
  explicit Runtime(hwtopo::TopologyTree tree, RuntimeOptions options = {});
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  /// Runs `body` on every rank and rethrows the first failure.
  void run(const std::function<void(Communicator&)>& body);

  const TrafficLedger& ledger() const;
  TrafficLedger& ledger();
  const hwtopo::TopologyTree& topology() const;
  int size() const { return topology().total_ranks(); }

 private:
  std::unique_ptr<detail::Engine> engine_;
};

}  // namespace treepart::simrt
