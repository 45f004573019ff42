#include "treepart/simrt/runtime.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

namespace treepart::simrt {
namespace detail {

namespace {

constexpr std::uint64_t kWorldContext = 0x9e3779b97f4a7c15ULL;

// Thrown into ranks that must unwind after another rank failed. Deliberately
// not a std::exception so user code catching std::exception does not swallow it.
struct Aborted {};

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h *= 0xff51afd7ed558ccdULL;
  return h ^ (h >> 33);
}

std::string fmt_rank(int r) { return r == kAnySource ? std::string("any") : std::to_string(r); }

}  // namespace

struct Envelope {
  std::uint64_t context;
  int source;  // communicator-local
  Rank source_world;
  int tag;
  Bytes bytes;
};

enum class Status { ready, blocked, finished };

enum class SyncKind { barrier, fence };
using SyncKey = std::tuple<std::uint64_t, SyncKind, int>;

struct SyncWait {
  SyncKey key;
  int generation;
};

struct RankState {
  Status status = Status::ready;
  std::function<bool()> can_proceed;
  std::string waiting_on;
  std::optional<SyncWait> sync_wait;
  std::string phase;
  std::deque<Envelope> inbox;
};

struct SyncState {
  std::vector<Rank> members;
  std::vector<int> arrivals;
};

struct WindowState {
  std::vector<Rank> members;
  std::vector<int> cells;
  std::vector<int> fences;
  std::vector<char> freed;
};

class Engine {
 public:
  Engine(hwtopo::TopologyTree tree, RuntimeOptions options)
      : tree_(tree), ledger_(std::move(tree)), rng_(options.seed) {}

  const hwtopo::TopologyTree& tree() const { return tree_; }
  TrafficLedger& ledger() { return ledger_; }

  void run(const std::function<void(Communicator&)>& body) {
    const int ranks = tree_.total_ranks();
    ranks_.assign(ranks, RankState{});
    aborted_ = false;
    done_ = false;
    error_ = nullptr;

    std::vector<std::thread> threads;
    threads.reserve(ranks);
    for (int r = 0; r < ranks; ++r) {
      threads.emplace_back([this, r, &body] { thread_main(r, body); });
    }
    {
      std::unique_lock lock(mu_);
      current_ = static_cast<Rank>(rng_() % ranks);
      cv_.notify_all();
      cv_.wait(lock, [this] { return done_; });
    }
    for (auto& t : threads) t.join();
    if (error_) std::rethrow_exception(error_);
  }

  // --- point to point -------------------------------------------------------

  void send(const Communicator& comm, int dest, int tag, Bytes bytes) {
    check_abort();
    check_peer(comm, dest, "send");
    if (tag < 0) throw InputError("send: negative tag " + std::to_string(tag));
    const Rank from = comm.world_rank();
    const Rank to = comm.world_rank_of(dest);
    ledger_.record(ranks_[from].phase, from, to, Channel::message, bytes.size());
    ranks_[to].inbox.push_back({comm.context_, comm.rank(), from, tag, std::move(bytes)});
    yield(from);
  }

  Message recv(const Communicator& comm, int source, int tag) {
    auto it = wait_match(comm, source, tag, "recv");
    auto& inbox = ranks_[comm.world_rank()].inbox;
    Message msg{it->source, it->tag, std::move(it->bytes)};
    inbox.erase(it);
    return msg;
  }

  ProbeStatus probe(const Communicator& comm, int source, int tag) {
    auto it = wait_match(comm, source, tag, "probe");
    return {it->source, it->tag, it->bytes.size()};
  }

  // --- synchronisation ------------------------------------------------------

  void sync(const Communicator& comm, SyncKind kind, int id) {
    check_abort();
    const SyncKey key{comm.context_, kind, id};
    auto& state = syncs_[key];
    if (state.members.empty()) {
      state.members = comm.members();
      state.arrivals.assign(comm.size(), 0);
    }
    const int generation = ++state.arrivals[comm.rank()];
    const Rank me = comm.world_rank();
    ranks_[me].sync_wait = SyncWait{key, generation};
    std::ostringstream what;
    what << (kind == SyncKind::fence ? "fence #" : "barrier #") << generation << " (window/comm "
         << id << ", members " << comm.size() << ")";
    block_until(
        me,
        [&state, generation] {
          return std::all_of(state.arrivals.begin(), state.arrivals.end(),
                             [generation](int a) { return a >= generation; });
        },
        what.str());
  }

  // --- one-sided windows ----------------------------------------------------

  int create_window(const Communicator& comm) {
    check_abort();
    const int id = window_counter_[{comm.context_, comm.world_rank()}]++;
    auto& state = windows_[{comm.context_, id}];
    if (state.members.empty()) {
      const auto n = static_cast<std::size_t>(comm.size());
      state.members = comm.members();
      state.cells.assign(n, 0);
      state.fences.assign(n, 0);
      state.freed.assign(n, 0);
    }
    return id;
  }

  int persistent_window(const Communicator& comm) {
    auto key = std::make_pair(comm.context_, comm.world_rank());
    auto it = persistent_.find(key);
    if (it != persistent_.end()) return it->second;
    const int id = create_window(comm);
    persistent_[key] = id;
    return id;
  }

  WindowState& window(const Communicator& comm, int id) {
    auto it = windows_.find({comm.context_, id});
    if (it == windows_.end()) throw EpochViolation("window " + std::to_string(id) + " was freed");
    return it->second;
  }

  void fence(const Communicator& comm, int id) {
    check_abort();
    auto& state = window(comm, id);
    if (state.freed[comm.rank()]) {
      throw EpochViolation("fence on freed window " + std::to_string(id));
    }
    ++state.fences[comm.rank()];
    sync(comm, SyncKind::fence, id);
  }

  void accumulate(const Communicator& comm, int id, int target, int increment) {
    check_abort();
    check_peer(comm, target, "accumulate");
    auto& state = window(comm, id);
    const int me = comm.rank();
    if (state.fences[me] == 0 || state.freed[me]) {
      throw EpochViolation("accumulate by rank " + std::to_string(comm.world_rank()) +
                           " outside an open epoch on window " + std::to_string(id));
    }
    state.cells[target] += increment;
    const Rank from = comm.world_rank();
    ledger_.record(ranks_[from].phase, from, comm.world_rank_of(target), Channel::accumulate,
                   sizeof(int));
    yield(from);
  }

  int& cell(const Communicator& comm, int id) { return window(comm, id).cells[comm.rank()]; }

  void free_window(const Communicator& comm, int id) {
    check_abort();
    auto& state = window(comm, id);
    state.freed[comm.rank()] = 1;
    if (std::all_of(state.freed.begin(), state.freed.end(), [](char f) { return f != 0; })) {
      windows_.erase({comm.context_, id});
      syncs_.erase({comm.context_, SyncKind::fence, id});
    }
  }

  // --- shared memory --------------------------------------------------------

  void shared_copy(const Communicator& comm, int dest, int tag, Bytes bytes) {
    check_abort();
    check_peer(comm, dest, "shared_copy");
    const Rank from = comm.world_rank();
    const Rank to = comm.world_rank_of(dest);
    if (!tree_.same_node(from, to)) {
      throw InvariantViolation("shared_copy: ranks " + std::to_string(from) + " and " +
                               std::to_string(to) + " are on different nodes");
    }
    ledger_.record(ranks_[from].phase, from, to, Channel::shared_copy, bytes.size());
    shared_[{to, comm.context_, comm.rank(), tag}].push_back(std::move(bytes));
    yield(from);
  }

  Bytes take_shared(const Communicator& comm, int source, int tag) {
    check_abort();
    auto it = shared_.find({comm.world_rank(), comm.context_, source, tag});
    if (it == shared_.end() || it->second.empty()) {
      throw InvariantViolation("take_shared: no buffer from rank " + std::to_string(source) +
                               " with tag " + std::to_string(tag) + " (missing barrier?)");
    }
    Bytes out = std::move(it->second.front());
    it->second.pop_front();
    if (it->second.empty()) shared_.erase(it);
    return out;
  }

  // --- phases ---------------------------------------------------------------

  void set_phase(Rank rank, std::string phase) { ranks_[rank].phase = std::move(phase); }
  const std::string& phase(Rank rank) const { return ranks_[rank].phase; }

 private:
  void check_abort() const {
    if (aborted_) throw Aborted{};
  }

  static void check_peer(const Communicator& comm, int peer, const char* op) {
    if (peer < 0 || peer >= comm.size()) {
      throw InputError(std::string(op) + ": rank " + std::to_string(peer) +
                       " outside communicator of size " + std::to_string(comm.size()));
    }
  }

  using InboxIt = std::deque<Envelope>::iterator;

  std::optional<InboxIt> find_match(const Communicator& comm, int source, int tag, bool choose) {
    auto& inbox = ranks_[comm.world_rank()].inbox;
    std::vector<InboxIt> heads;  // first matching envelope per source
    for (auto it = inbox.begin(); it != inbox.end(); ++it) {
      if (it->context != comm.context_) continue;
      if (tag != kAnyTag && it->tag != tag) continue;
      if (source != kAnySource && it->source != source) continue;
      if (source != kAnySource) return it;
      if (std::none_of(heads.begin(), heads.end(),
                       [&](const InboxIt& h) { return h->source == it->source; })) {
        heads.push_back(it);
      }
    }
    if (heads.empty()) return std::nullopt;
    if (!choose) return heads.front();
    return heads[rng_() % heads.size()];
  }

  InboxIt wait_match(const Communicator& comm, int source, int tag, const char* op) {
    check_abort();
    if (source != kAnySource) check_peer(comm, source, op);
    std::ostringstream what;
    what << op << "(source=" << fmt_rank(source == kAnySource ? kAnySource
                                                             : comm.world_rank_of(source))
         << ", tag=" << (tag == kAnyTag ? std::string("any") : std::to_string(tag)) << ")";
    block_until(
        comm.world_rank(),
        [this, &comm, source, tag] { return find_match(comm, source, tag, false).has_value(); },
        what.str());
    return *find_match(comm, source, tag, true);
  }

  void block_until(Rank me, std::function<bool()> ready, std::string what) {
    check_abort();
    if (ready()) {
      ranks_[me].sync_wait.reset();
      return;
    }
    auto& state = ranks_[me];
    state.status = Status::blocked;
    state.can_proceed = std::move(ready);
    state.waiting_on = std::move(what);
    switch_from(me);
    state.status = Status::ready;
    state.can_proceed = nullptr;
    state.waiting_on.clear();
    state.sync_wait.reset();
    check_abort();
  }

  std::optional<Rank> pick_next() {
    std::vector<Rank> candidates;
    for (Rank r = 0; r < static_cast<Rank>(ranks_.size()); ++r) {
      const auto& s = ranks_[r];
      if (s.status == Status::finished) continue;
      if (aborted_ || s.status == Status::ready || s.can_proceed()) candidates.push_back(r);
    }
    if (candidates.empty()) return std::nullopt;
    return candidates[rng_() % candidates.size()];
  }

  // Called with every unfinished rank blocked.
  void on_stuck() {
    std::ostringstream report;
    std::vector<Rank> blocked;
    std::optional<std::string> epoch_problem;
    for (Rank r = 0; r < static_cast<Rank>(ranks_.size()); ++r) {
      const auto& s = ranks_[r];
      if (s.status != Status::blocked) continue;
      blocked.push_back(r);
      report << "rank " << r << " blocked in " << s.waiting_on << "; ";
      if (!s.sync_wait) continue;
      const auto& sync = syncs_.at(s.sync_wait->key);
      for (std::size_t j = 0; j < sync.members.size(); ++j) {
        if (sync.arrivals[j] >= s.sync_wait->generation) continue;
        const Rank absent = sync.members[j];
        report << "waiting for rank " << absent << " (at #" << sync.arrivals[j] << "); ";
        if (ranks_[absent].status == Status::finished &&
            std::get<1>(s.sync_wait->key) == SyncKind::fence && !epoch_problem) {
          epoch_problem = "rank " + std::to_string(absent) + " finished after " +
                          std::to_string(sync.arrivals[j]) + " fences while rank " +
                          std::to_string(r) + " waits at fence #" +
                          std::to_string(s.sync_wait->generation);
        }
      }
    }
    for (Rank r = 0; r < static_cast<Rank>(ranks_.size()); ++r) {
      if (ranks_[r].status == Status::finished) report << "rank " << r << " finished; ";
    }
    if (!error_) {
      if (epoch_problem) {
        error_ = std::make_exception_ptr(
            EpochViolation("mismatched fences: " + *epoch_problem + " [" + report.str() + "]"));
      } else {
        error_ = std::make_exception_ptr(DeadlockError(report.str(), blocked));
      }
    }
    aborted_ = true;
  }

  void hand_to(Rank next, Rank me) {
    std::unique_lock lock(mu_);
    current_ = next;
    cv_.notify_all();
    if (me >= 0) cv_.wait(lock, [this, me] { return current_ == me; });
  }

  void switch_from(Rank me) {
    auto next = pick_next();
    if (!next) {
      on_stuck();
      next = pick_next();
    }
    if (*next != me) hand_to(*next, me);
  }

  void yield(Rank me) {
    check_abort();
    auto next = pick_next();
    if (next && *next != me) hand_to(*next, me);
    check_abort();
  }

  void finish(Rank me) {
    ranks_[me].status = Status::finished;
    auto next = pick_next();
    if (!next && std::any_of(ranks_.begin(), ranks_.end(),
                             [](const RankState& s) { return s.status != Status::finished; })) {
      on_stuck();
      next = pick_next();
    }
    std::unique_lock lock(mu_);
    if (next) {
      current_ = *next;
    } else {
      current_ = -1;
      done_ = true;
    }
    cv_.notify_all();
  }

  void thread_main(Rank me, const std::function<void(Communicator&)>& body) {
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this, me] { return current_ == me; });
    }
    try {
      check_abort();
      std::vector<Rank> all(ranks_.size());
      std::iota(all.begin(), all.end(), 0);
      Communicator world(this, kWorldContext, std::move(all), me);
      body(world);
    } catch (const Aborted&) {
    } catch (...) {
      if (!error_) error_ = std::current_exception();
      aborted_ = true;
    }
    finish(me);
  }

  hwtopo::TopologyTree tree_;
  TrafficLedger ledger_;
  std::mt19937_64 rng_;

  std::mutex mu_;
  std::condition_variable cv_;
  Rank current_ = -1;
  bool done_ = false;
  bool aborted_ = false;
  std::exception_ptr error_;

  std::vector<RankState> ranks_;
  std::map<SyncKey, SyncState> syncs_;
  std::map<std::pair<std::uint64_t, int>, WindowState> windows_;
  std::map<std::pair<std::uint64_t, Rank>, int> window_counter_;
  std::map<std::pair<std::uint64_t, Rank>, int> persistent_;
  std::map<std::tuple<Rank, std::uint64_t, int, int>, std::deque<Bytes>> shared_;

  friend class treepart::simrt::Communicator;
};

}  // namespace detail

// --- Communicator -------------------------------------------------------------

const hwtopo::TopologyTree& Communicator::topology() const { return engine_->tree(); }

void Communicator::send(int dest, int tag, Bytes bytes) {
  engine_->send(*this, dest, tag, std::move(bytes));
}

Message Communicator::recv(int source, int tag) { return engine_->recv(*this, source, tag); }

ProbeStatus Communicator::probe(int source, int tag) { return engine_->probe(*this, source, tag); }

void Communicator::barrier() { engine_->sync(*this, detail::SyncKind::barrier, 0); }

Window Communicator::create_window() { return Window(*this, engine_->create_window(*this)); }

int Communicator::blind_count(std::span<const int> targets) {
  Window window(*this, engine_->persistent_window(*this));
  window.reset_local(0);
  window.fence();
  for (int target : targets) window.accumulate(target, 1);
  window.fence();
  return window.local_value();
}

int Communicator::blind_count_transient(std::span<const int> targets) {
  Window window = create_window();
  window.fence();
  for (int target : targets) window.accumulate(target, 1);
  window.fence();
  const int count = window.local_value();
  window.free();
  return count;
}

Communicator Communicator::subset(std::vector<Rank> world_members, std::uint64_t purpose) const {
  auto self = std::find(world_members.begin(), world_members.end(), world_rank());
  if (self == world_members.end()) {
    throw InvariantViolation("subset: calling rank " + std::to_string(world_rank()) +
                             " is not a member");
  }
  std::vector<Rank> sorted = world_members;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvariantViolation("subset: duplicate member");
  }
  std::uint64_t context = detail::mix(context_, purpose);
  for (Rank r : world_members) context = detail::mix(context, static_cast<std::uint64_t>(r));
  const int local = static_cast<int>(self - world_members.begin());
  return Communicator(engine_, context, std::move(world_members), local);
}

void Communicator::shared_copy(int dest, int tag, Bytes bytes) {
  engine_->shared_copy(*this, dest, tag, std::move(bytes));
}

Bytes Communicator::take_shared(int source, int tag) {
  return engine_->take_shared(*this, source, tag);
}

void Communicator::set_phase(std::string phase) { engine_->set_phase(world_rank(), std::move(phase)); }

const std::string& Communicator::phase() const { return engine_->phase(world_rank()); }

// --- Window ---------------------------------------------------------------------

void Window::fence() { comm_.engine_->fence(comm_, id_); }

void Window::accumulate(int target, int increment) {
  comm_.engine_->accumulate(comm_, id_, target, increment);
}

int Window::local_value() const { return comm_.engine_->cell(comm_, id_); }

void Window::reset_local(int value) { comm_.engine_->cell(comm_, id_) = value; }

void Window::free() { comm_.engine_->free_window(comm_, id_); }

// --- Runtime --------------------------------------------------------------------

Runtime::Runtime(hwtopo::TopologyTree tree, RuntimeOptions options)
    : engine_(std::make_unique<detail::Engine>(std::move(tree), options)) {}

Runtime::~Runtime() = default;

void Runtime::run(const std::function<void(Communicator&)>& body) { engine_->run(body); }

const TrafficLedger& Runtime::ledger() const { return engine_->ledger(); }
TrafficLedger& Runtime::ledger() { return engine_->ledger(); }
const hwtopo::TopologyTree& Runtime::topology() const { return engine_->tree(); }

}  // namespace treepart::simrt
