#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "ledgerlab/primitives/digest.hpp"
#include "ledgerlab/primitives/encoding.hpp"
#include "ledgerlab/primitives/rng.hpp"
#include "ledgerlab/simnet/scheduler.hpp"

namespace ledgerlab::simnet {

/// Messages sent in [start, end) between the two sides are dropped.
struct Partition {
  double start = 0.0;
  double end = 0.0;
  std::set<NodeId> side_a;
  std::set<NodeId> side_b;

  bool separates(NodeId from, NodeId to, double t) const;
};

struct LinkModel {
  double base_latency_s = 0.0;
  /// Half-width of the uniform jitter added to the base latency.
  double jitter_s = 0.0;
  double drop_probability = 0.0;
  std::vector<Partition> partitions;

  double sample_latency(Rng& rng) const;
  bool partitioned(NodeId from, NodeId to, double t) const;
};

/// peers[i] lists the nodes i sends to. Empty means full mesh.
struct Topology {
  std::vector<std::vector<NodeId>> peers;

  static Topology full_mesh(std::size_t nodes);
};

struct TraceRecord {
  double at = 0.0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::command;
  NodeId destination = 0;
  NodeId source = 0;
  Digest payload;
};

struct NetworkStats {
  std::uint64_t sent = 0;
  std::uint64_t dropped = 0;
  std::uint64_t partition_drops = 0;
  std::uint64_t events = 0;
};

/// Event loop plus link model. Payload must provide `Digest digest() const`;
/// the trace digest hashes every executed event, so it is a pure function of
/// the scenario and seed.
template <typename Payload>
class Network {
 public:
  using Event = SimEvent<Payload>;
  using Handler = std::function<void(const Event&)>;

  Network(std::size_t nodes, LinkModel link, Topology topology, std::uint64_t seed)
      : link_(std::move(link)),
        topology_(topology.peers.empty() ? Topology::full_mesh(nodes) : std::move(topology)) {
    link_rngs_.reserve(nodes);
    for (std::size_t i = 0; i < nodes; ++i) link_rngs_.emplace_back(derive_seed(seed, {0x6c696e6b, i}));
  }

  std::size_t nodes() const { return link_rngs_.size(); }
  double now() const { return scheduler_.now(); }
  const LinkModel& link() const { return link_; }
  const Topology& topology() const { return topology_; }
  const NetworkStats& stats() const { return stats_; }
  Scheduler<Payload>& scheduler() { return scheduler_; }

  /// Delivery with an independently sampled latency, unless dropped.
  /// Returns true when a delivery was scheduled.
  bool send(NodeId from, NodeId to, const Payload& payload) {
    ++stats_.sent;
    const double t = now();
    if (link_.partitioned(from, to, t)) {
      ++stats_.dropped;
      ++stats_.partition_drops;
      return false;
    }
    Rng& rng = link_rngs_.at(from);
    if (link_.drop_probability > 0.0 && rng.bernoulli(link_.drop_probability)) {
      ++stats_.dropped;
      return false;
    }
    scheduler_.schedule(t + link_.sample_latency(rng), EventKind::delivery, to, payload, from);
    return true;
  }

  /// One send per peer of `from`. Returns the number of deliveries scheduled.
  std::size_t broadcast(NodeId from, const Payload& payload) {
    if (from >= nodes()) throw Error(ErrorCode::config, "broadcast from unknown node " + std::to_string(from));
    std::size_t delivered = 0;
    for (NodeId peer : topology_.peers[from])
      if (send(from, peer, payload)) ++delivered;
    return delivered;
  }

  void timer(NodeId node, double at, Payload payload) {
    scheduler_.schedule(at, EventKind::timer, node, std::move(payload), node);
  }
  void command(NodeId node, double at, Payload payload) {
    scheduler_.schedule(at, EventKind::command, node, std::move(payload), node);
  }

  void keep_records(bool keep) { keep_records_ = keep; }
  const std::vector<TraceRecord>& records() const { return records_; }

  /// Executes events with at <= horizon in (at, sequence) order.
  void run(double horizon, const Handler& handler) {
    while (!scheduler_.empty() && scheduler_.next_time() <= horizon) {
      if (stop_ && stop_()) break;
      const Event e = scheduler_.pop();
      record(e);
      handler(e);
    }
  }

  /// Checked before each event; returning true ends run() early.
  void stop_when(std::function<bool()> predicate) { stop_ = std::move(predicate); }

  /// Chained digest over every event executed so far.
  const Digest& trace_digest() const { return running_; }

 private:
  void record(const Event& e) {
    ++stats_.events;
    TraceRecord r{e.at, e.sequence, e.kind, e.destination, e.source, e.payload.digest()};
    Writer w;
    w.digest(running_);
    w.f64(r.at);
    w.u64(r.sequence);
    w.u8(static_cast<std::uint8_t>(r.kind));
    w.u64(r.destination);
    w.u64(r.source);
    w.digest(r.payload);
    running_ = ledgerlab::digest(w.bytes());
    if (keep_records_) records_.push_back(r);
  }

  LinkModel link_;
  Topology topology_;
  Scheduler<Payload> scheduler_;
  std::vector<Rng> link_rngs_;
  NetworkStats stats_;
  Digest running_;
  bool keep_records_ = false;
  std::vector<TraceRecord> records_;
  std::function<bool()> stop_;
};

}  // namespace ledgerlab::simnet
