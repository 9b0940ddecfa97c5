#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ledgerlab/metrics/series.hpp"
#include "ledgerlab/primitives/digest.hpp"
#include "ledgerlab/simnet/network.hpp"

namespace ledgerlab::metrics {

enum class Paradigm { blockchain, lattice };

struct MinedBlock {
  Digest id;
  std::uint64_t height = 0;
  simnet::NodeId miner = 0;
  double at = 0.0;
};

struct ForkRecord {
  Digest subject;
  double opened_at = 0.0;
  /// Successor of the subject on every node that keeps blocks at the end.
  std::vector<std::optional<Digest>> node_choices;
  /// Winner of the union of every node's latest votes, if any.
  std::optional<Digest> majority_choice;
  bool deadlocked = false;

  bool converged() const;
};

struct Transfer {
  Digest send;
  double created_at = 0.0;
  std::optional<double> settled_at;
};

/// Everything a run leaves behind for the measurements, read from the
/// observer node unless stated otherwise.
struct RunTrace {
  Paradigm paradigm = Paradigm::blockchain;
  std::uint64_t seed = 0;
  double ended_at = 0.0;
  Digest trace_digest;
  simnet::NetworkStats net;
  /// Name of the first invariant that failed; the run stopped there.
  std::optional<std::string> breach;

  // blockchain
  std::vector<MinedBlock> mined;
  std::unordered_set<Digest> final_chain;
  std::uint64_t final_height = 0;
  std::uint64_t confirm_threshold = 6;
  std::uint64_t chain_transactions = 0;
  double chain_duration_s = 0.0;
  /// Deepest confirmation depth each block reached at the observer, capped
  /// at the tracked maximum.
  std::unordered_map<Digest, std::uint32_t> depth_reached;
  std::uint32_t max_tracked_depth = 8;
  MetricSeries confirmation_latency{"confirmation_latency", "s", {}};
  std::uint64_t slashes = 0;
  std::uint64_t slashed_stake = 0;
  std::uint64_t stake_supply = 0;

  // lattice
  std::vector<Transfer> transfers;
  std::vector<ForkRecord> forks;
  std::uint64_t blocks_applied = 0;

  // both
  MetricSeries ledger_bytes{"ledger_bytes", "bytes", {}};
  std::map<std::string, std::uint64_t> final_bytes;
  std::map<std::string, double> extra;
};

}  // namespace ledgerlab::metrics
