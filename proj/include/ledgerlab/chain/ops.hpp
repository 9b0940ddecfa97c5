#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ledgerlab/chain/store.hpp"

namespace ledgerlab::chain {

/// Packs transactions greedily in mempool order. A transaction that does not
/// fit the remaining capacity, or does not apply to the running state, is
/// skipped and the scan continues. The result is unsolved (nonce 0) and
/// unsealed. Throws Error(orphan_parent) if `parent` is unknown or its state
/// is no longer reconstructible.
Block assemble_block(const ChainStore& store, std::span<const Transaction> mempool, const Digest& parent,
                     std::uint64_t capacity, AccountId producer, std::uint64_t timestamp_ms);

enum class BlockRule : std::uint8_t {
  ok,
  bad_proof,
  unknown_parent,
  bad_root,
  double_spend,
  bad_signature,
  bad_sequence,
  over_capacity,
};

std::string_view to_string(BlockRule rule);

struct Verdict {
  BlockRule rule = BlockRule::ok;
  std::string detail;

  bool accepted() const { return rule == BlockRule::ok; }
};

Verdict validate_block(const ChainStore& store, const Block& block);

struct AdoptionReport {
  Digest head_before;
  Digest head_after;
  bool duplicate = false;
  /// Blocks that left the adopted chain, newest first.
  std::vector<Digest> orphaned;
  /// Transactions only present on the abandoned branch; they go back to the mempool.
  std::vector<Transaction> reorged_out;

  bool head_changed() const { return head_before != head_after; }
};

/// Stores a block that passes validation and moves the head if its branch is
/// strictly taller. Equal heights keep the first-seen head. Throws
/// Error(validation) for a block validate_block() rejects.
AdoptionReport adopt(ChainStore& store, std::shared_ptr<const Block> block);
AdoptionReport adopt(ChainStore& store, const Block& block);

/// 1 + (head height - containing height) when the transaction is on the
/// adopted branch; nullopt when it only appears on other branches. Throws
/// Error(not_found) for unknown transactions.
std::optional<std::uint64_t> confirmations(const ChainStore& store, const Digest& tx);
bool is_confirmed(const ChainStore& store, const Digest& tx);

struct LedgerBytes {
  std::uint64_t headers = 0;
  std::uint64_t bodies = 0;
  std::uint64_t deltas = 0;
  std::uint64_t state = 0;

  std::uint64_t total() const { return headers + bodies + deltas + state; }
};

LedgerBytes ledger_bytes(const ChainStore& store);

struct PruneReport {
  LedgerBytes before;
  LedgerBytes after;
  std::uint64_t cutoff_height = 0;
  std::uint64_t bodies_dropped = 0;
  std::uint64_t deltas_dropped = 0;
};

/// Drops bodies and deltas of every block below head height - keep_recent.
/// Throws Error(config) when keep_recent < kReorgSafetyWindow.
PruneReport prune(ChainStore& store, std::uint64_t keep_recent);

struct FastSyncResult {
  bool full_replay = false;
  std::uint64_t pivot_height = 0;
  std::uint64_t blocks_replayed = 0;
};

/// Builds a fresh node from `source`: every header, the full state at
/// pivot = head - fastsync_pivot_offset, then full validation of every
/// block above the pivot. Sources no taller than the offset are replayed
/// from genesis.
ChainStore fast_sync(const ChainStore& source, FastSyncResult* result = nullptr);

/// Replays the adopted chain of `source` from genesis into a fresh store.
ChainStore full_replay(const ChainStore& source);

}  // namespace ledgerlab::chain
