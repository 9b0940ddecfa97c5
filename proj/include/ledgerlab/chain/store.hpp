#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ledgerlab/chain/block.hpp"
#include "ledgerlab/chain/state.hpp"
#include "ledgerlab/election/difficulty.hpp"

namespace ledgerlab::chain {

enum class ProofMode : std::uint8_t { grind, lottery, stake };

/// Minimum keep-recent window accepted by prune().
inline constexpr std::uint64_t kReorgSafetyWindow = 128;

struct ChainParams {
  ProofMode mode = ProofMode::lottery;
  election::DifficultySchedule difficulty;
  Tokens block_reward = 50;
  std::uint64_t capacity_units = 1'000'000;
  std::uint64_t confirm_threshold = 6;
  std::uint64_t fastsync_pivot_offset = 1024;
  std::uint64_t genesis_timestamp_ms = 0;
  std::vector<std::pair<AccountId, Tokens>> genesis_allocation;
  /// Stake mode only: is this header's producer the elected validator for
  /// its slot? Unset means any sealed producer is accepted.
  std::function<bool(const BlockHeader&)> leader_check;
};

struct StoredBlock {
  BlockHeader header;
  Digest id;
  /// Null once pruned, or for headers fetched without bodies.
  std::shared_ptr<const Block> body;
  /// Difficulty a child of this block must meet.
  election::DifficultySchedule next_schedule;
  std::uint64_t arrival = 0;
};

/// A node's view of the block tree. Mutated through adopt(), prune() and
/// fast_sync(); everything else is read-only.
class ChainStore {
 public:
  ChainStore(ChainParams params, Keyring keys);

  const ChainParams& params() const { return params_; }
  const Keyring& keys() const { return keys_; }

  const Digest& genesis_id() const { return genesis_id_; }
  const Block& genesis_block() const { return *genesis_; }
  const Digest& head() const { return main_chain_.back(); }
  std::uint64_t head_height() const { return main_chain_.size() - 1; }
  const StoredBlock& head_block() const { return *find(head()); }

  const StoredBlock* find(const Digest& id) const;
  bool contains(const Digest& id) const { return blocks_.contains(id); }
  std::size_t block_count() const { return blocks_.size(); }
  const std::unordered_map<Digest, StoredBlock>& blocks() const { return blocks_; }

  /// Adopted-chain block at `height`, or nullptr above the head.
  const Digest* main_chain_at(std::uint64_t height) const;
  bool on_adopted_chain(const Digest& id) const;

  const std::set<Digest>& tips() const { return tips_; }
  const LedgerState& head_state() const { return head_state_; }
  Tokens balance(AccountId id) const { return head_state_.balance(id); }

  /// State after block `id`, reconstructed through stored deltas. Returns
  /// nullopt when the path crosses pruned deltas.
  std::optional<LedgerState> state_at(const Digest& id) const;

  const std::unordered_map<Digest, StateDelta>& deltas() const { return deltas_; }
  std::uint64_t first_full_block_height() const { return first_full_height_; }

  bool seal_valid(const Block& block) const;
  election::DifficultySchedule schedule_for_child(const Digest& parent) const;

  /// Test hook: credits an account in the head state outside the rules.
  void inject_fault_credit(AccountId id, Tokens amount);

  /// Every block containing the transaction (it may sit on several branches).
  const std::vector<Digest>* blocks_with_tx(const Digest& tx) const;

 private:
  friend struct StoreAccess;

  ChainParams params_;
  Keyring keys_;
  std::shared_ptr<const Block> genesis_;
  Digest genesis_id_;

  std::unordered_map<Digest, StoredBlock> blocks_;
  std::unordered_map<Digest, StateDelta> deltas_;
  // Built on first lookup: most stores are never asked.
  mutable std::unordered_map<Digest, std::vector<Digest>> tx_index_;
  mutable std::vector<Digest> unindexed_;
  std::set<Digest> tips_;
  std::vector<Digest> main_chain_;
  LedgerState head_state_;
  std::uint64_t first_full_height_ = 0;
  std::uint64_t arrivals_ = 0;
};

}  // namespace ledgerlab::chain
