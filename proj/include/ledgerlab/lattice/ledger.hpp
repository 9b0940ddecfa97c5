#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ledgerlab/lattice/block.hpp"

namespace ledgerlab::lattice {

enum class NodeTier : std::uint8_t { historical, current, light };
std::string_view to_string(NodeTier tier);
NodeTier parse_tier(std::string_view text);

struct LatticeParams {
  int spam_difficulty_bits = 0;
  double quorum_fraction = 0.5;
  /// Negative or infinite disables cementing.
  double cement_delay_s = -1.0;
  std::size_t gap_buffer = 10'000;

  bool cementing_enabled() const;
};

struct GenesisAccount {
  AccountId account{};
  Tokens amount = 0;
  AccountId representative{};
};

struct AccountChain {
  AccountId account{};
  Digest head;
  Tokens balance = 0;
  AccountId representative{};
  std::uint64_t block_count = 0;
  /// Block ids oldest first; only the head survives pruning.
  std::vector<Digest> blocks;
};

struct PendingSend {
  Digest send;
  AccountId source_account{};
  AccountId recipient{};
  Tokens amount = 0;

  bool operator==(const PendingSend&) const = default;
};

enum class LatticeRule : std::uint8_t {
  ok,
  bad_signature,
  bad_pow,
  fork_detected,
  gap_detected,
  insufficient_balance,
  invalid_amount,
  not_found,
  duplicate_receive,
  duplicate,
  cemented_conflict,
  bad_genesis,
};

std::string_view to_string(LatticeRule rule);

struct LatticeVerdict {
  LatticeRule rule = LatticeRule::ok;
  /// The block or send digest the verdict depends on: the occupied
  /// predecessor for forks, the missing dependency for gaps.
  Digest dependency;

  bool accepted() const { return rule == LatticeRule::ok; }
};

struct LatticeBytes {
  std::uint64_t lattice_blocks = 0;
  std::uint64_t pending = 0;
  std::uint64_t state = 0;

  std::uint64_t total() const { return lattice_blocks + pending + state; }
};

/// One node's copy of the block-lattice.
class Ledger {
 public:
  Ledger(LatticeParams params, Keyring keys, std::vector<GenesisAccount> genesis,
         NodeTier tier = NodeTier::historical);

  const LatticeParams& params() const { return params_; }
  const Keyring& keys() const { return keys_; }
  NodeTier tier() const { return tier_; }
  Tokens supply() const { return supply_; }

  LatticeVerdict validate(const LatticeBlock& block) const;
  /// Applies a block that validate() accepted. Throws Error(validation) otherwise.
  void apply(const LatticeBlock& block, double now);

  /// Removes `id` and every later block of its account, undoing dependent
  /// receives on other accounts first. Returns the removed blocks, in the
  /// order they were undone. Historical tier only; cemented blocks cannot
  /// be rolled back.
  std::vector<LatticeBlock> rollback(const Digest& id);

  const AccountChain* account(AccountId id) const;
  const std::map<AccountId, AccountChain>& accounts() const { return accounts_; }
  Tokens balance(AccountId id) const;
  const LatticeBlock* block(const Digest& id) const;
  bool knows(const Digest& id) const { return blocks_.contains(id); }
  /// Block currently following `predecessor` on its account chain.
  std::optional<Digest> successor(const Digest& predecessor) const;

  const std::map<Digest, PendingSend>& pending() const { return pending_; }
  std::optional<PendingSend> pending_for(const Digest& send) const;
  bool settled(const Digest& send) const { return settled_.contains(send); }
  /// Matching receive for a settled send.
  std::optional<Digest> receive_of(const Digest& send) const;

  /// Incrementally maintained delegated weight.
  Tokens representative_weight(AccountId representative) const;
  const std::map<AccountId, Tokens>& weights() const { return weights_; }
  /// Sum of all delegated weight (the settled balances).
  Tokens total_weight() const;

  Tokens settled_total() const;
  Tokens pending_total() const;
  bool conserved() const { return settled_total() + pending_total() == supply_; }

  void mark_disputed(const Digest& subject, AccountId account);
  void clear_dispute(const Digest& subject, double now);
  bool disputed(const Digest& subject) const { return disputes_.contains(subject); }
  bool account_disputed(AccountId id) const;

  bool cemented(const Digest& id) const;
  /// Marks the block irreversible when it is settled (sends need their
  /// receive) and has been free of disputes for the cement delay.
  bool cement(const Digest& id, double now);
  double accepted_at(const Digest& id) const;

  LatticeBytes bytes() const;

  /// Drops history down to account heads; accounts with an open dispute are
  /// skipped. Used by prune_lattice().
  std::vector<AccountId> drop_history();

  /// Test hook that credits an account outside the ledger rules.
  void inject_fault_credit(AccountId id, Tokens amount);

 private:
  struct Meta {
    Tokens balance_after = 0;
    AccountId representative_after{};
    double accepted_at = 0.0;
    double quiet_since = 0.0;
    bool cemented = false;
  };
  struct Settlement {
    Digest receive;
    PendingSend send;
  };

  void adjust_weight(AccountId rep, Tokens add, Tokens sub);
  void store_block(const LatticeBlock& block, const Meta& meta);
  LatticeBlock undo_head(AccountId account);

  LatticeParams params_;
  Keyring keys_;
  NodeTier tier_;
  Tokens supply_ = 0;

  std::map<AccountId, AccountChain> accounts_;
  std::unordered_map<Digest, LatticeBlock> blocks_;
  std::unordered_map<Digest, Meta> meta_;
  std::unordered_map<Digest, Digest> successors_;
  std::map<Digest, PendingSend> pending_;
  std::unordered_map<Digest, Settlement> settled_;
  std::map<AccountId, Tokens> weights_;
  std::map<Digest, AccountId> disputes_;
};

/// Builds a signed send on the account's current head. Throws
/// Error(invalid_amount) for zero, Error(insufficient_balance) beyond the
/// balance, Error(stale_predecessor) when `expected_head` is not the head.
LatticeBlock create_send(const Ledger& ledger, const Identity& owner, AccountId recipient, Tokens amount,
                         std::optional<Digest> expected_head = std::nullopt, std::uint64_t work_seed = 0,
                         std::uint64_t* work_evaluations = nullptr);

/// Throws Error(duplicate_receive) for a send already received and
/// Error(not_found) when no pending send is addressed to this account.
LatticeBlock create_receive(const Ledger& ledger, const Identity& owner, const Digest& send,
                            std::uint64_t work_seed = 0, std::uint64_t* work_evaluations = nullptr);

LatticeBlock create_change(const Ledger& ledger, const Identity& owner, AccountId representative,
                           std::uint64_t work_seed = 0);

/// Full-scan recomputation, independent of the incremental weight table.
Tokens representative_weight(const Ledger& ledger, AccountId representative);

struct LatticePruneReport {
  LatticeBytes before;
  LatticeBytes after;
  std::vector<AccountId> skipped;
};

/// Reduces a historical ledger to the current tier. Throws Error(config) on
/// a ledger that is not historical or a target other than current.
LatticePruneReport prune_lattice(Ledger& ledger, NodeTier target = NodeTier::current);

}  // namespace ledgerlab::lattice
