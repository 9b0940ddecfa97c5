#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "ledgerlab/chain/transaction.hpp"

namespace ledgerlab::chain {

struct AccountState {
  Tokens balance = 0;
  /// Sequence of the last transaction sent; the next one must be +1.
  std::uint64_t sequence = 0;

  bool empty() const { return balance == 0 && sequence == 0; }
  bool operator==(const AccountState&) const = default;
};

/// Account-balance state. Accounts in the empty state are not stored, so two
/// states with the same balances always share a root.
class LedgerState {
 public:
  AccountState get(AccountId id) const;
  void set(AccountId id, AccountState s);
  Tokens balance(AccountId id) const { return get(id).balance; }

  /// Sorted by account id.
  const std::vector<std::pair<AccountId, AccountState>>& accounts() const { return accounts_; }
  Tokens total_balance() const;
  Digest root() const;

  bool operator==(const LedgerState&) const = default;

 private:
  // A sorted vector: lookups dominate and the account set rarely changes.
  std::vector<std::pair<AccountId, AccountState>> accounts_;
};

void encode(Writer& w, const LedgerState& s);
LedgerState decode(Reader& r, Tag<LedgerState>);

struct StateDelta {
  Digest block;
  /// account -> (before, after)
  std::map<AccountId, std::pair<AccountState, AccountState>> changes;

  void apply(LedgerState& state) const;
  void revert(LedgerState& state) const;
};

void encode(Writer& w, const StateDelta& d);
StateDelta decode(Reader& r, Tag<StateDelta>);

}  // namespace ledgerlab::chain
