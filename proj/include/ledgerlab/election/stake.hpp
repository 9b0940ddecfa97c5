#pragma once

#include <cstdint>
#include <map>

#include "ledgerlab/primitives/identity.hpp"

namespace ledgerlab::chain {
struct Block;
class ChainStore;
}  // namespace ledgerlab::chain

namespace ledgerlab::election {

using Tokens = std::uint64_t;

/// Validator deposits. Total supply is liquid tokens plus deposits; burning
/// a deposit removes it from the supply, so supply + burned never changes.
class StakeRegistry {
 public:
  explicit StakeRegistry(Tokens liquid_supply = 0) : liquid_(liquid_supply) {}

  /// Moves liquid tokens into a deposit. Throws Error(insufficient_balance).
  void deposit(AccountId validator, Tokens amount);

  const std::map<AccountId, Tokens>& deposits() const { return deposits_; }
  Tokens stake_of(AccountId validator) const;
  Tokens total_stake() const;
  Tokens liquid() const { return liquid_; }
  Tokens burned() const { return burned_; }
  Tokens total_supply() const { return liquid_ + total_stake(); }

  /// Burns the validator's whole deposit and drops it from selection.
  /// Throws Error(not_found) when there is no deposit.
  Tokens burn(AccountId validator);

 private:
  std::map<AccountId, Tokens> deposits_;
  Tokens liquid_ = 0;
  Tokens burned_ = 0;
};

/// Stake-weighted draw, pure in (registry, seed, round). Throws
/// Error(no_validator) when no validator has positive stake.
AccountId pos_select(const StakeRegistry& registry, std::uint64_t rng_seed, std::uint64_t round);

/// Burns the validator's deposit given a block it signed that fails
/// validation against `store`. Valid evidence, or evidence not signed by the
/// validator, throws Error(slash_rejected); a validator without a deposit
/// throws Error(not_found).
StakeRegistry pos_slash(const StakeRegistry& registry, AccountId validator, const chain::Block& offending,
                        const chain::ChainStore& store);

}  // namespace ledgerlab::election
