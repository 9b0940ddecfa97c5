#include "ledgerlab/election/stake.hpp"

#include "ledgerlab/chain/ops.hpp"
#include "ledgerlab/errors.hpp"
#include "ledgerlab/primitives/rng.hpp"

namespace ledgerlab::election {

void StakeRegistry::deposit(AccountId validator, Tokens amount) {
  if (amount > liquid_) throw Error(ErrorCode::insufficient_balance, "deposit exceeds liquid supply");
  liquid_ -= amount;
  deposits_[validator] += amount;
}

Tokens StakeRegistry::stake_of(AccountId validator) const {
  auto it = deposits_.find(validator);
  return it == deposits_.end() ? 0 : it->second;
}

Tokens StakeRegistry::total_stake() const {
  Tokens total = 0;
  for (const auto& [id, amount] : deposits_) total += amount;
  return total;
}

Tokens StakeRegistry::burn(AccountId validator) {
  auto it = deposits_.find(validator);
  if (it == deposits_.end()) throw Error(ErrorCode::not_found, "no deposit for " + to_string(validator));
  const Tokens amount = it->second;
  deposits_.erase(it);
  burned_ += amount;
  return amount;
}

AccountId pos_select(const StakeRegistry& registry, std::uint64_t rng_seed, std::uint64_t round) {
  const Tokens total = registry.total_stake();
  if (total == 0) throw Error(ErrorCode::no_validator, "total stake is zero");
  Rng rng(derive_seed(rng_seed, {0x706f73, round}));
  Tokens point = rng.below(total);
  for (const auto& [id, amount] : registry.deposits()) {
    if (point < amount) return id;
    point -= amount;
  }
  throw Error(ErrorCode::no_validator, "stake draw fell outside registry");
}

StakeRegistry pos_slash(const StakeRegistry& registry, AccountId validator, const chain::Block& offending,
                        const chain::ChainStore& store) {
  if (!registry.deposits().contains(validator))
    throw Error(ErrorCode::not_found, "no deposit for " + to_string(validator));
  if (offending.header.producer != validator || !store.seal_valid(offending))
    throw Error(ErrorCode::slash_rejected, "evidence is not signed by " + to_string(validator));
  if (chain::validate_block(store, offending).accepted())
    throw Error(ErrorCode::slash_rejected, "evidence block is valid");
  StakeRegistry next = registry;
  next.burn(validator);
  return next;
}

}  // namespace ledgerlab::election
