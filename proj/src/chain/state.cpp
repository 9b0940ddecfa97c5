#include "ledgerlab/chain/state.hpp"

#include <algorithm>
#include <vector>

#include "ledgerlab/primitives/merkle.hpp"

namespace ledgerlab::chain {

namespace {

template <typename V>
auto locate(V& accounts, AccountId id) {
  return std::lower_bound(accounts.begin(), accounts.end(), id,
                          [](const auto& entry, AccountId key) { return entry.first < key; });
}

}  // namespace

AccountState LedgerState::get(AccountId id) const {
  auto it = locate(accounts_, id);
  return it == accounts_.end() || it->first != id ? AccountState{} : it->second;
}

void LedgerState::set(AccountId id, AccountState s) {
  auto it = locate(accounts_, id);
  const bool found = it != accounts_.end() && it->first == id;
  if (s.empty()) {
    if (found) accounts_.erase(it);
  } else if (found) {
    it->second = s;
  } else {
    accounts_.insert(it, {id, s});
  }
}

Tokens LedgerState::total_balance() const {
  Tokens total = 0;
  for (const auto& [id, s] : accounts_) total += s.balance;
  return total;
}

Digest LedgerState::root() const {
  std::vector<Digest> leaves;
  leaves.reserve(accounts_.size());
  for (const auto& [id, s] : accounts_) {
    Writer w;
    w.u64(raw(id));
    w.u64(s.balance);
    w.u64(s.sequence);
    leaves.push_back(digest(w.bytes()));
  }
  return merkle_root(leaves);
}

namespace {

void encode_account(Writer& w, AccountId id, const AccountState& s) {
  w.u64(raw(id));
  w.u64(s.balance);
  w.u64(s.sequence);
}

}  // namespace

void encode(Writer& w, const LedgerState& s) {
  w.u32(static_cast<std::uint32_t>(s.accounts().size()));
  for (const auto& [id, a] : s.accounts()) encode_account(w, id, a);
}

LedgerState decode(Reader& r, Tag<LedgerState>) {
  LedgerState s;
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    const AccountId id{r.u64()};
    AccountState a;
    a.balance = r.u64();
    a.sequence = r.u64();
    s.set(id, a);
  }
  return s;
}

void StateDelta::apply(LedgerState& state) const {
  for (const auto& [id, change] : changes) state.set(id, change.second);
}

void StateDelta::revert(LedgerState& state) const {
  for (const auto& [id, change] : changes) state.set(id, change.first);
}

void encode(Writer& w, const StateDelta& d) {
  w.digest(d.block);
  w.u32(static_cast<std::uint32_t>(d.changes.size()));
  for (const auto& [id, change] : d.changes) {
    w.u64(raw(id));
    w.u64(change.first.balance);
    w.u64(change.first.sequence);
    w.u64(change.second.balance);
    w.u64(change.second.sequence);
  }
}

StateDelta decode(Reader& r, Tag<StateDelta>) {
  StateDelta d;
  d.block = r.digest();
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    const AccountId id{r.u64()};
    AccountState before, after;
    before.balance = r.u64();
    before.sequence = r.u64();
    after.balance = r.u64();
    after.sequence = r.u64();
    d.changes.emplace(id, std::make_pair(before, after));
  }
  return d;
}

}  // namespace ledgerlab::chain
