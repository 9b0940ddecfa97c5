#include "ledgerlab/chain/store.hpp"

#include "ledgerlab/primitives/merkle.hpp"

namespace ledgerlab::chain {

ChainStore::ChainStore(ChainParams params, Keyring keys) : params_(std::move(params)), keys_(keys) {
  for (const auto& [id, amount] : params_.genesis_allocation) {
    auto s = head_state_.get(id);
    s.balance += amount;
    head_state_.set(id, s);
  }

  auto genesis = std::make_shared<Block>();
  genesis->header.tx_root = empty_merkle_root();
  genesis->header.state_root = head_state_.root();
  genesis->header.timestamp_ms = params_.genesis_timestamp_ms;
  genesis_ = genesis;
  genesis_id_ = genesis->id();

  blocks_.emplace(genesis_id_, StoredBlock{genesis->header, genesis_id_, genesis_, params_.difficulty, arrivals_++});
  tips_.insert(genesis_id_);
  main_chain_.push_back(genesis_id_);
}

const StoredBlock* ChainStore::find(const Digest& id) const {
  auto it = blocks_.find(id);
  return it == blocks_.end() ? nullptr : &it->second;
}

const Digest* ChainStore::main_chain_at(std::uint64_t height) const {
  return height < main_chain_.size() ? &main_chain_[height] : nullptr;
}

bool ChainStore::on_adopted_chain(const Digest& id) const {
  const auto* b = find(id);
  if (b == nullptr) return false;
  const auto* at = main_chain_at(b->header.height);
  return at != nullptr && *at == id;
}

std::optional<LedgerState> ChainStore::state_at(const Digest& id) const {
  const auto* target = find(id);
  if (target == nullptr) return std::nullopt;

  // Side-branch blocks from `id` down to the adopted chain.
  std::vector<Digest> branch;
  const StoredBlock* cursor = target;
  while (!on_adopted_chain(cursor->id)) {
    branch.push_back(cursor->id);
    cursor = find(cursor->header.predecessor);
    if (cursor == nullptr) return std::nullopt;
  }
  const std::uint64_t fork_height = cursor->header.height;

  LedgerState state = head_state_;
  for (std::uint64_t h = head_height(); h > fork_height; --h) {
    auto it = deltas_.find(main_chain_[h]);
    if (it == deltas_.end()) return std::nullopt;
    it->second.revert(state);
  }
  for (auto it = branch.rbegin(); it != branch.rend(); ++it) {
    auto d = deltas_.find(*it);
    if (d == deltas_.end()) return std::nullopt;
    d->second.apply(state);
  }
  return state;
}

bool ChainStore::seal_valid(const Block& block) const {
  if (block.id() == genesis_id_) return true;
  return keys_.verify(block.seal, block.header.producer, block.header.id());
}

election::DifficultySchedule ChainStore::schedule_for_child(const Digest& parent) const {
  const auto* p = find(parent);
  return p == nullptr ? params_.difficulty : p->next_schedule;
}

void ChainStore::inject_fault_credit(AccountId id, Tokens amount) {
  auto s = head_state_.get(id);
  s.balance += amount;
  head_state_.set(id, s);
}

const std::vector<Digest>* ChainStore::blocks_with_tx(const Digest& tx) const {
  for (const auto& id : unindexed_) {
    // Bodies pruned before indexing would have been dropped from the index anyway.
    if (const auto& body = blocks_.at(id).body)
      for (const auto& t : body->transactions) tx_index_[t.id()].push_back(id);
  }
  unindexed_.clear();
  auto it = tx_index_.find(tx);
  return it == tx_index_.end() ? nullptr : &it->second;
}

}  // namespace ledgerlab::chain
