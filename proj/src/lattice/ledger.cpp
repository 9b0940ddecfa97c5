#include "ledgerlab/lattice/ledger.hpp"

#include <cmath>

#include "ledgerlab/election/pow.hpp"
#include "ledgerlab/errors.hpp"

namespace ledgerlab::lattice {

std::string_view to_string(NodeTier tier) {
  switch (tier) {
    case NodeTier::historical: return "historical";
    case NodeTier::current: return "current";
    case NodeTier::light: return "light";
  }
  return "unknown";
}

NodeTier parse_tier(std::string_view text) {
  if (text == "historical") return NodeTier::historical;
  if (text == "current") return NodeTier::current;
  if (text == "light") return NodeTier::light;
  throw Error(ErrorCode::config, "unknown node tier '" + std::string(text) + "'");
}

std::string_view to_string(LatticeRule rule) {
  switch (rule) {
    case LatticeRule::ok: return "ok";
    case LatticeRule::bad_signature: return "bad-signature";
    case LatticeRule::bad_pow: return "bad-pow";
    case LatticeRule::fork_detected: return "fork-detected";
    case LatticeRule::gap_detected: return "gap-detected";
    case LatticeRule::insufficient_balance: return "insufficient-balance";
    case LatticeRule::invalid_amount: return "invalid-amount";
    case LatticeRule::not_found: return "not-found";
    case LatticeRule::duplicate_receive: return "duplicate-receive";
    case LatticeRule::duplicate: return "duplicate";
    case LatticeRule::cemented_conflict: return "cemented-conflict";
    case LatticeRule::bad_genesis: return "bad-genesis";
  }
  return "unknown";
}

bool LatticeParams::cementing_enabled() const { return cement_delay_s >= 0.0 && std::isfinite(cement_delay_s); }

namespace {

constexpr std::uint64_t kPendingRecordBytes = 32 + 8 + 8 + 8;
constexpr std::uint64_t kAccountRecordBytes = 8 + 32 + 8 + 8 + 8;
constexpr std::uint64_t kSettlementRecordBytes = 32 + 32;
constexpr std::uint64_t kSuccessorRecordBytes = 32 + 32;

}  // namespace

Ledger::Ledger(LatticeParams params, Keyring keys, std::vector<GenesisAccount> genesis, NodeTier tier)
    : params_(params), keys_(keys), tier_(tier) {
  for (const auto& g : genesis) {
    if (accounts_.contains(g.account))
      throw Error(ErrorCode::config, "duplicate genesis account " + to_string(g.account));
    LatticeBlock b;
    b.account = g.account;
    b.payload = GenesisPayload{g.amount, g.representative};
    b.signature = keys_.sign(keys_.identity(g.account), b.id());
    const Digest id = b.id();

    AccountChain chain{g.account, id, g.amount, g.representative, 1, {id}};
    accounts_.emplace(g.account, chain);
    adjust_weight(g.representative, g.amount, 0);
    supply_ += g.amount;
    store_block(b, Meta{g.amount, g.representative, 0.0, 0.0, params_.cementing_enabled()});
  }
}

void Ledger::adjust_weight(AccountId rep, Tokens add, Tokens sub) {
  auto& w = weights_[rep];
  w = w + add - sub;
  if (w == 0) weights_.erase(rep);
}

void Ledger::store_block(const LatticeBlock& block, const Meta& meta) {
  const Digest id = block.id();
  blocks_.insert_or_assign(id, block);
  meta_.insert_or_assign(id, meta);
  successors_.insert_or_assign(block.subject(), id);
}

LatticeVerdict Ledger::validate(const LatticeBlock& block) const {
  const Digest id = block.id();
  if (blocks_.contains(id)) return {LatticeRule::duplicate, id};
  if (!keys_.verify(block.signature, block.account, id)) return {LatticeRule::bad_signature, {}};
  if (block.kind() == BlockKind::genesis) return {LatticeRule::bad_genesis, {}};
  if (!election::check_pow(id, block.antispam_nonce, params_.spam_difficulty_bits)) return {LatticeRule::bad_pow, {}};

  const AccountChain* chain = account(block.account);
  const bool opens = block.predecessor.is_zero() && chain == nullptr;
  const bool extends_head = chain != nullptr && block.predecessor == chain->head;
  if (!opens && !extends_head) {
    const Digest subject = block.subject();
    auto occupied = successors_.find(subject);
    if (occupied != successors_.end()) {
      if (occupied->second == id) return {LatticeRule::duplicate, id};
      if (cemented(occupied->second)) return {LatticeRule::cemented_conflict, subject};
      return {LatticeRule::fork_detected, subject};
    }
    return {LatticeRule::gap_detected, block.predecessor};
  }

  switch (block.kind()) {
    case BlockKind::send: {
      const auto& p = std::get<SendPayload>(block.payload);
      if (p.amount == 0) return {LatticeRule::invalid_amount, {}};
      if (chain == nullptr || p.amount > chain->balance) return {LatticeRule::insufficient_balance, {}};
      break;
    }
    case BlockKind::receive: {
      const auto& p = std::get<ReceivePayload>(block.payload);
      auto it = pending_.find(p.source);
      if (it != pending_.end()) {
        if (it->second.recipient != block.account) return {LatticeRule::not_found, p.source};
        if (it->second.amount != p.amount) return {LatticeRule::invalid_amount, p.source};
        break;
      }
      if (settled_.contains(p.source)) return {LatticeRule::duplicate_receive, p.source};
      return {LatticeRule::gap_detected, p.source};
    }
    case BlockKind::change:
      if (chain == nullptr) return {LatticeRule::insufficient_balance, {}};
      break;
    case BlockKind::genesis:
      break;
  }
  return {};
}

void Ledger::apply(const LatticeBlock& block, double now) {
  if (tier_ == NodeTier::light) throw Error(ErrorCode::validation, "light nodes keep no ledger");
  const auto verdict = validate(block);
  if (!verdict.accepted())
    throw Error(ErrorCode::validation, "lattice block rejected: " + std::string(to_string(verdict.rule)));

  const Digest id = block.id();
  auto [it, opened] = accounts_.try_emplace(block.account);
  AccountChain& chain = it->second;
  if (opened) {
    chain.account = block.account;
    chain.representative = block.account;  // new accounts delegate to themselves
  }

  switch (block.kind()) {
    case BlockKind::send: {
      const auto& p = std::get<SendPayload>(block.payload);
      chain.balance -= p.amount;
      adjust_weight(chain.representative, 0, p.amount);
      pending_.emplace(id, PendingSend{id, block.account, p.recipient, p.amount});
      break;
    }
    case BlockKind::receive: {
      const auto& p = std::get<ReceivePayload>(block.payload);
      auto node = pending_.extract(p.source);
      chain.balance += p.amount;
      adjust_weight(chain.representative, p.amount, 0);
      settled_.emplace(p.source, Settlement{id, node.mapped()});
      break;
    }
    case BlockKind::change: {
      const auto& p = std::get<ChangePayload>(block.payload);
      adjust_weight(chain.representative, 0, chain.balance);
      chain.representative = p.representative;
      adjust_weight(chain.representative, chain.balance, 0);
      break;
    }
    case BlockKind::genesis:
      break;
  }

  const Digest previous = chain.head;
  chain.head = id;
  ++chain.block_count;
  store_block(block, Meta{chain.balance, chain.representative, now, now, false});

  if (tier_ == NodeTier::current && !opened) {
    // Keep only the head's body; the slot stays in the successor index.
    blocks_.erase(previous);
    if (auto m = meta_.find(previous); m != meta_.end() && !m->second.cemented) meta_.erase(m);
    chain.blocks.assign({id});
  } else {
    chain.blocks.push_back(id);
  }
}

LatticeBlock Ledger::undo_head(AccountId account) {
  AccountChain& chain = accounts_.at(account);
  const Digest id = chain.head;
  auto bit = blocks_.find(id);
  if (bit == blocks_.end()) throw Error(ErrorCode::not_found, "block history pruned, cannot roll back");
  const LatticeBlock block = bit->second;
  if (cemented(id)) throw Error(ErrorCode::validation, "cannot roll back a cemented block");

  switch (block.kind()) {
    case BlockKind::genesis:
      throw Error(ErrorCode::validation, "genesis blocks cannot be rolled back");
    case BlockKind::send: {
      const auto& p = std::get<SendPayload>(block.payload);
      pending_.erase(id);
      chain.balance += p.amount;
      adjust_weight(chain.representative, p.amount, 0);
      break;
    }
    case BlockKind::receive: {
      const auto& p = std::get<ReceivePayload>(block.payload);
      auto node = settled_.extract(p.source);
      pending_.emplace(p.source, node.mapped().send);
      chain.balance -= p.amount;
      adjust_weight(chain.representative, 0, p.amount);
      break;
    }
    case BlockKind::change: {
      const auto& prev = meta_.at(block.predecessor);
      adjust_weight(chain.representative, 0, chain.balance);
      chain.representative = prev.representative_after;
      adjust_weight(chain.representative, chain.balance, 0);
      break;
    }
  }

  successors_.erase(block.subject());
  blocks_.erase(id);
  meta_.erase(id);
  chain.blocks.pop_back();
  --chain.block_count;
  if (block.predecessor.is_zero()) {
    adjust_weight(chain.representative, 0, chain.balance);
    accounts_.erase(account);
  } else {
    chain.head = block.predecessor;
  }
  return block;
}

std::vector<LatticeBlock> Ledger::rollback(const Digest& id) {
  if (tier_ != NodeTier::historical) throw Error(ErrorCode::validation, "rollback needs a historical ledger");
  auto target = blocks_.find(id);
  if (target == blocks_.end()) throw Error(ErrorCode::not_found, "unknown block " + id.short_hex());
  const AccountId account = target->second.account;

  std::vector<LatticeBlock> removed;
  while (true) {
    const Digest head = accounts_.at(account).head;
    const LatticeBlock& top = blocks_.at(head);
    if (top.kind() == BlockKind::send) {
      if (auto r = receive_of(head)) {
        auto nested = rollback(*r);
        removed.insert(removed.end(), nested.begin(), nested.end());
      }
    }
    removed.push_back(undo_head(account));
    if (head == id) break;
  }
  return removed;
}

const AccountChain* Ledger::account(AccountId id) const {
  auto it = accounts_.find(id);
  return it == accounts_.end() ? nullptr : &it->second;
}

Tokens Ledger::balance(AccountId id) const {
  const auto* a = account(id);
  return a == nullptr ? 0 : a->balance;
}

const LatticeBlock* Ledger::block(const Digest& id) const {
  auto it = blocks_.find(id);
  return it == blocks_.end() ? nullptr : &it->second;
}

std::optional<Digest> Ledger::successor(const Digest& subject) const {
  auto it = successors_.find(subject);
  if (it == successors_.end()) return std::nullopt;
  return it->second;
}

std::optional<PendingSend> Ledger::pending_for(const Digest& send) const {
  auto it = pending_.find(send);
  if (it == pending_.end()) return std::nullopt;
  return it->second;
}

std::optional<Digest> Ledger::receive_of(const Digest& send) const {
  auto it = settled_.find(send);
  if (it == settled_.end()) return std::nullopt;
  return it->second.receive;
}

Tokens Ledger::representative_weight(AccountId representative) const {
  auto it = weights_.find(representative);
  return it == weights_.end() ? 0 : it->second;
}

Tokens Ledger::total_weight() const {
  Tokens total = 0;
  for (const auto& [rep, w] : weights_) total += w;
  return total;
}

Tokens Ledger::settled_total() const {
  Tokens total = 0;
  for (const auto& [id, chain] : accounts_) total += chain.balance;
  return total;
}

Tokens Ledger::pending_total() const {
  Tokens total = 0;
  for (const auto& [id, p] : pending_) total += p.amount;
  return total;
}

void Ledger::mark_disputed(const Digest& subject, AccountId account) { disputes_.insert_or_assign(subject, account); }

void Ledger::clear_dispute(const Digest& subject, double now) {
  if (disputes_.erase(subject) == 0) return;
  if (auto s = successor(subject)) {
    if (auto m = meta_.find(*s); m != meta_.end()) m->second.quiet_since = now;
  }
}

bool Ledger::account_disputed(AccountId id) const {
  for (const auto& [subject, account] : disputes_)
    if (account == id) return true;
  return false;
}

bool Ledger::cemented(const Digest& id) const {
  auto it = meta_.find(id);
  return it != meta_.end() && it->second.cemented;
}

double Ledger::accepted_at(const Digest& id) const {
  auto it = meta_.find(id);
  return it == meta_.end() ? 0.0 : it->second.accepted_at;
}

bool Ledger::cement(const Digest& id, double now) {
  if (!params_.cementing_enabled()) return false;
  auto m = meta_.find(id);
  if (m == meta_.end()) return false;
  if (m->second.cemented) return true;
  const auto& b = blocks_.at(id);
  if (disputed(b.subject())) return false;
  if (now - m->second.quiet_since < params_.cement_delay_s) return false;
  if (!b.predecessor.is_zero() && meta_.contains(b.predecessor) && !cemented(b.predecessor)) return false;
  m->second.cemented = true;
  return true;
}

LatticeBytes Ledger::bytes() const {
  LatticeBytes out;
  if (tier_ == NodeTier::light) return out;
  for (const auto& [id, b] : blocks_) out.lattice_blocks += encoded_size(b);
  out.pending = kPendingRecordBytes * pending_.size();
  out.state = kAccountRecordBytes * accounts_.size() + kSettlementRecordBytes * settled_.size() +
              kSuccessorRecordBytes * successors_.size();
  return out;
}

std::vector<AccountId> Ledger::drop_history() {
  std::vector<AccountId> skipped;
  for (auto& [id, chain] : accounts_) {
    if (account_disputed(id)) {
      skipped.push_back(id);
      continue;
    }
    // The successor index and cement marks stay: they are what lets a
    // pruned node still tell a fork from a gap.
    for (const auto& b : chain.blocks) {
      if (b == chain.head) continue;
      blocks_.erase(b);
      if (auto m = meta_.find(b); m != meta_.end() && !m->second.cemented) meta_.erase(m);
    }
    chain.blocks.assign({chain.head});
  }
  tier_ = NodeTier::current;
  return skipped;
}

void Ledger::inject_fault_credit(AccountId id, Tokens amount) {
  auto& chain = accounts_.at(id);
  chain.balance += amount;
  adjust_weight(chain.representative, amount, 0);
}

LatticeBlock create_send(const Ledger& ledger, const Identity& owner, AccountId recipient, Tokens amount,
                         std::optional<Digest> expected_head, std::uint64_t work_seed,
                         std::uint64_t* work_evaluations) {
  const auto* chain = ledger.account(owner.id);
  if (chain == nullptr) throw Error(ErrorCode::not_found, "unknown account " + to_string(owner.id));
  if (amount == 0) throw Error(ErrorCode::invalid_amount, "send amount must be positive");
  if (amount > chain->balance) throw Error(ErrorCode::insufficient_balance, "send exceeds balance");
  if (expected_head && *expected_head != chain->head)
    throw Error(ErrorCode::stale_predecessor, "account head moved since " + expected_head->short_hex());
  LatticeBlock b;
  b.account = owner.id;
  b.predecessor = chain->head;
  b.payload = SendPayload{recipient, amount};
  finish_block(b, ledger.keys(), owner, ledger.params().spam_difficulty_bits, work_seed, work_evaluations);
  return b;
}

LatticeBlock create_receive(const Ledger& ledger, const Identity& owner, const Digest& send,
                            std::uint64_t work_seed, std::uint64_t* work_evaluations) {
  if (ledger.settled(send)) throw Error(ErrorCode::duplicate_receive, "send already received");
  const auto p = ledger.pending_for(send);
  if (!p || p->recipient != owner.id) throw Error(ErrorCode::not_found, "no pending send to " + to_string(owner.id));
  const auto* chain = ledger.account(owner.id);
  LatticeBlock b;
  b.account = owner.id;
  b.predecessor = chain == nullptr ? Digest::zero() : chain->head;
  b.payload = ReceivePayload{send, p->amount};
  finish_block(b, ledger.keys(), owner, ledger.params().spam_difficulty_bits, work_seed, work_evaluations);
  return b;
}

LatticeBlock create_change(const Ledger& ledger, const Identity& owner, AccountId representative,
                           std::uint64_t work_seed) {
  const auto* chain = ledger.account(owner.id);
  if (chain == nullptr) throw Error(ErrorCode::not_found, "unknown account " + to_string(owner.id));
  LatticeBlock b;
  b.account = owner.id;
  b.predecessor = chain->head;
  b.payload = ChangePayload{representative};
  finish_block(b, ledger.keys(), owner, ledger.params().spam_difficulty_bits, work_seed);
  return b;
}

Tokens representative_weight(const Ledger& ledger, AccountId representative) {
  Tokens total = 0;
  for (const auto& [id, chain] : ledger.accounts())
    if (chain.representative == representative) total += chain.balance;
  return total;
}

LatticePruneReport prune_lattice(Ledger& ledger, NodeTier target) {
  if (target != NodeTier::current) throw Error(ErrorCode::config, "lattice pruning only targets the current tier");
  if (ledger.tier() != NodeTier::historical) throw Error(ErrorCode::config, "only historical ledgers can be pruned");
  LatticePruneReport report;
  report.before = ledger.bytes();
  report.skipped = ledger.drop_history();
  report.after = ledger.bytes();
  return report;
}

}  // namespace ledgerlab::lattice
