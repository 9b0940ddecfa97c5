#include "ledgerlab/chain/ops.hpp"

#include <algorithm>
#include <unordered_set>

#include "ledgerlab/election/pow.hpp"
#include "ledgerlab/errors.hpp"
#include "ledgerlab/primitives/merkle.hpp"
#include "store_access.hpp"

namespace ledgerlab::chain {

std::string_view to_string(BlockRule rule) {
  switch (rule) {
    case BlockRule::ok: return "ok";
    case BlockRule::bad_proof: return "bad-proof";
    case BlockRule::unknown_parent: return "unknown-parent";
    case BlockRule::bad_root: return "bad-root";
    case BlockRule::double_spend: return "double-spend";
    case BlockRule::bad_signature: return "bad-signature";
    case BlockRule::bad_sequence: return "bad-sequence";
    case BlockRule::over_capacity: return "over-capacity";
  }
  return "unknown";
}

namespace {

struct Replay {
  LedgerState state;
  StateDelta delta;

  void touch(AccountId id, AccountState before, AccountState after) {
    auto [it, inserted] = delta.changes.try_emplace(id, before, after);
    if (!inserted) it->second.second = after;
    state.set(id, after);
  }

  void credit(AccountId id, Tokens amount) {
    const auto before = state.get(id);
    auto s = before;
    s.balance += amount;
    touch(id, before, s);
  }
};

BlockRule apply_tx(const Keyring& keys, Replay& r, const Transaction& tx) {
  if (!tx.verify(keys)) return BlockRule::bad_signature;
  const auto before = r.state.get(tx.sender());
  if (tx.sequence() != before.sequence + 1) return BlockRule::bad_sequence;
  if (before.balance < tx.amount()) return BlockRule::double_spend;
  auto s = before;
  s.balance -= tx.amount();
  s.sequence = tx.sequence();
  r.touch(tx.sender(), before, s);
  r.credit(tx.recipient(), tx.amount());
  return BlockRule::ok;
}

std::optional<LedgerState> parent_state(const ChainStore& store, const Digest& parent) {
  if (parent == store.head()) return store.head_state();
  return store.state_at(parent);
}

Verdict reject(BlockRule rule, std::string detail) { return Verdict{rule, std::move(detail)}; }

Verdict evaluate(const ChainStore& store, const Block& block, Replay* out) {
  const auto& h = block.header;
  const Digest id = block.id();
  if (id == store.genesis_id()) return {};
  if (h.predecessor.is_zero()) return reject(BlockRule::unknown_parent, "second genesis");
  const auto* parent = store.find(h.predecessor);
  if (parent == nullptr) return reject(BlockRule::unknown_parent, "predecessor not stored");
  if (h.height != parent->header.height + 1) return reject(BlockRule::unknown_parent, "height does not follow predecessor");

  if (!store.seal_valid(block)) return reject(BlockRule::bad_proof, "seal does not verify under producer");
  switch (store.params().mode) {
    case ProofMode::grind: {
      const int bits = parent->next_schedule.leading_zero_bits();
      if (!election::check_pow(h.work_payload(), h.nonce, bits))
        return reject(BlockRule::bad_proof, "work below " + std::to_string(bits) + " bits");
      break;
    }
    case ProofMode::stake:
      if (store.params().leader_check && !store.params().leader_check(h))
        return reject(BlockRule::bad_proof, "producer is not the slot leader");
      break;
    case ProofMode::lottery:
      break;
  }

  const auto ids = block.tx_ids();
  if (merkle_root(ids) != h.tx_root) return reject(BlockRule::bad_root, "tx-root mismatch");
  if (block.total_weight() > store.params().capacity_units)
    return reject(BlockRule::over_capacity, "transactions exceed block capacity");

  auto base = parent_state(store, h.predecessor);
  if (!base) return reject(BlockRule::unknown_parent, "predecessor state pruned");

  Replay replay{std::move(*base), {}};
  for (std::size_t i = 0; i < block.transactions.size(); ++i) {
    const auto rule = apply_tx(store.keys(), replay, block.transactions[i]);
    if (rule != BlockRule::ok) return reject(rule, "transaction " + std::to_string(i));
  }
  replay.credit(h.producer, store.params().block_reward);
  if (replay.state.root() != h.state_root) return reject(BlockRule::bad_root, "state-root mismatch");

  if (out != nullptr) {
    replay.delta.block = id;
    *out = std::move(replay);
  }
  return {};
}

election::DifficultySchedule next_schedule(const ChainStore& store, const BlockHeader& h) {
  const auto& parent = *store.find(h.predecessor);
  auto schedule = parent.next_schedule;
  const std::uint32_t window = schedule.retarget_window;
  if (window == 0 || h.height % window != 0) return schedule;

  const StoredBlock* back = &parent;
  for (std::uint32_t i = 1; i < window; ++i) back = store.find(back->header.predecessor);
  const double observed_s = static_cast<double>(h.timestamp_ms - std::min(h.timestamp_ms, back->header.timestamp_ms)) / 1000.0;
  return election::retarget(schedule, std::max(observed_s, 0.001));
}

void index_transactions(ChainStore& store, const Digest& id) { StoreAccess::unindexed(store).push_back(id); }

void insert_stored(ChainStore& store, const BlockHeader& h, const Digest& id, std::shared_ptr<const Block> body) {
  auto schedule = next_schedule(store, h);
  StoredBlock sb{h, id, std::move(body), schedule, StoreAccess::next_arrival(store)};
  StoreAccess::blocks(store).emplace(id, std::move(sb));
  auto& tips = StoreAccess::tips(store);
  tips.erase(h.predecessor);
  tips.insert(id);
}

}  // namespace

Block assemble_block(const ChainStore& store, std::span<const Transaction> mempool, const Digest& parent,
                     std::uint64_t capacity, AccountId producer, std::uint64_t timestamp_ms) {
  const auto* p = store.find(parent);
  if (p == nullptr) throw Error(ErrorCode::orphan_parent, "unknown parent " + parent.short_hex());
  auto base = parent_state(store, parent);
  if (!base) throw Error(ErrorCode::orphan_parent, "parent state no longer available");

  Block block;
  block.header.predecessor = parent;
  block.header.height = p->header.height + 1;
  block.header.timestamp_ms = timestamp_ms;
  block.header.producer = producer;

  Replay replay{std::move(*base), {}};
  std::uint64_t remaining = capacity;
  for (const auto& tx : mempool) {
    if (remaining == 0) break;
    if (tx.weight() > remaining) continue;
    const auto s = replay.state.get(tx.sender());
    if (tx.sequence() != s.sequence + 1 || s.balance < tx.amount()) continue;
    if (apply_tx(store.keys(), replay, tx) != BlockRule::ok) continue;
    block.transactions.push_back(tx);
    remaining -= tx.weight();
  }
  replay.credit(producer, store.params().block_reward);

  block.header.tx_root = merkle_root(block.tx_ids());
  block.header.state_root = replay.state.root();
  return block;
}

Verdict validate_block(const ChainStore& store, const Block& block) { return evaluate(store, block, nullptr); }

AdoptionReport adopt(ChainStore& store, const Block& block) {
  return adopt(store, std::make_shared<const Block>(block));
}

AdoptionReport adopt(ChainStore& store, std::shared_ptr<const Block> block) {
  AdoptionReport report;
  report.head_before = store.head();
  report.head_after = store.head();
  const Digest id = block->id();
  if (store.contains(id)) {
    report.duplicate = true;
    return report;
  }

  Replay replay;
  const auto verdict = evaluate(store, *block, &replay);
  if (!verdict.accepted())
    throw Error(ErrorCode::validation, std::string("block rejected: ") + std::string(to_string(verdict.rule)) + " (" +
                                           verdict.detail + ")");

  const auto& h = block->header;
  insert_stored(store, h, id, block);
  StoreAccess::deltas(store).emplace(id, std::move(replay.delta));
  index_transactions(store, id);

  if (h.height <= store.head_height()) return report;

  // Strictly taller branch: walk back to the adopted chain, then swap branches.
  std::vector<Digest> branch;
  const StoredBlock* cursor = store.find(id);
  while (!store.on_adopted_chain(cursor->id)) {
    branch.push_back(cursor->id);
    cursor = store.find(cursor->header.predecessor);
  }
  const std::uint64_t fork_height = cursor->header.height;

  auto& main = StoreAccess::main_chain(store);
  auto& state = StoreAccess::head_state(store);
  const auto& deltas = StoreAccess::deltas(store);
  for (std::uint64_t hgt = main.size() - 1; hgt > fork_height; --hgt) {
    report.orphaned.push_back(main[hgt]);
    deltas.at(main[hgt]).revert(state);
  }
  main.resize(fork_height + 1);
  for (auto it = branch.rbegin(); it != branch.rend(); ++it) {
    deltas.at(*it).apply(state);
    main.push_back(*it);
  }
  report.head_after = store.head();

  if (!report.orphaned.empty()) {
    std::unordered_set<Digest> kept;
    for (const auto& b : branch)
      if (const auto& body = store.find(b)->body) {
        for (const auto& tx : body->transactions) kept.insert(tx.id());
      }
    for (const auto& o : report.orphaned)
      if (const auto& body = store.find(o)->body) {
        for (const auto& tx : body->transactions)
          if (!kept.contains(tx.id())) report.reorged_out.push_back(tx);
      }
  }
  return report;
}

std::optional<std::uint64_t> confirmations(const ChainStore& store, const Digest& tx) {
  const auto* holders = store.blocks_with_tx(tx);
  if (holders == nullptr || holders->empty()) throw Error(ErrorCode::not_found, "unknown transaction " + tx.short_hex());
  for (const auto& b : *holders) {
    if (store.on_adopted_chain(b)) return 1 + store.head_height() - store.find(b)->header.height;
  }
  return std::nullopt;
}

bool is_confirmed(const ChainStore& store, const Digest& tx) {
  const auto c = confirmations(store, tx);
  return c && *c >= store.params().confirm_threshold;
}

LedgerBytes ledger_bytes(const ChainStore& store) {
  LedgerBytes bytes;
  for (const auto& [id, sb] : store.blocks()) {
    bytes.headers += encoded_size(sb.header);
    if (sb.body) bytes.bodies += body_bytes(*sb.body);
  }
  for (const auto& [id, d] : store.deltas()) bytes.deltas += encoded_size(d);
  bytes.state = encoded_size(store.head_state());
  return bytes;
}

PruneReport prune(ChainStore& store, std::uint64_t keep_recent) {
  if (keep_recent < kReorgSafetyWindow)
    throw Error(ErrorCode::config, "chain.prune_keep_recent below reorg-safety window of " +
                                       std::to_string(kReorgSafetyWindow));
  PruneReport report;
  report.before = ledger_bytes(store);
  const std::uint64_t head = store.head_height();
  report.cutoff_height = head > keep_recent ? head - keep_recent : 0;

  auto& index = StoreAccess::tx_index(store);
  auto& deltas = StoreAccess::deltas(store);
  for (auto& [id, sb] : StoreAccess::blocks(store)) {
    if (sb.header.height >= report.cutoff_height) continue;
    if (sb.body) {
      for (const auto& tx : sb.body->transactions) {
        auto it = index.find(tx.id());
        if (it == index.end()) continue;
        std::erase(it->second, id);
        if (it->second.empty()) index.erase(it);
      }
      sb.body.reset();
      ++report.bodies_dropped;
    }
    report.deltas_dropped += deltas.erase(id);
  }
  auto& first_full = StoreAccess::first_full_height(store);
  first_full = std::max(first_full, report.cutoff_height);
  report.after = ledger_bytes(store);
  return report;
}

ChainStore full_replay(const ChainStore& source) {
  ChainStore fresh(source.params(), source.keys());
  for (std::uint64_t h = 1; h <= source.head_height(); ++h) {
    const auto& sb = *source.find(*source.main_chain_at(h));
    if (!sb.body) throw Error(ErrorCode::not_found, "source no longer serves block bodies at height " + std::to_string(h));
    adopt(fresh, sb.body);
  }
  return fresh;
}

ChainStore fast_sync(const ChainStore& source, FastSyncResult* result) {
  const std::uint64_t offset = source.params().fastsync_pivot_offset;
  FastSyncResult info;
  if (source.head_height() <= offset) {
    info.full_replay = true;
    info.blocks_replayed = source.head_height();
    if (result != nullptr) *result = info;
    return full_replay(source);
  }

  const std::uint64_t pivot = source.head_height() - offset;
  info.pivot_height = pivot;
  ChainStore fresh(source.params(), source.keys());
  auto& main = StoreAccess::main_chain(fresh);

  // Header download up to the pivot: linkage and work are checked, no replay.
  for (std::uint64_t h = 1; h <= pivot; ++h) {
    const auto& sb = *source.find(*source.main_chain_at(h));
    const auto& hdr = sb.header;
    if (hdr.predecessor != fresh.head() || hdr.height != h)
      throw Error(ErrorCode::validation, "header chain broken at height " + std::to_string(h));
    if (fresh.params().mode == ProofMode::grind &&
        !election::check_pow(hdr.work_payload(), hdr.nonce, fresh.find(hdr.predecessor)->next_schedule.leading_zero_bits()))
      throw Error(ErrorCode::validation, "header work invalid at height " + std::to_string(h));
    insert_stored(fresh, hdr, sb.id, nullptr);
    main.push_back(sb.id);
  }

  auto pivot_state = source.state_at(*source.main_chain_at(pivot));
  if (!pivot_state) throw Error(ErrorCode::not_found, "source cannot serve state at pivot");
  if (pivot_state->root() != fresh.head_block().header.state_root)
    throw Error(ErrorCode::validation, "pivot state does not match header state-root");
  StoreAccess::head_state(fresh) = std::move(*pivot_state);
  StoreAccess::first_full_height(fresh) = pivot + 1;

  for (std::uint64_t h = pivot + 1; h <= source.head_height(); ++h) {
    const auto& sb = *source.find(*source.main_chain_at(h));
    if (!sb.body) throw Error(ErrorCode::not_found, "source lacks body at height " + std::to_string(h));
    adopt(fresh, sb.body);
    ++info.blocks_replayed;
  }
  if (result != nullptr) *result = info;
  return fresh;
}

}  // namespace ledgerlab::chain
