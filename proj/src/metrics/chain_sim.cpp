#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <unordered_map>
#include <unordered_set>

#include "ledgerlab/chain/ops.hpp"
#include "ledgerlab/election/pow.hpp"
#include "ledgerlab/election/stake.hpp"
#include "ledgerlab/errors.hpp"
#include "ledgerlab/metrics/measures.hpp"
#include "ledgerlab/metrics/netconfig.hpp"
#include "ledgerlab/metrics/simulate.hpp"
#include "ledgerlab/primitives/merkle.hpp"

namespace ledgerlab::metrics {

namespace {

using chain::Block;
using chain::ChainStore;
using chain::Tokens;
using chain::Transaction;
using simnet::NodeId;

constexpr std::uint64_t kProducerBase = 1'000'000;
constexpr std::size_t kOrphanLimit = 50'000;

AccountId producer_of(NodeId node) { return AccountId{kProducerBase + node}; }

struct ChainMsg {
  enum class Kind : std::uint8_t { block, request, mine, slot, fault };
  Kind kind = Kind::block;
  std::shared_ptr<const Block> block;
  Digest ref;
  std::uint64_t job = 0;

  Digest digest() const {
    Writer w;
    w.u8(static_cast<std::uint8_t>(kind));
    w.digest(block ? block->id() : ref);
    w.u64(job);
    return ledgerlab::digest(w.bytes());
  }
};

[[noreturn]] void breach(const std::string& invariant, const std::string& detail) {
  throw Error(ErrorCode::invariant_breach, invariant + ": " + detail);
}

/// Deterministic transaction stream shared by every node of a run. Account
/// s sends its k-th transaction as stream entry (k - 1) * S + s, so taking
/// the stream in order keeps every sender's sequence contiguous.
class TxStream {
 public:
  TxStream(const Keyring& keys, std::uint64_t seed, std::uint64_t accounts, std::uint64_t weight,
           std::uint64_t weight_max)
      : keys_(keys), seed_(seed), accounts_(accounts), weight_(weight), weight_max_(weight_max) {
    for (std::uint64_t s = 0; s < accounts; ++s) ids_.push_back(keys.identity(AccountId{1 + s}));
  }

  /// Index of the first stream entry `state` has not applied yet.
  std::uint64_t cursor(const chain::LedgerState& state) const {
    std::uint64_t best = UINT64_MAX;
    for (std::uint64_t s = 0; s < accounts_; ++s)
      best = std::min(best, state.get(AccountId{1 + s}).sequence * accounts_ + s);
    return best;
  }

  std::span<const Transaction> window(std::uint64_t begin, std::uint64_t end) {
    if (end <= begin) return {};
    if (begin < base_ || txs_.empty()) {
      txs_.clear();
      base_ = begin;
    }
    while (base_ + txs_.size() < end) txs_.push_back(make(base_ + txs_.size()));
    return std::span<const Transaction>(txs_).subspan(begin - base_, end - begin);
  }

  /// Frees entries below `index`; they are regenerated if a reorg needs them.
  void evict_below(std::uint64_t index) {
    if (index <= base_ + txs_.size() / 2 || index > base_ + txs_.size()) return;
    txs_.erase(txs_.begin(), txs_.begin() + static_cast<std::ptrdiff_t>(index - base_));
    base_ = index;
  }

 private:
  Transaction make(std::uint64_t i) const {
    const std::uint64_t s = i % accounts_;
    std::uint64_t weight = weight_;
    if (weight_max_ > weight_) weight += mix64(seed_ ^ mix64(i)) % (weight_max_ - weight_ + 1);
    return Transaction::make(keys_, ids_[s], AccountId{1 + (s + 1) % accounts_}, 1, i / accounts_ + 1, weight);
  }

  const Keyring& keys_;
  std::uint64_t seed_;
  std::uint64_t accounts_;
  std::uint64_t weight_;
  std::uint64_t weight_max_;
  std::vector<Identity> ids_;
  std::vector<Transaction> txs_;
  std::uint64_t base_ = 0;
};

struct Node {
  explicit Node(ChainStore s) : store(std::move(s)) {}

  ChainStore store;
  std::uint64_t job = 0;
  /// Grind mode: the block being worked on for `job`.
  std::shared_ptr<const Block> candidate;
  std::unordered_multimap<Digest, std::shared_ptr<const Block>> orphans;
  std::unordered_set<Digest> requested;
  std::unordered_set<Digest> invalid;
};

class ChainSim {
 public:
  ChainSim(const Config& config, std::uint64_t seed)
      : cfg_(config),
        seed_(seed),
        keys_(derive_seed(seed, {0x6b657973})),
        net_(config.count("net.nodes"), link_model(config), topology(config), derive_seed(seed, {0x6e6574})),
        observer_(observer_of(config)),
        stake_mode_(config.text("chain.proof") == "pos"),
        grind_(config.text("pow.mode") == "grind"),
        accounts_(config.count("chain.accounts")),
        stream_(keys_, derive_seed(seed, {0x7478}), accounts_, config.count("chain.tx_weight"),
                config.count("chain.tx_weight_max")) {
    const std::size_t n = config.count("net.nodes");
    trace_.paradigm = Paradigm::blockchain;
    trace_.seed = seed;
    trace_.confirm_threshold = config.count("chain.confirm_threshold");
    trace_.max_tracked_depth = static_cast<std::uint32_t>(
        std::max<std::uint64_t>(config.count("chain.survival_max_depth"), trace_.confirm_threshold));

    chain::ChainParams params;
    params.block_reward = config.count("chain.block_reward");
    params.capacity_units = config.count("chain.capacity_units");
    params.confirm_threshold = trace_.confirm_threshold;
    params.fastsync_pivot_offset = config.count("chain.fastsync_pivot_offset");
    const Tokens balance = config.count("chain.account_balance");
    for (std::uint64_t s = 0; s < accounts_; ++s) params.genesis_allocation.emplace_back(AccountId{1 + s}, balance);
    genesis_supply_ = balance * accounts_;

    if (stake_mode_) {
      params.mode = chain::ProofMode::stake;
      slot_s_ = config.number("pos.slot_interval_s");
      params.difficulty = {slot_s_, 0, 1.0};
      const auto& stakes = config.list("pos.stakes");
      Tokens total = 0;
      for (double s : stakes) total += static_cast<Tokens>(s);
      election::StakeRegistry reg(config.count("pos.liquid_supply") + total);
      for (std::size_t i = 0; i < stakes.size(); ++i)
        if (stakes[i] > 0) reg.deposit(producer_of(static_cast<NodeId>(i)), static_cast<Tokens>(stakes[i]));
      stake_invariant_ = reg.total_supply() + reg.burned();
      registries_.emplace_back(0, std::move(reg));
      faulty_ = config.integer("pos.faulty_validator");
      params.leader_check = [this](const chain::BlockHeader& h) {
        return h.producer == leader(h.timestamp_ms / slot_ms());
      };
    } else {
      const double interval = config.number("pow.target_interval_s");
      const auto window = static_cast<std::uint32_t>(config.count("pow.retarget_window"));
      rates_ = config.list("pow.hash_rates");
      double total = 0;
      for (double r : rates_) total += r;
      if (grind_) {
        params.mode = chain::ProofMode::grind;
        params.difficulty = {interval, window, std::ldexp(1.0, static_cast<int>(config.count("pow.difficulty_bits")))};
      } else {
        params.mode = chain::ProofMode::lottery;
        params.difficulty = {interval, window, total * interval};
      }
    }

    nodes_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) nodes_.emplace_back(ChainStore(params, keys_));
    for (std::size_t i = 0; i < n; ++i) rngs_.emplace_back(derive_seed(seed, {0x6d696e65, i}));
  }

  RunTrace run() {
    const double horizon = cfg_.number("scenario.horizon_s");
    const std::uint64_t target = cfg_.count("chain.target_blocks");
    if (target > 0) net_.stop_when([this, target] { return nodes_[observer_].store.head_height() >= target; });

    if (stake_mode_) {
      schedule_slot(1);
    } else {
      for (NodeId i = 0; i < nodes_.size() && i < rates_.size(); ++i)
        if (rates_[i] > 0) start_job(i);
    }
    if (cfg_.flag("fault.breach_conservation")) {
      const double interval = stake_mode_ ? slot_s_ : cfg_.number("pow.target_interval_s");
      const double at = target > 0 ? interval * static_cast<double>(target) / 2 : horizon / 2;
      net_.command(observer_, at, ChainMsg{ChainMsg::Kind::fault, nullptr, {}, 0});
    }

    try {
      net_.run(horizon, [this](const auto& e) { handle(e); });
      finish();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::invariant_breach) throw;
      trace_.breach = e.what();
    }
    trace_.ended_at = net_.now();
    trace_.trace_digest = net_.trace_digest();
    trace_.net = net_.stats();
    return std::move(trace_);
  }

 private:
  std::uint64_t slot_ms() const { return static_cast<std::uint64_t>(std::llround(slot_s_ * 1000.0)); }

  // Stake-mode leader per slot, from the registry in force at that slot.
  AccountId leader(std::uint64_t slot) {
    if (auto it = leaders_.find(slot); it != leaders_.end()) return it->second;
    const election::StakeRegistry* reg = &registries_.front().second;
    for (const auto& [from, r] : registries_)
      if (from <= slot) reg = &r;
    const AccountId who = election::pos_select(*reg, derive_seed(seed_, {0x706f73}), slot);
    leaders_.emplace(slot, who);
    return who;
  }

  void schedule_slot(std::uint64_t slot) {
    const AccountId who = leader(slot);
    const NodeId node = static_cast<NodeId>(raw(who) - kProducerBase);
    net_.timer(node, static_cast<double>(slot) * slot_s_, ChainMsg{ChainMsg::Kind::slot, nullptr, {}, slot});
  }

  std::span<const Transaction> mempool(const ChainStore& store) {
    const std::uint64_t begin = stream_.cursor(store.head_state());
    const std::uint64_t per_block = store.params().capacity_units / cfg_.count("chain.tx_weight");
    std::uint64_t end = begin + per_block + accounts_;
    if (const double rate = cfg_.number("chain.tx_rate_per_s"); rate > 0)
      end = std::min(end, static_cast<std::uint64_t>(std::floor(net_.now() * rate)));
    std::uint64_t lowest = begin;
    for (const auto& n : nodes_) lowest = std::min(lowest, stream_.cursor(n.store.head_state()));
    stream_.evict_below(lowest > 4 * per_block ? lowest - 4 * per_block : 0);
    return stream_.window(begin, end);
  }

  Block assemble(NodeId node, std::uint64_t timestamp_ms) {
    auto& store = nodes_[node].store;
    auto block = chain::assemble_block(store, mempool(store), store.head(), store.params().capacity_units,
                                       producer_of(node), timestamp_ms);
    return chain::seal_block(std::move(block), keys_, keys_.identity(producer_of(node)));
  }

  void start_job(NodeId node) {
    Node& n = nodes_[node];
    const std::uint64_t job = ++n.job;
    const double rate = rates_.at(node);
    if (grind_) {
      auto block = assemble(node, static_cast<std::uint64_t>(std::llround(net_.now() * 1000.0)));
      const int bits = n.store.schedule_for_child(n.store.head()).leading_zero_bits();
      election::WorkCounter counter;
      block.header.nonce = election::mine(block.header.work_payload(), bits, derive_seed(seed_, {node, job}),
                                          {.budget = 1ULL << 32, .counter = &counter});
      block = chain::seal_block(std::move(block), keys_, keys_.identity(producer_of(node)));
      n.candidate = std::make_shared<const Block>(std::move(block));
      net_.timer(node, net_.now() + static_cast<double>(counter.evaluations) / rate,
                 ChainMsg{ChainMsg::Kind::mine, nullptr, {}, job});
    } else {
      const double expected = n.store.schedule_for_child(n.store.head()).expected_hashes;
      net_.timer(node, net_.now() + rngs_[node].exponential(rate / expected),
                 ChainMsg{ChainMsg::Kind::mine, nullptr, {}, job});
    }
  }

  void handle(const simnet::SimEvent<ChainMsg>& e) {
    const NodeId node = e.destination;
    switch (e.payload.kind) {
      case ChainMsg::Kind::mine:
        if (e.payload.job == nodes_[node].job) on_mined(node);
        break;
      case ChainMsg::Kind::slot:
        on_slot(node, e.payload.job);
        break;
      case ChainMsg::Kind::block:
        on_block(node, e.source, e.payload.block);
        break;
      case ChainMsg::Kind::request:
        if (const auto* sb = nodes_[node].store.find(e.payload.ref); sb != nullptr && sb->body)
          net_.send(node, e.source, ChainMsg{ChainMsg::Kind::block, sb->body, {}, 0});
        break;
      case ChainMsg::Kind::fault:
        nodes_[node].store.inject_fault_credit(AccountId{1}, 1);
        break;
    }
    check_conservation(node);
  }

  void check_conservation(NodeId node) {
    const auto& store = nodes_[node].store;
    const Tokens expected = genesis_supply_ + store.params().block_reward * store.head_height();
    const Tokens actual = store.head_state().total_balance();
    if (actual != expected)
      breach("balance conservation", "node " + std::to_string(node) + " holds " + std::to_string(actual) +
                                         " tokens, expected " + std::to_string(expected) + " at height " +
                                         std::to_string(store.head_height()));
  }

  void on_mined(NodeId node) {
    Node& n = nodes_[node];
    std::shared_ptr<const Block> block;
    if (grind_) {
      block = std::move(n.candidate);
    } else {
      block = std::make_shared<const Block>(assemble(node, static_cast<std::uint64_t>(std::llround(net_.now() * 1000.0))));
    }
    produced(node, block);
    if (!adopted_head_change_) start_job(node);
  }

  void on_slot(NodeId node, std::uint64_t slot) {
    schedule_slot(slot + 1);
    const std::uint64_t ts = slot * slot_ms();
    if (static_cast<std::int64_t>(node) == faulty_) {
      // Overspend from the producer's own account, so the block is
      // well-formed but invalid: evidence for slashing.
      auto& store = nodes_[node].store;
      auto block = chain::assemble_block(store, mempool(store), store.head(), store.params().capacity_units,
                                         producer_of(node), ts);
      const auto own = store.head_state().get(producer_of(node));
      block.transactions.push_back(Transaction::make(keys_, keys_.identity(producer_of(node)), AccountId{1},
                                                     own.balance + 1, own.sequence + 1, 1));
      block.header.tx_root = merkle_root(block.tx_ids());
      block = chain::seal_block(std::move(block), keys_, keys_.identity(producer_of(node)));
      net_.broadcast(node, ChainMsg{ChainMsg::Kind::block, std::make_shared<const Block>(std::move(block)), {}, 0});
      return;
    }
    produced(node, std::make_shared<const Block>(assemble(node, ts)));
  }

  void produced(NodeId node, const std::shared_ptr<const Block>& block) {
    trace_.mined.push_back(MinedBlock{block->id(), block->header.height, node, net_.now()});
    mined_at_.emplace(block->id(), net_.now());
    adopted_head_change_ = false;
    store_block(node, block);
  }

  void on_block(NodeId node, NodeId from, const std::shared_ptr<const Block>& block) {
    Node& n = nodes_[node];
    const Digest id = block->id();
    if (n.store.contains(id) || n.invalid.contains(id)) return;
    const Digest& parent = block->header.predecessor;
    if (!n.store.contains(parent)) {
      if (n.orphans.size() < kOrphanLimit) n.orphans.emplace(parent, block);
      if (n.requested.insert(parent).second)
        net_.send(node, from, ChainMsg{ChainMsg::Kind::request, nullptr, parent, 0});
      return;
    }
    store_block(node, block);
  }

  // Adopts the block and any buffered descendants, relaying each one.
  void store_block(NodeId node, const std::shared_ptr<const Block>& first) {
    Node& n = nodes_[node];
    std::deque<std::shared_ptr<const Block>> work{first};
    bool head_changed = false;
    while (!work.empty()) {
      auto block = std::move(work.front());
      work.pop_front();
      const Digest id = block->id();
      chain::AdoptionReport report;
      try {
        report = chain::adopt(n.store, block);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::validation) throw;
        n.invalid.insert(id);
        if (stake_mode_) try_slash(node, *block);
        continue;
      }
      if (report.duplicate) continue;
      if (node == observer_) {
        stored_bytes_ += encoded_size(block->header) + chain::body_bytes(*block);
        trace_.ledger_bytes.add(net_.now(), static_cast<double>(stored_bytes_));
      }
      if (block->total_weight() > n.store.params().capacity_units)
        breach("capacity cap", "block " + id.short_hex() + " exceeds capacity");
      net_.broadcast(node, ChainMsg{ChainMsg::Kind::block, block, {}, 0});
      if (report.head_changed()) head_changed = true;
      n.requested.erase(id);
      auto range = n.orphans.equal_range(id);
      for (auto it = range.first; it != range.second; ++it) work.push_back(it->second);
      n.orphans.erase(id);
    }
    if (head_changed) on_head_change(node);
  }

  void on_head_change(NodeId node) {
    check_conservation(node);
    if (node == observer_) observe();
    if (!stake_mode_ && node < rates_.size() && rates_[node] > 0) {
      adopted_head_change_ = true;
      start_job(node);
    }
  }

  // Records the deepest confirmation depth each adopted block has reached.
  void observe() {
    const auto& store = nodes_[observer_].store;
    const std::uint64_t H = store.head_height();
    const std::uint32_t maxd = trace_.max_tracked_depth;
    for (std::uint64_t h = H; h >= 1; --h) {
      const Digest id = *store.main_chain_at(h);
      const auto d = static_cast<std::uint32_t>(std::min<std::uint64_t>(H - h + 1, maxd));
      auto& rec = trace_.depth_reached[id];
      // Ancestors of a block at the maximum depth are at the maximum too.
      if (rec >= d && d == maxd) break;
      if (d > rec) {
        if (rec < trace_.confirm_threshold && d >= trace_.confirm_threshold)
          if (auto it = mined_at_.find(id); it != mined_at_.end())
            trace_.confirmation_latency.add(net_.now(), net_.now() - it->second);
        rec = d;
      }
    }
  }

  void try_slash(NodeId node, const Block& block) {
    if (static_cast<std::int64_t>(node) == faulty_) return;
    const AccountId who = block.header.producer;
    const auto& current = registries_.back().second;
    if (!current.deposits().contains(who)) return;
    try {
      auto next = election::pos_slash(current, who, block, nodes_[node].store);
      const Tokens slashed = current.stake_of(who);
      if (next.total_supply() + next.burned() != stake_invariant_)
        breach("stake supply", "supply plus burned changed after slashing");
      if (next.total_stake() == 0) return;  // keep at least one validator
      ++trace_.slashes;
      trace_.slashed_stake += slashed;
      // Leaders for the next slot may already be fixed, so the new registry
      // applies from the slot after.
      const auto slot = static_cast<std::uint64_t>(net_.now() / slot_s_) + 2;
      registries_.emplace_back(slot, std::move(next));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::slash_rejected && e.code() != ErrorCode::not_found) throw;
    }
  }

  void finish() {
    const auto& store = nodes_[observer_].store;
    const std::uint64_t H = store.head_height();
    trace_.final_height = H;
    for (std::uint64_t h = 1; h <= H; ++h) {
      const Digest id = *store.main_chain_at(h);
      trace_.final_chain.insert(id);
      if (const auto* sb = store.find(id); sb != nullptr && sb->body)
        trace_.chain_transactions += sb->body->transactions.size();
    }
    trace_.chain_duration_s =
        static_cast<double>(store.head_block().header.timestamp_ms - store.genesis_block().header.timestamp_ms) / 1000.0;
    if (stake_mode_) {
      const auto& reg = registries_.back().second;
      trace_.stake_supply = reg.total_supply();
      trace_.extra["burned_stake"] = static_cast<double>(reg.burned());
      if (reg.total_supply() + reg.burned() != stake_invariant_)
        breach("stake supply", "supply plus burned changed");
    }

    const auto replayed = chain::full_replay(store);
    if (replayed.head_state() != store.head_state())
      breach("replay consistency", "full replay disagrees with the observer's head state");

    trace_.final_bytes = measure_ledger_bytes(store);
    if (const auto keep = cfg_.count("chain.prune_keep_recent"); keep > 0 && H > keep) {
      ChainStore pruned = store;
      const auto report = chain::prune(pruned, keep);
      if (pruned.head_state() != store.head_state())
        breach("pruning equivalence", "pruned node's balances differ from the archive node");
      if (report.bodies_dropped > 0 && report.after.total() >= report.before.total())
        breach("pruning equivalence", "pruning dropped bodies without shrinking the ledger");
      trace_.extra["pruned_ledger_bytes"] = static_cast<double>(report.after.total());
    }
  }

  const Config& cfg_;
  std::uint64_t seed_;
  Keyring keys_;
  simnet::Network<ChainMsg> net_;
  NodeId observer_;
  bool stake_mode_;
  bool grind_;
  std::uint64_t accounts_;
  TxStream stream_;
  std::vector<Node> nodes_;
  std::vector<Rng> rngs_;
  std::vector<double> rates_;
  Tokens genesis_supply_ = 0;
  RunTrace trace_;
  std::unordered_map<Digest, double> mined_at_;
  std::uint64_t stored_bytes_ = 0;
  bool adopted_head_change_ = false;

  double slot_s_ = 0.0;
  std::int64_t faulty_ = -1;
  std::vector<std::pair<std::uint64_t, election::StakeRegistry>> registries_;
  std::unordered_map<std::uint64_t, AccountId> leaders_;
  Tokens stake_invariant_ = 0;
};

}  // namespace

simnet::NodeId observer_of(const Config& config) {
  const auto o = config.integer("scenario.observer");
  return static_cast<simnet::NodeId>(o < 0 ? config.count("net.nodes") - 1 : static_cast<std::uint64_t>(o));
}

RunTrace run_chain(const Config& config, std::uint64_t seed) {
  config.validate();
  if (config.is_lattice()) throw Error(ErrorCode::wrong_paradigm, "run_chain needs a blockchain scenario");
  ChainSim sim(config, seed);
  return sim.run();
}

RunTrace simulate(const Config& config, std::uint64_t seed) {
  return config.is_lattice() ? run_lattice(config, seed) : run_chain(config, seed);
}

}  // namespace ledgerlab::metrics
