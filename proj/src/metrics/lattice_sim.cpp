#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "ledgerlab/errors.hpp"
#include "ledgerlab/lattice/node.hpp"
#include "ledgerlab/metrics/measures.hpp"
#include "ledgerlab/metrics/netconfig.hpp"
#include "ledgerlab/metrics/simulate.hpp"

namespace ledgerlab::metrics {

namespace {

using lattice::LatticeBlock;
using lattice::LatticeMessage;
using lattice::LatticeNode;
using lattice::Tokens;
using simnet::NodeId;

constexpr std::uint64_t kAttackerBase = 100'000;
constexpr int kBytesSamples = 20;

struct LatticeEvent {
  enum class Kind : std::uint8_t { message, send_tick, receive, fork, revote, cement, sample, fault };
  Kind kind = Kind::message;
  LatticeMessage msg;
  std::uint64_t arg = 0;
  Digest ref;

  Digest digest() const {
    Writer w;
    w.u8(static_cast<std::uint8_t>(kind));
    w.digest(kind == Kind::message ? msg.digest() : ref);
    w.u64(arg);
    return ledgerlab::digest(w.bytes());
  }
};

[[noreturn]] void breach(const std::string& invariant, const std::string& detail) {
  throw Error(ErrorCode::invariant_breach, invariant + ": " + detail);
}

std::vector<lattice::NodeTier> tiers_of(const Config& cfg) {
  const auto n = cfg.count("net.nodes");
  std::vector<lattice::NodeTier> out(n, lattice::NodeTier::historical);
  const auto& text = cfg.text("lattice.tiers");
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string t;
  for (std::size_t i = 0; i < n && std::getline(ss, t, ','); ++i) out[i] = lattice::parse_tier(t);
  return out;
}

class LatticeSim {
 public:
  LatticeSim(const Config& config, std::uint64_t seed)
      : cfg_(config),
        seed_(seed),
        keys_(derive_seed(seed, {0x6b657973})),
        net_(config.count("net.nodes"), link_model(config), topology(config), derive_seed(seed, {0x6e6574})),
        observer_(observer_of(config)),
        reps_(config.count("lattice.reps")),
        users_(config.count("lattice.accounts")),
        online_(users_ - config.count("lattice.offline_accounts")),
        amount_(config.count("lattice.send_amount")) {
    trace_.paradigm = Paradigm::lattice;
    trace_.seed = seed;

    lattice::LatticeParams params;
    params.spam_difficulty_bits = static_cast<int>(config.count("lattice.spam_difficulty_bits"));
    params.quorum_fraction = config.number("lattice.quorum_fraction");
    params.cement_delay_s = config.number("lattice.cement_delay_s");
    params.gap_buffer = config.count("lattice.gap_buffer");

    std::vector<lattice::GenesisAccount> genesis;
    const auto& rep_balances = config.list("lattice.rep_balances");
    for (std::uint64_t r = 0; r < reps_; ++r) {
      const Tokens b = rep_balances.empty() ? config.count("lattice.rep_balance")
                                            : static_cast<Tokens>(rep_balances[r]);
      genesis.push_back({rep(r), b, rep(r)});
    }
    for (std::uint64_t j = 0; j < users_; ++j)
      genesis.push_back({user(j), config.count("lattice.user_balance"), rep(j % reps_)});
    const auto forks = config.count("lattice.forks");
    for (std::uint64_t k = 0; k < forks; ++k) genesis.push_back({attacker(k), amount_, rep(k % reps_)});

    const auto tiers = tiers_of(config);
    const auto n = config.count("net.nodes");
    const auto stubborn = config.count("lattice.stubborn_reps");
    nodes_.reserve(n);
    for (NodeId i = 0; i < n; ++i) {
      std::optional<Identity> who;
      if (i < reps_) who = keys_.identity(rep(i));
      const bool is_stubborn = i < reps_ && i >= reps_ - stubborn;
      nodes_.emplace_back(lattice::Ledger(params, keys_, genesis, tiers[i]), who, is_stubborn);
    }
    for (NodeId i = 0; i < n; ++i) {
      nodes_[i].hooks().applied = [this, i](const LatticeBlock& b, double now) { on_applied(i, b, now); };
    }
    for (std::uint64_t j = 0; j < users_; ++j) user_rngs_.emplace_back(derive_seed(seed, {0x75736572, j}));
  }

  RunTrace run() {
    const double horizon = cfg_.number("scenario.horizon_s");
    const double rate = cfg_.number("lattice.send_rate_per_account");
    if (rate > 0)
      for (std::uint64_t j = 0; j < online_; ++j)
        net_.command(owner(j), user_rngs_[j].uniform(0.0, 1.0 / rate), tick(LatticeEvent::Kind::send_tick, j));

    const auto forks = cfg_.count("lattice.forks");
    for (std::uint64_t k = 0; k < forks; ++k)
      net_.command(attacker_node(), cfg_.number("lattice.fork_start_s") + k * cfg_.number("lattice.fork_interval_s"),
                   tick(LatticeEvent::Kind::fork, k));

    const double revote = cfg_.number("lattice.revote_interval_s");
    for (NodeId i = 0; i < nodes_.size() && i < reps_; ++i) net_.timer(i, revote, tick(LatticeEvent::Kind::revote, 0));
    if (const double delay = cfg_.number("lattice.cement_delay_s"); delay >= 0 && std::isfinite(delay))
      for (NodeId i = 0; i < nodes_.size(); ++i) net_.timer(i, cement_period(), tick(LatticeEvent::Kind::cement, 0));
    if (std::isfinite(horizon) && horizon > 0)
      net_.timer(observer_, horizon / kBytesSamples, tick(LatticeEvent::Kind::sample, 1));
    if (cfg_.flag("fault.breach_conservation")) net_.command(observer_, horizon / 2, tick(LatticeEvent::Kind::fault, 0));

    try {
      net_.run(horizon, [this](const auto& e) { handle(e); });
      finish(horizon);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::invariant_breach) throw;
      trace_.breach = e.what();
    }
    trace_.ended_at = std::isfinite(horizon) ? horizon : net_.now();
    trace_.trace_digest = net_.trace_digest();
    trace_.net = net_.stats();
    trace_.transfers.reserve(transfer_order_.size());
    for (const auto& id : transfer_order_) trace_.transfers.push_back(transfers_.at(id));
    return std::move(trace_);
  }

 private:
  AccountId rep(std::uint64_t r) const { return AccountId{1 + r}; }
  AccountId user(std::uint64_t j) const { return AccountId{1 + reps_ + j}; }
  AccountId attacker(std::uint64_t k) const { return AccountId{kAttackerBase + k}; }
  NodeId owner(std::uint64_t j) const { return static_cast<NodeId>(j % nodes_.size()); }
  NodeId attacker_node() const { return 0; }
  double cement_period() const { return std::max(cfg_.number("lattice.cement_delay_s") / 2, 0.5); }

  std::optional<std::uint64_t> user_index(AccountId id) const {
    const auto v = raw(id);
    if (v < 1 + reps_ || v >= 1 + reps_ + users_) return std::nullopt;
    return v - 1 - reps_;
  }

  static LatticeEvent tick(LatticeEvent::Kind kind, std::uint64_t arg, Digest ref = {}) {
    return LatticeEvent{kind, {}, arg, ref};
  }

  void broadcast(NodeId from, const std::vector<LatticeMessage>& msgs) {
    for (const auto& m : msgs) net_.broadcast(from, LatticeEvent{LatticeEvent::Kind::message, m, 0, {}});
  }

  std::uint64_t work_seed() { return derive_seed(seed_, {0x776f726b, work_counter_++}); }

  void handle(const simnet::SimEvent<LatticeEvent>& e) {
    const NodeId node = e.destination;
    const double now = e.at;
    LatticeNode& n = nodes_[node];
    switch (e.payload.kind) {
      case LatticeEvent::Kind::message:
        broadcast(node, n.on_message(e.payload.msg, now));
        break;
      case LatticeEvent::Kind::send_tick:
        on_send_tick(node, e.payload.arg, now);
        break;
      case LatticeEvent::Kind::receive:
        on_receive(node, e.payload.arg, e.payload.ref, now);
        break;
      case LatticeEvent::Kind::fork:
        on_fork(node, e.payload.arg, now);
        break;
      case LatticeEvent::Kind::revote:
        broadcast(node, n.revote(now));
        net_.timer(node, now + cfg_.number("lattice.revote_interval_s"), tick(LatticeEvent::Kind::revote, 0));
        break;
      case LatticeEvent::Kind::cement:
        n.cement_pass(now);
        net_.timer(node, now + cement_period(), tick(LatticeEvent::Kind::cement, 0));
        break;
      case LatticeEvent::Kind::sample:
        trace_.ledger_bytes.add(now, static_cast<double>(n.ledger().bytes().total()));
        if (e.payload.arg < kBytesSamples)
          net_.timer(node, now + cfg_.number("scenario.horizon_s") / kBytesSamples,
                     tick(LatticeEvent::Kind::sample, e.payload.arg + 1));
        break;
      case LatticeEvent::Kind::fault:
        n.ledger().inject_fault_credit(user(0), 1);
        break;
    }
    const auto& ledger = n.ledger();
    if (!ledger.conserved())
      breach("balance conservation", "node " + std::to_string(node) + " settled " +
                                         std::to_string(ledger.settled_total()) + " + pending " +
                                         std::to_string(ledger.pending_total()) + " != supply " +
                                         std::to_string(ledger.supply()));
  }

  void on_send_tick(NodeId node, std::uint64_t j, double now) {
    net_.command(node, now + 1.0 / cfg_.number("lattice.send_rate_per_account"), tick(LatticeEvent::Kind::send_tick, j));
    if (users_ < 2) return;
    std::uint64_t to = user_rngs_[j].below(users_ - 1);
    if (to >= j) ++to;
    LatticeNode& n = nodes_[node];
    if (n.ledger().tier() == lattice::NodeTier::light) return;
    LatticeBlock block;
    try {
      std::uint64_t work = 0;
      block = lattice::create_send(n.ledger(), keys_.identity(user(j)), user(to), amount_, std::nullopt, work_seed(),
                                   &work);
      trace_.extra["antispam_evaluations"] += static_cast<double>(work);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::insufficient_balance) return;
      throw;
    }
    const Digest id = block.id();
    if (!transfers_.contains(id)) {
      transfers_.emplace(id, Transfer{id, now, std::nullopt});
      transfer_order_.push_back(id);
    }
    broadcast(node, n.forward_with_vote(std::make_shared<const LatticeBlock>(std::move(block)), now));
  }

  void on_receive(NodeId node, std::uint64_t j, const Digest& send, double now) {
    LatticeNode& n = nodes_[node];
    LatticeBlock block;
    try {
      std::uint64_t work = 0;
      block = lattice::create_receive(n.ledger(), keys_.identity(user(j)), send, work_seed(), &work);
      trace_.extra["antispam_evaluations"] += static_cast<double>(work);
    } catch (const Error& e) {
      // Already received, or the send was rolled back by an election.
      if (e.code() == ErrorCode::duplicate_receive || e.code() == ErrorCode::not_found) return;
      throw;
    }
    broadcast(node, n.forward_with_vote(std::make_shared<const LatticeBlock>(std::move(block)), now));
  }

  // Two sends from one attacker account on the same head, each shown to half
  // of the network first.
  void on_fork(NodeId node, std::uint64_t k, double now) {
    if (users_ < 2) return;
    const auto& ledger = nodes_[node].ledger();
    const auto who = keys_.identity(attacker(k));
    const auto a = std::make_shared<const LatticeBlock>(
        lattice::create_send(ledger, who, user(k % users_), amount_, std::nullopt, work_seed()));
    const auto b = std::make_shared<const LatticeBlock>(
        lattice::create_send(ledger, who, user((k + 1) % users_), amount_, std::nullopt, work_seed()));
    forks_.push_back({a->subject(), now, {a->id(), b->id()}});
    const std::size_t half = nodes_.size() / 2;
    for (NodeId i = 0; i < nodes_.size(); ++i) {
      const auto& block = i < std::max<std::size_t>(half, 1) ? a : b;
      net_.send(node, i, LatticeEvent{LatticeEvent::Kind::message, LatticeMessage{block, {}}, 0, {}});
    }
  }

  void on_applied(NodeId node, const LatticeBlock& block, double now) {
    if (node == observer_) {
      ++trace_.blocks_applied;
      if (const auto* r = std::get_if<lattice::ReceivePayload>(&block.payload)) {
        auto it = transfers_.find(r->source);
        if (it != transfers_.end() && !it->second.settled_at) it->second.settled_at = now;
      }
    }
    const auto* s = std::get_if<lattice::SendPayload>(&block.payload);
    if (s == nullptr) return;
    const auto j = user_index(s->recipient);
    if (!j || *j >= online_ || owner(*j) != node) return;
    net_.command(node, now + cfg_.number("lattice.receive_delay_s"), tick(LatticeEvent::Kind::receive, *j, block.id()));
  }

  void finish(double horizon) {
    const auto& obs = nodes_[observer_].ledger();
    for (const auto& f : forks_) {
      ForkRecord rec;
      rec.subject = f.subject;
      rec.opened_at = f.at;
      std::map<AccountId, lattice::VoteRecord> latest;
      for (const auto& n : nodes_) {
        if (n.ledger().tier() == lattice::NodeTier::light) continue;
        rec.node_choices.push_back(n.ledger().successor(f.subject));
        for (const auto& v : n.votes_on(f.subject)) {
          auto [it, inserted] = latest.emplace(v.representative, v);
          if (!inserted && v.round > it->second.round) it->second = v;
        }
        if (auto e = n.elections().find(f.subject); e != n.elections().end() && e->second.deadlocked)
          rec.deadlocked = true;
      }
      std::vector<lattice::VoteRecord> votes;
      for (const auto& [r, v] : latest) votes.push_back(v);
      const auto outcome = lattice::resolve_fork(f.candidates, votes, obs.total_weight(), obs.params().quorum_fraction);
      rec.majority_choice = outcome.winner;
      trace_.forks.push_back(std::move(rec));
    }

    trace_.final_bytes = measure_ledger_bytes(obs);
    if (obs.tier() == lattice::NodeTier::historical) {
      lattice::Ledger pruned = obs;
      const auto report = lattice::prune_lattice(pruned);
      for (const auto& [id, acct] : obs.accounts())
        if (pruned.balance(id) != acct.balance)
          breach("pruning equivalence", "balance of " + to_string(id) + " differs after pruning");
      bool prunable = false;
      for (const auto& [id, acct] : obs.accounts())
        if (acct.blocks.size() > 1 && std::find(report.skipped.begin(), report.skipped.end(), id) == report.skipped.end())
          prunable = true;
      if (prunable && report.after.total() >= report.before.total())
        breach("pruning equivalence", "pruning did not shrink the ledger");
      trace_.extra["pruned_ledger_bytes"] = static_cast<double>(report.after.total());
    }
    (void)horizon;
  }

  struct InjectedFork {
    Digest subject;
    double at = 0.0;
    std::vector<Digest> candidates;
  };

  const Config& cfg_;
  std::uint64_t seed_;
  Keyring keys_;
  simnet::Network<LatticeEvent> net_;
  NodeId observer_;
  std::uint64_t reps_;
  std::uint64_t users_;
  std::uint64_t online_;
  Tokens amount_;
  std::vector<LatticeNode> nodes_;
  std::vector<Rng> user_rngs_;
  std::uint64_t work_counter_ = 0;
  std::unordered_map<Digest, Transfer> transfers_;
  std::vector<Digest> transfer_order_;
  std::vector<InjectedFork> forks_;
  RunTrace trace_;
};

}  // namespace

RunTrace run_lattice(const Config& config, std::uint64_t seed) {
  config.validate();
  if (!config.is_lattice()) throw Error(ErrorCode::wrong_paradigm, "run_lattice needs a lattice scenario");
  LatticeSim sim(config, seed);
  return sim.run();
}

}  // namespace ledgerlab::metrics
