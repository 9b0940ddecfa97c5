#include "ledgerlab/lattice/node.hpp"

#include "ledgerlab/errors.hpp"

namespace ledgerlab::lattice {

Digest LatticeMessage::digest() const {
  Writer w;
  w.digest(block ? block->id() : Digest::zero());
  w.list(votes, [](Writer& out, const VoteRecord& v) { encode(out, v); });
  return ledgerlab::digest(w.bytes());
}

LatticeNode::LatticeNode(Ledger ledger, std::optional<Identity> representative, bool stubborn)
    : ledger_(std::move(ledger)), rep_(std::move(representative)), stubborn_(stubborn) {
  for (const auto& [id, chain] : ledger_.accounts()) seen_blocks_.insert(chain.head);
}

std::vector<LatticeMessage> LatticeNode::forward_with_vote(std::shared_ptr<const LatticeBlock> block, double now) {
  return process(std::move(block), now);
}

std::vector<LatticeMessage> LatticeNode::on_message(const LatticeMessage& msg, double now) {
  std::vector<LatticeMessage> out;
  if (msg.block) out = process(msg.block, now);
  if (!msg.votes.empty()) {
    auto more = on_votes(msg.votes, now);
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

std::vector<LatticeMessage> LatticeNode::process(std::shared_ptr<const LatticeBlock> block, double now) {
  if (ledger_.tier() == NodeTier::light) return {};
  const Digest id = block->id();
  if (!seen_blocks_.insert(id).second) return {};

  const auto verdict = ledger_.validate(*block);
  switch (verdict.rule) {
    case LatticeRule::ok:
      return accept(std::move(block), now);
    case LatticeRule::fork_detected:
      return open_election(std::move(block), verdict.dependency, now);
    case LatticeRule::gap_detected:
      park(std::move(block), verdict.dependency);
      return {};
    default:
      return {};
  }
}

std::vector<LatticeMessage> LatticeNode::accept(std::shared_ptr<const LatticeBlock> block, double now) {
  ledger_.apply(*block, now);
  const Digest id = block->id();
  const Digest subject = block->subject();
  cement_queue_.push_back(id);
  if (hooks_.applied) hooks_.applied(*block, now);

  LatticeMessage msg{block, {}};
  if (auto v = vote_for(subject, id, 0)) msg.votes.push_back(*v);
  check_confirmation(subject, now);

  std::vector<LatticeMessage> out{std::move(msg)};
  auto released = release(id, now);
  out.insert(out.end(), released.begin(), released.end());
  return out;
}

std::optional<VoteRecord> LatticeNode::vote_for(const Digest& subject, const Digest& choice, std::uint64_t round) {
  if (!rep_) return std::nullopt;
  auto& mine = votes_[subject];
  if (auto it = mine.find(rep_->id); it != mine.end()) {
    if (it->second.choice == choice) return it->second;
    return std::nullopt;
  }
  const Tokens weight = ledger_.representative_weight(rep_->id);
  if (weight == 0) return std::nullopt;
  auto v = make_vote(ledger_.keys(), *rep_, subject, choice, weight, round);
  seen_votes_.insert(v.signing_digest());
  record_vote(v);
  return v;
}

void LatticeNode::record_vote(const VoteRecord& vote) {
  auto& by_rep = votes_[vote.subject];
  auto it = by_rep.find(vote.representative);
  if (it == by_rep.end())
    by_rep.emplace(vote.representative, vote);
  else if (vote.round > it->second.round)
    it->second = vote;
}

std::vector<LatticeMessage> LatticeNode::open_election(std::shared_ptr<const LatticeBlock> block,
                                                       const Digest& subject, double now) {
  const auto current = ledger_.successor(subject);
  if (!current) return {};
  auto [it, opened] = elections_.try_emplace(subject);
  Election& e = it->second;
  if (opened) {
    e.subject = subject;
    e.account = block->account;
    e.opened_at = now;
    if (const auto* held = ledger_.block(*current)) e.candidates.emplace(*current, std::make_shared<const LatticeBlock>(*held));
    ledger_.mark_disputed(subject, block->account);
  }
  if (e.winner) return {};
  e.candidates.emplace(block->id(), block);

  LatticeMessage msg{block, {}};
  if (auto v = vote_for(subject, *current, 0)) msg.votes.push_back(*v);
  std::vector<LatticeMessage> out{std::move(msg)};
  auto more = evaluate(subject, now);
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

std::vector<LatticeMessage> LatticeNode::on_votes(const std::vector<VoteRecord>& votes, double now) {
  std::vector<VoteRecord> forward;
  std::set<Digest> touched;
  for (const auto& v : votes) {
    if (!seen_votes_.insert(v.signing_digest()).second) continue;
    if (!verify_vote(ledger_.keys(), v)) continue;
    record_vote(v);
    touched.insert(v.subject);
    auto e = elections_.find(v.subject);
    if (e != elections_.end() && !e->second.winner) forward.push_back(v);
  }

  std::vector<LatticeMessage> out;
  if (!forward.empty()) out.push_back(LatticeMessage{nullptr, std::move(forward)});
  for (const auto& subject : touched) {
    auto e = elections_.find(subject);
    if (e != elections_.end() && !e->second.winner) {
      auto more = evaluate(subject, now);
      out.insert(out.end(), more.begin(), more.end());
    }
    check_confirmation(subject, now);
  }
  return out;
}

std::vector<VoteRecord> LatticeNode::votes_on(const Digest& subject) const {
  std::vector<VoteRecord> out;
  if (auto it = votes_.find(subject); it != votes_.end())
    for (const auto& [rep, v] : it->second) out.push_back(v);
  return out;
}

std::vector<LatticeMessage> LatticeNode::evaluate(const Digest& subject, double now) {
  Election& e = elections_.at(subject);
  if (e.winner) return {};
  std::vector<Digest> candidates;
  for (const auto& [id, b] : e.candidates) candidates.push_back(id);
  const auto votes = votes_on(subject);
  const auto outcome = resolve_fork(candidates, votes, ledger_.total_weight(), ledger_.params().quorum_fraction);
  e.deadlocked = outcome.deadlocked;
  if (!outcome.winner) return {};

  e.winner = outcome.winner;
  e.decided_at = now;
  std::vector<LatticeMessage> out;
  const auto current = ledger_.successor(subject);
  if (current != e.winner) {
    if (current) ledger_.rollback(*current);
    auto winner = e.candidates.at(*e.winner);
    const auto verdict = ledger_.validate(*winner);
    if (verdict.accepted())
      out = accept(winner, now);
    else if (verdict.rule == LatticeRule::gap_detected)
      park(winner, verdict.dependency);
  }
  ledger_.clear_dispute(subject, now);
  if (hooks_.decided) hooks_.decided(e);
  return out;
}

void LatticeNode::check_confirmation(const Digest& subject, double now) {
  const auto s = ledger_.successor(subject);
  if (!s || confirmed_.contains(*s)) return;
  auto it = votes_.find(subject);
  if (it == votes_.end()) return;
  Tokens weight = 0;
  for (const auto& [rep, v] : it->second)
    if (v.choice == *s) weight += v.weight;
  if (static_cast<long double>(weight) >
      static_cast<long double>(ledger_.params().quorum_fraction) * ledger_.total_weight()) {
    confirmed_.emplace(*s, now);
    if (hooks_.confirmed) hooks_.confirmed(*s, now);
  }
}

std::optional<double> LatticeNode::confirmed_at(const Digest& block) const {
  auto it = confirmed_.find(block);
  if (it == confirmed_.end()) return std::nullopt;
  return it->second;
}

std::vector<LatticeMessage> LatticeNode::revote(double now) {
  if (!rep_ || stubborn_) return {};
  std::vector<LatticeMessage> out;
  std::vector<Digest> subjects;
  for (const auto& [subject, e] : elections_)
    if (!e.winner) subjects.push_back(subject);

  for (const auto& subject : subjects) {
    Election& e = elections_.at(subject);
    std::vector<Digest> candidates;
    for (const auto& [id, b] : e.candidates) candidates.push_back(id);
    const auto outcome =
        resolve_fork(candidates, votes_on(subject), ledger_.total_weight(), ledger_.params().quorum_fraction);
    const auto leader = plurality_leader(outcome);
    if (!leader) continue;
    auto& mine = votes_[subject];
    auto current = mine.find(rep_->id);
    if (current != mine.end() && current->second.choice == *leader) continue;
    const std::uint64_t round = current == mine.end() ? 0 : current->second.round + 1;
    auto v = make_vote(ledger_.keys(), *rep_, subject, *leader, ledger_.representative_weight(rep_->id), round);
    seen_votes_.insert(v.signing_digest());
    record_vote(v);
    out.push_back(LatticeMessage{nullptr, {v}});
    auto more = evaluate(subject, now);
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

std::size_t LatticeNode::cement_pass(double now) {
  if (!ledger_.params().cementing_enabled()) return 0;
  std::size_t cemented = 0;
  std::deque<Digest> waiting;
  while (!cement_queue_.empty()) {
    const Digest id = cement_queue_.front();
    if (ledger_.block(id) == nullptr && !ledger_.cemented(id)) {
      cement_queue_.pop_front();
      continue;
    }
    if (now - ledger_.accepted_at(id) < ledger_.params().cement_delay_s) break;
    cement_queue_.pop_front();
    if (ledger_.cement(id, now))
      ++cemented;
    else
      waiting.push_back(id);
  }
  cement_queue_.insert(cement_queue_.begin(), waiting.begin(), waiting.end());
  return cemented;
}

void LatticeNode::park(std::shared_ptr<const LatticeBlock> block, const Digest& dependency) {
  const Digest id = block->id();
  if (parked_.contains(id)) return;
  const std::size_t capacity = ledger_.params().gap_buffer;
  if (capacity == 0) return;
  while (parked_.size() >= capacity && !park_order_.empty()) {
    const Digest evict = park_order_.front();
    park_order_.pop_front();
    auto it = parked_.find(evict);
    if (it == parked_.end()) continue;
    auto range = parked_by_dependency_.equal_range(it->second.dependency);
    for (auto r = range.first; r != range.second; ++r)
      if (r->second == evict) {
        parked_by_dependency_.erase(r);
        break;
      }
    parked_.erase(it);
    seen_blocks_.erase(evict);
  }
  parked_.emplace(id, Parked{dependency, std::move(block)});
  parked_by_dependency_.emplace(dependency, id);
  park_order_.push_back(id);
}

std::vector<LatticeMessage> LatticeNode::release(const Digest& dependency, double now) {
  std::vector<LatticeMessage> out;
  auto range = parked_by_dependency_.equal_range(dependency);
  std::vector<Digest> ready;
  for (auto it = range.first; it != range.second; ++it) ready.push_back(it->second);
  parked_by_dependency_.erase(dependency);

  for (const auto& id : ready) {
    auto it = parked_.find(id);
    if (it == parked_.end()) continue;
    auto block = std::move(it->second.block);
    parked_.erase(it);
    seen_blocks_.erase(id);
    auto more = process(std::move(block), now);
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

}  // namespace ledgerlab::lattice
