#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ledgerlab/lattice/ledger.hpp"
#include "ledgerlab/lattice/voting.hpp"

namespace ledgerlab::lattice {

/// What travels between lattice nodes: a block with the forwarding
/// representative's vote attached, or a bare set of votes.
struct LatticeMessage {
  std::shared_ptr<const LatticeBlock> block;
  std::vector<VoteRecord> votes;

  Digest digest() const;
};

struct Election {
  Digest subject;
  AccountId account{};
  std::map<Digest, std::shared_ptr<const LatticeBlock>> candidates;
  double opened_at = 0.0;
  std::optional<Digest> winner;
  double decided_at = 0.0;
  bool deadlocked = false;
};

struct NodeHooks {
  std::function<void(const LatticeBlock&, double)> applied;
  std::function<void(const Election&)> decided;
  std::function<void(const Digest& block, double)> confirmed;
};

/// Protocol logic of one lattice node, independent of the transport. Every
/// entry point returns the messages the node wants broadcast.
class LatticeNode {
 public:
  LatticeNode(Ledger ledger, std::optional<Identity> representative = std::nullopt, bool stubborn = false);

  const Ledger& ledger() const { return ledger_; }
  Ledger& ledger() { return ledger_; }
  bool is_representative() const { return rep_.has_value(); }
  NodeHooks& hooks() { return hooks_; }

  /// First sight of a valid block: apply it and rebroadcast, with this
  /// node's vote attached when it is a representative. Seen blocks are
  /// ignored, invalid ones dropped, conflicting ones open an election and
  /// blocks with a missing dependency are parked.
  std::vector<LatticeMessage> forward_with_vote(std::shared_ptr<const LatticeBlock> block, double now);

  std::vector<LatticeMessage> on_message(const LatticeMessage& msg, double now);
  std::vector<LatticeMessage> on_votes(const std::vector<VoteRecord>& votes, double now);

  /// Honest representatives move their vote to a strict plurality leader in
  /// elections that have not reached quorum. Stubborn ones never do.
  std::vector<LatticeMessage> revote(double now);

  /// Cements every eligible block; returns how many were newly cemented.
  std::size_t cement_pass(double now);

  const std::map<Digest, Election>& elections() const { return elections_; }
  std::size_t parked() const { return parked_.size(); }
  std::optional<double> confirmed_at(const Digest& block) const;
  /// Latest vote per representative on `subject`.
  std::vector<VoteRecord> votes_on(const Digest& subject) const;

 private:
  struct Parked {
    Digest dependency;
    std::shared_ptr<const LatticeBlock> block;
  };

  std::vector<LatticeMessage> process(std::shared_ptr<const LatticeBlock> block, double now);
  std::vector<LatticeMessage> accept(std::shared_ptr<const LatticeBlock> block, double now);
  std::vector<LatticeMessage> open_election(std::shared_ptr<const LatticeBlock> block, const Digest& subject,
                                            double now);
  void record_vote(const VoteRecord& vote);
  std::vector<LatticeMessage> evaluate(const Digest& subject, double now);
  void check_confirmation(const Digest& subject, double now);
  std::optional<VoteRecord> vote_for(const Digest& subject, const Digest& choice, std::uint64_t round);
  void park(std::shared_ptr<const LatticeBlock> block, const Digest& dependency);
  std::vector<LatticeMessage> release(const Digest& dependency, double now);

  Ledger ledger_;
  std::optional<Identity> rep_;
  bool stubborn_;
  NodeHooks hooks_;

  std::unordered_set<Digest> seen_blocks_;
  std::unordered_set<Digest> seen_votes_;
  std::unordered_map<Digest, std::map<AccountId, VoteRecord>> votes_;
  std::map<Digest, Election> elections_;
  std::unordered_map<Digest, double> confirmed_;

  std::deque<Digest> park_order_;
  std::unordered_map<Digest, Parked> parked_;
  std::unordered_multimap<Digest, Digest> parked_by_dependency_;

  std::deque<Digest> cement_queue_;
};

}  // namespace ledgerlab::lattice
