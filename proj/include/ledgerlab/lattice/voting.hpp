#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>

#include "ledgerlab/lattice/block.hpp"

namespace ledgerlab::lattice {

/// A representative's endorsement of `choice` as the successor of `subject`.
/// A higher round supersedes the same representative's earlier vote on the
/// subject, so at most one choice per (representative, subject) counts.
struct VoteRecord {
  AccountId representative{};
  Digest subject;
  Digest choice;
  Tokens weight = 0;
  std::uint64_t round = 0;
  Signature signature;

  Digest signing_digest() const;
  bool operator==(const VoteRecord&) const = default;
};

void encode(Writer& w, const VoteRecord& v);
VoteRecord decode(Reader& r, Tag<VoteRecord>);

VoteRecord make_vote(const Keyring& keys, const Identity& rep, const Digest& subject, const Digest& choice,
                     Tokens weight, std::uint64_t round = 0);
bool verify_vote(const Keyring& keys, const VoteRecord& vote);

struct ForkOutcome {
  std::optional<Digest> winner;
  /// Weight per candidate, counting each representative's latest vote once.
  std::map<Digest, Tokens> tally;
  /// Two or more candidates share the top weight.
  bool tied = false;
  /// Tied with every unit of weight already cast: no further vote can decide.
  bool deadlocked = false;

  bool decided() const { return winner.has_value(); }
};

/// Winner is the candidate whose tallied weight is strictly greatest and
/// strictly above quorum_fraction of total_weight; otherwise undecided.
/// Votes for blocks outside `candidates` are ignored. Throws Error(config)
/// for fewer than two candidates.
ForkOutcome resolve_fork(std::span<const Digest> candidates, std::span<const VoteRecord> votes, Tokens total_weight,
                         double quorum_fraction = 0.5);

/// Candidate with strictly greatest tallied weight, if any.
std::optional<Digest> plurality_leader(const ForkOutcome& outcome);

}  // namespace ledgerlab::lattice
