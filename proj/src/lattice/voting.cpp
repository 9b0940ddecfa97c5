#include "ledgerlab/lattice/voting.hpp"

#include <algorithm>
#include <set>

#include "ledgerlab/errors.hpp"

namespace ledgerlab::lattice {

void encode(Writer& w, const VoteRecord& v) {
  w.u64(raw(v.representative));
  w.digest(v.subject);
  w.digest(v.choice);
  w.u64(v.weight);
  w.u64(v.round);
  encode(w, v.signature);
}

VoteRecord decode(Reader& r, Tag<VoteRecord>) {
  VoteRecord v;
  v.representative = AccountId{r.u64()};
  v.subject = r.digest();
  v.choice = r.digest();
  v.weight = r.u64();
  v.round = r.u64();
  v.signature = decode(r, Tag<Signature>{});
  return v;
}

Digest VoteRecord::signing_digest() const {
  Writer w;
  w.u64(raw(representative));
  w.digest(subject);
  w.digest(choice);
  w.u64(weight);
  w.u64(round);
  return digest(w.bytes());
}

VoteRecord make_vote(const Keyring& keys, const Identity& rep, const Digest& subject, const Digest& choice,
                     Tokens weight, std::uint64_t round) {
  VoteRecord v{rep.id, subject, choice, weight, round, {}};
  v.signature = keys.sign(rep, v.signing_digest());
  return v;
}

bool verify_vote(const Keyring& keys, const VoteRecord& vote) {
  return keys.verify(vote.signature, vote.representative, vote.signing_digest());
}

ForkOutcome resolve_fork(std::span<const Digest> candidates, std::span<const VoteRecord> votes, Tokens total_weight,
                         double quorum_fraction) {
  const std::set<Digest> allowed(candidates.begin(), candidates.end());
  if (allowed.size() < 2) throw Error(ErrorCode::config, "a fork needs at least two conflicting blocks");

  std::map<AccountId, const VoteRecord*> latest;
  for (const auto& v : votes) {
    if (!allowed.contains(v.choice)) continue;
    auto [it, inserted] = latest.try_emplace(v.representative, &v);
    if (!inserted && v.round > it->second->round) it->second = &v;
  }

  ForkOutcome out;
  for (const auto& c : allowed) out.tally[c] = 0;
  Tokens cast = 0;
  for (const auto& [rep, v] : latest) {
    out.tally[v->choice] += v->weight;
    cast += v->weight;
  }

  Tokens best = 0, second = 0;
  const Digest* best_choice = nullptr;
  for (const auto& [choice, weight] : out.tally) {
    if (weight > best) {
      second = best;
      best = weight;
      best_choice = &choice;
    } else if (weight > second) {
      second = weight;
    }
  }
  out.tied = best > 0 && best == second;
  out.deadlocked = out.tied && cast >= total_weight;
  if (best_choice != nullptr && best > second &&
      static_cast<long double>(best) > static_cast<long double>(quorum_fraction) * total_weight)
    out.winner = *best_choice;
  return out;
}

std::optional<Digest> plurality_leader(const ForkOutcome& outcome) {
  Tokens best = 0;
  std::optional<Digest> leader;
  bool unique = false;
  for (const auto& [choice, weight] : outcome.tally) {
    if (weight > best) {
      best = weight;
      leader = choice;
      unique = true;
    } else if (weight == best && best > 0) {
      unique = false;
    }
  }
  return unique ? leader : std::nullopt;
}

}  // namespace ledgerlab::lattice
