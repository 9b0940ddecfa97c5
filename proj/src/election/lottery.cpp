#include "ledgerlab/election/lottery.hpp"

#include "ledgerlab/errors.hpp"
#include "ledgerlab/primitives/rng.hpp"

namespace ledgerlab::election {

AccountId lottery_next_leader(const std::map<AccountId, double>& hash_powers, std::uint64_t rng_seed,
                              std::uint64_t round) {
  double total = 0.0;
  for (const auto& [id, rate] : hash_powers)
    if (rate > 0.0) total += rate;
  if (!(total > 0.0)) throw Error(ErrorCode::no_leader, "no miner has positive hash rate");

  Rng rng(derive_seed(rng_seed, {0x6c6f74, round}));
  double point = rng.uniform() * total;
  AccountId last{};
  for (const auto& [id, rate] : hash_powers) {
    if (rate <= 0.0) continue;
    last = id;
    if (point < rate) return id;
    point -= rate;
  }
  return last;  // rounding residue lands on the final positive miner
}

}  // namespace ledgerlab::election
