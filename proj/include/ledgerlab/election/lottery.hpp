#pragma once

#include <cstdint>
#include <map>

#include "ledgerlab/primitives/identity.hpp"

namespace ledgerlab::election {

/// Picks a miner with probability proportional to its hash rate. The draw is
/// a pure function of (seed, round). Throws Error(no_leader) when every rate
/// is zero.
AccountId lottery_next_leader(const std::map<AccountId, double>& hash_powers, std::uint64_t rng_seed,
                              std::uint64_t round);

}  // namespace ledgerlab::election
