#pragma once

// Shared fixtures and statistics helpers for the unit tests.

#include <cmath>
#include <map>
#include <vector>

#include "ledgerlab/chain/ops.hpp"
#include "ledgerlab/primitives/rng.hpp"

namespace testing {

using namespace ledgerlab;

inline AccountId acct(std::uint64_t n) { return AccountId{n}; }

inline Digest random_digest(Rng& rng) {
  Digest d;
  for (auto& b : d.bytes) b = static_cast<std::uint8_t>(rng.next());
  return d;
}

/// Pearson statistic of observed counts against expected probabilities.
template <typename K>
double chi_square(const std::map<K, std::uint64_t>& observed, const std::map<K, double>& probability,
                  std::uint64_t draws) {
  double stat = 0.0;
  for (const auto& [k, p] : probability) {
    const double expected = p * static_cast<double>(draws);
    const auto it = observed.find(k);
    const double o = it == observed.end() ? 0.0 : static_cast<double>(it->second);
    stat += (o - expected) * (o - expected) / expected;
  }
  return stat;
}

/// Upper 0.001 critical values of chi-square for 1..5 degrees of freedom.
inline double chi_square_critical_001(int dof) {
  static const double table[] = {10.828, 13.816, 16.266, 18.467, 20.515};
  return table[dof - 1];
}

/// Lottery-mode chain with funded accounts 1..accounts and producers that
/// take the block reward.
struct ChainFixture {
  Keyring keys{7};
  chain::ChainStore store;

  explicit ChainFixture(std::size_t accounts = 4, chain::Tokens each = 1000,
                        chain::ChainParams params = {})
      : store(with_allocation(std::move(params), accounts, each), Keyring{7}) {}

  static chain::ChainParams with_allocation(chain::ChainParams p, std::size_t accounts, chain::Tokens each) {
    for (std::size_t i = 1; i <= accounts; ++i) p.genesis_allocation.emplace_back(acct(i), each);
    return p;
  }

  chain::Transaction tx(std::uint64_t from, std::uint64_t to, chain::Tokens amount, std::uint64_t seq,
                        std::uint64_t weight = 250) const {
    return chain::Transaction::make(keys, keys.identity(acct(from)), acct(to), amount, seq, weight);
  }

  chain::Block child(const Digest& parent, std::vector<chain::Transaction> mempool = {},
                     std::uint64_t producer = 100) const {
    const auto* p = store.find(parent);
    const std::uint64_t ts = p == nullptr ? 0 : p->header.timestamp_ms + 600'000;
    auto b = chain::assemble_block(store, mempool, parent, store.params().capacity_units, acct(producer), ts);
    return chain::seal_block(std::move(b), keys, keys.identity(acct(producer)));
  }

  /// Extends `parent` with `n` empty blocks; returns the new tip.
  Digest extend(Digest parent, std::size_t n, std::uint64_t producer = 100) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto b = child(parent, {}, producer);
      chain::adopt(store, b);
      parent = b.id();
    }
    return parent;
  }
};

}  // namespace testing
