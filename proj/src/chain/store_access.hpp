#pragma once

#include "ledgerlab/chain/store.hpp"

namespace ledgerlab::chain {

// Mutation hooks for the operations in ops.cpp.
struct StoreAccess {
  static auto& blocks(ChainStore& s) { return s.blocks_; }
  static auto& deltas(ChainStore& s) { return s.deltas_; }
  static auto& tx_index(ChainStore& s) { return s.tx_index_; }
  static auto& unindexed(ChainStore& s) { return s.unindexed_; }
  static auto& tips(ChainStore& s) { return s.tips_; }
  static auto& main_chain(ChainStore& s) { return s.main_chain_; }
  static auto& head_state(ChainStore& s) { return s.head_state_; }
  static auto& first_full_height(ChainStore& s) { return s.first_full_height_; }
  static std::uint64_t next_arrival(ChainStore& s) { return s.arrivals_++; }
};

}  // namespace ledgerlab::chain
