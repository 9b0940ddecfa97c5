#pragma once

#include <cstdint>
#include <vector>

#include "ledgerlab/chain/transaction.hpp"
#include "ledgerlab/primitives/digest.hpp"

namespace ledgerlab::chain {

struct BlockHeader {
  Digest predecessor;  // zero for genesis
  Digest tx_root;
  Digest state_root;
  std::uint64_t height = 0;
  std::uint64_t timestamp_ms = 0;
  std::uint64_t nonce = 0;
  AccountId producer{};

  bool is_genesis() const { return height == 0 && predecessor.is_zero(); }
  Digest id() const;
  /// Header digest with the nonce zeroed: the payload the puzzle is solved over.
  Digest work_payload() const;

  bool operator==(const BlockHeader&) const = default;
};

void encode(Writer& w, const BlockHeader& h);
BlockHeader decode(Reader& r, Tag<BlockHeader>);

struct Block {
  BlockHeader header;
  std::vector<Transaction> transactions;
  /// Producer's signature over header.id().
  Signature seal;

  Digest id() const { return header.id(); }
  std::uint64_t total_weight() const;
  std::vector<Digest> tx_ids() const;
};

void encode(Writer& w, const Block& b);
Block decode(Reader& r, Tag<Block>);

/// Encoding of just the transaction list, used for body byte accounting.
std::size_t body_bytes(const Block& b);

Block seal_block(Block block, const Keyring& keys, const Identity& producer);

}  // namespace ledgerlab::chain
