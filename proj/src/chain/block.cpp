#include "ledgerlab/chain/block.hpp"

#include "ledgerlab/primitives/merkle.hpp"

namespace ledgerlab::chain {

void encode(Writer& w, const BlockHeader& h) {
  w.digest(h.predecessor);
  w.digest(h.tx_root);
  w.digest(h.state_root);
  w.u64(h.height);
  w.u64(h.timestamp_ms);
  w.u64(h.nonce);
  w.u64(raw(h.producer));
}

BlockHeader decode(Reader& r, Tag<BlockHeader>) {
  BlockHeader h;
  h.predecessor = r.digest();
  h.tx_root = r.digest();
  h.state_root = r.digest();
  h.height = r.u64();
  h.timestamp_ms = r.u64();
  h.nonce = r.u64();
  h.producer = AccountId{r.u64()};
  return h;
}

Digest BlockHeader::id() const { return digest_of(*this); }

Digest BlockHeader::work_payload() const {
  BlockHeader copy = *this;
  copy.nonce = 0;
  return copy.id();
}

std::uint64_t Block::total_weight() const {
  std::uint64_t total = 0;
  for (const auto& tx : transactions) total += tx.weight();
  return total;
}

std::vector<Digest> Block::tx_ids() const {
  std::vector<Digest> ids;
  ids.reserve(transactions.size());
  for (const auto& tx : transactions) ids.push_back(tx.id());
  return ids;
}

void encode(Writer& w, const Block& b) {
  encode(w, b.header);
  w.list(b.transactions, [](Writer& out, const Transaction& tx) { encode(out, tx); });
  encode(w, b.seal);
}

Block decode(Reader& r, Tag<Block>) {
  Block b;
  b.header = decode(r, Tag<BlockHeader>{});
  b.transactions = r.list<Transaction>([](Reader& in) { return decode(in, Tag<Transaction>{}); });
  b.seal = decode(r, Tag<Signature>{});
  return b;
}

std::size_t body_bytes(const Block& b) {
  Writer w;
  w.list(b.transactions, [](Writer& out, const Transaction& tx) { encode(out, tx); });
  return w.size();
}

Block seal_block(Block block, const Keyring& keys, const Identity& producer) {
  block.header.producer = producer.id;
  block.seal = keys.sign(producer, block.header.id());
  return block;
}

}  // namespace ledgerlab::chain
