#include "ledgerlab/chain/transaction.hpp"

namespace ledgerlab::chain {

Transaction::Transaction(const Fields& fields, const Signature& signature)
    : Transaction(fields, signature, signing_digest(fields)) {}

Transaction::Transaction(const Fields& fields, const Signature& signature, const Digest& signing)
    : fields_(fields), signature_(signature), signing_digest_(signing) {
  if (fields_.amount == 0) throw Error(ErrorCode::invalid_amount, "transaction amount must be positive");
  if (fields_.weight == 0) throw Error(ErrorCode::invalid_amount, "transaction weight must be positive");
  Writer w;
  encode(w, *this);
  id_ = digest(w.bytes());
}

Transaction::Transaction(const Transaction& o)
    : fields_(o.fields_),
      signature_(o.signature_),
      signing_digest_(o.signing_digest_),
      id_(o.id_),
      verified_under_(o.verified_under_.load(std::memory_order_relaxed)) {}

Transaction& Transaction::operator=(const Transaction& o) {
  fields_ = o.fields_;
  signature_ = o.signature_;
  signing_digest_ = o.signing_digest_;
  id_ = o.id_;
  verified_under_.store(o.verified_under_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  return *this;
}

bool Transaction::verify(const Keyring& keys) const {
  const std::uint64_t mark = keys.seed() + 1;
  if (mark != 0 && verified_under_.load(std::memory_order_relaxed) == mark) return true;
  if (!keys.verify(signature_, fields_.sender, signing_digest_)) return false;
  verified_under_.store(mark, std::memory_order_relaxed);
  return true;
}

Transaction Transaction::make(const Keyring& keys, const Identity& sender, AccountId recipient, Tokens amount,
                              std::uint64_t sequence, std::uint64_t weight) {
  Fields f{sender.id, recipient, amount, sequence, weight};
  const Digest signing = signing_digest(f);
  return Transaction(f, keys.sign(sender, signing), signing);
}

Digest Transaction::signing_digest(const Fields& fields) {
  Writer w;
  encode(w, fields);
  return digest(w.bytes());
}

void encode(Writer& w, const Transaction::Fields& f) {
  w.u64(raw(f.sender));
  w.u64(raw(f.recipient));
  w.u64(f.amount);
  w.u64(f.sequence);
  w.u64(f.weight);
}

void encode(Writer& w, const Transaction& tx) {
  encode(w, tx.fields());
  encode(w, tx.signature());
}

Transaction decode(Reader& r, Tag<Transaction>) {
  Transaction::Fields f;
  f.sender = AccountId{r.u64()};
  f.recipient = AccountId{r.u64()};
  f.amount = r.u64();
  f.sequence = r.u64();
  f.weight = r.u64();
  const auto sig = decode(r, Tag<Signature>{});
  try {
    return Transaction(f, sig);
  } catch (const Error& e) {
    throw Error(ErrorCode::encoding, e.what());
  }
}

}  // namespace ledgerlab::chain
