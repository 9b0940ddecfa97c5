#pragma once

#include <atomic>
#include <cstdint>

#include "ledgerlab/primitives/encoding.hpp"
#include "ledgerlab/primitives/identity.hpp"

namespace ledgerlab::chain {

using Tokens = std::uint64_t;

/// Account-model transfer. Immutable after construction; both digests are
/// computed once from the fields.
class Transaction {
 public:
  struct Fields {
    AccountId sender{};
    AccountId recipient{};
    Tokens amount = 0;
    std::uint64_t sequence = 0;
    std::uint64_t weight = 0;
  };

  /// Throws Error(invalid_amount) for a zero amount or zero weight.
  Transaction(const Fields& fields, const Signature& signature);

  static Transaction make(const Keyring& keys, const Identity& sender, AccountId recipient, Tokens amount,
                          std::uint64_t sequence, std::uint64_t weight);

  /// Digest over the canonical encoding without the signature.
  static Digest signing_digest(const Fields& fields);

  const Fields& fields() const { return fields_; }
  AccountId sender() const { return fields_.sender; }
  AccountId recipient() const { return fields_.recipient; }
  Tokens amount() const { return fields_.amount; }
  std::uint64_t sequence() const { return fields_.sequence; }
  std::uint64_t weight() const { return fields_.weight; }
  const Signature& signature() const { return signature_; }

  const Digest& signing_digest() const { return signing_digest_; }
  /// Digest of the full encoding; the Merkle leaf for this transaction.
  const Digest& id() const { return id_; }

  Transaction(const Transaction& o);
  Transaction& operator=(const Transaction& o);

  /// Signature check under `keys`. A success is remembered per keyring seed,
  /// so a transaction relayed to many nodes is only hashed once.
  bool verify(const Keyring& keys) const;

  bool operator==(const Transaction& o) const { return id_ == o.id_; }

 private:
  Transaction(const Fields& fields, const Signature& signature, const Digest& signing);

  Fields fields_;
  Signature signature_;
  Digest signing_digest_;
  Digest id_;
  // Keyring seed + 1 of a successful verify; 0 when none.
  mutable std::atomic<std::uint64_t> verified_under_{0};
};

void encode(Writer& w, const Transaction::Fields& f);
void encode(Writer& w, const Transaction& tx);
Transaction decode(Reader& r, Tag<Transaction>);

}  // namespace ledgerlab::chain
