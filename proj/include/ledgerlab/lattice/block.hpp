#pragma once

#include <cstdint>
#include <variant>

#include "ledgerlab/primitives/encoding.hpp"
#include "ledgerlab/primitives/identity.hpp"

namespace ledgerlab::lattice {

using Tokens = std::uint64_t;

enum class BlockKind : std::uint8_t { genesis, send, receive, change };
std::string_view to_string(BlockKind kind);

struct GenesisPayload {
  Tokens amount = 0;
  AccountId representative{};
  bool operator==(const GenesisPayload&) const = default;
};
struct SendPayload {
  AccountId recipient{};
  Tokens amount = 0;
  bool operator==(const SendPayload&) const = default;
};
struct ReceivePayload {
  Digest source;  // digest of the matched send
  Tokens amount = 0;
  bool operator==(const ReceivePayload&) const = default;
};
struct ChangePayload {
  AccountId representative{};
  bool operator==(const ChangePayload&) const = default;
};

using Payload = std::variant<GenesisPayload, SendPayload, ReceivePayload, ChangePayload>;

/// One action on one account chain.
struct LatticeBlock {
  AccountId account{};
  Digest predecessor;  // zero for an account's first block
  Payload payload;
  std::uint64_t antispam_nonce = 0;
  Signature signature;

  BlockKind kind() const { return static_cast<BlockKind>(payload.index()); }
  /// Digest of the content fields (account, predecessor, payload). The
  /// signature and the anti-spam work are both computed over it.
  Digest id() const;
  /// Key for the slot this block occupies: its predecessor, or an
  /// account-specific marker for an account's first block. Two blocks with
  /// the same subject are a fork.
  Digest subject() const;
  /// Amount moved by a send or receive; the opening balance of a genesis block.
  Tokens amount() const;

  bool operator==(const LatticeBlock&) const = default;
};

void encode(Writer& w, const LatticeBlock& b);
LatticeBlock decode(Reader& r, Tag<LatticeBlock>);

/// Signs `block` in place and solves its anti-spam puzzle.
void finish_block(LatticeBlock& block, const Keyring& keys, const Identity& owner, int spam_bits,
                  std::uint64_t work_seed = 0, std::uint64_t* work_evaluations = nullptr);

}  // namespace ledgerlab::lattice
