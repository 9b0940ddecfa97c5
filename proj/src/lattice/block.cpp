#include "ledgerlab/lattice/block.hpp"

#include "ledgerlab/election/pow.hpp"

namespace ledgerlab::lattice {

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::genesis: return "genesis";
    case BlockKind::send: return "send";
    case BlockKind::receive: return "receive";
    case BlockKind::change: return "change";
  }
  return "unknown";
}

namespace {

void encode_content(Writer& w, const LatticeBlock& b) {
  w.u64(raw(b.account));
  w.digest(b.predecessor);
  w.u8(static_cast<std::uint8_t>(b.payload.index()));
  std::visit(
      [&w](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GenesisPayload>) {
          w.u64(p.amount);
          w.u64(raw(p.representative));
        } else if constexpr (std::is_same_v<P, SendPayload>) {
          w.u64(raw(p.recipient));
          w.u64(p.amount);
        } else if constexpr (std::is_same_v<P, ReceivePayload>) {
          w.digest(p.source);
          w.u64(p.amount);
        } else {
          w.u64(raw(p.representative));
        }
      },
      b.payload);
}

}  // namespace

Digest LatticeBlock::id() const {
  Writer w;
  encode_content(w, *this);
  return digest(w.bytes());
}

Digest LatticeBlock::subject() const {
  if (!predecessor.is_zero()) return predecessor;
  Writer w;
  w.str("open");
  w.u64(raw(account));
  return digest(w.bytes());
}

Tokens LatticeBlock::amount() const {
  return std::visit(
      [](const auto& p) -> Tokens {
        if constexpr (requires { p.amount; })
          return p.amount;
        else
          return 0;
      },
      payload);
}

void encode(Writer& w, const LatticeBlock& b) {
  encode_content(w, b);
  w.u64(b.antispam_nonce);
  encode(w, b.signature);
}

LatticeBlock decode(Reader& r, Tag<LatticeBlock>) {
  LatticeBlock b;
  b.account = AccountId{r.u64()};
  b.predecessor = r.digest();
  switch (r.discriminant<BlockKind>(4)) {
    case BlockKind::genesis: {
      GenesisPayload p;
      p.amount = r.u64();
      p.representative = AccountId{r.u64()};
      b.payload = p;
      break;
    }
    case BlockKind::send: {
      SendPayload p;
      p.recipient = AccountId{r.u64()};
      p.amount = r.u64();
      b.payload = p;
      break;
    }
    case BlockKind::receive: {
      ReceivePayload p;
      p.source = r.digest();
      p.amount = r.u64();
      b.payload = p;
      break;
    }
    case BlockKind::change: {
      ChangePayload p;
      p.representative = AccountId{r.u64()};
      b.payload = p;
      break;
    }
  }
  b.antispam_nonce = r.u64();
  b.signature = decode(r, Tag<Signature>{});
  return b;
}

void finish_block(LatticeBlock& block, const Keyring& keys, const Identity& owner, int spam_bits,
                  std::uint64_t work_seed, std::uint64_t* work_evaluations) {
  const Digest id = block.id();
  election::WorkCounter counter;
  block.antispam_nonce = election::antispam_pow(id, spam_bits, work_seed, {.counter = &counter});
  if (work_evaluations != nullptr) *work_evaluations += counter.evaluations;
  block.signature = keys.sign(owner, id);
}

}  // namespace ledgerlab::lattice
