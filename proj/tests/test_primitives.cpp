#include <doctest.h>

#include "ledgerlab/chain/block.hpp"
#include "ledgerlab/chain/state.hpp"
#include "ledgerlab/lattice/block.hpp"
#include "ledgerlab/lattice/voting.hpp"
#include "ledgerlab/primitives/merkle.hpp"
#include "support.hpp"

using namespace ledgerlab;
using testing::acct;
using testing::random_digest;

namespace {

Bytes concat(const Digest& a, const Digest& b) {
  Bytes out(a.bytes.begin(), a.bytes.end());
  out.append(b.bytes.begin(), b.bytes.end());
  return out;
}

// Level-by-level oracle over raw byte concatenation. Leaves enter the first
// level as-is; only a lone leaf is hashed on its own.
Digest merkle_oracle(const std::vector<Digest>& leaves) {
  if (leaves.empty()) return digest(Bytes{});
  if (leaves.size() == 1) return digest(ByteView(leaves[0].bytes));
  std::vector<Digest> level = leaves;
  while (level.size() > 1) {
    std::vector<Digest> up;
    for (std::size_t i = 0; i < level.size(); i += 2) {
      if (i + 1 == level.size()) up.push_back(level[i]);
      else up.push_back(digest(concat(level[i], level[i + 1])));
    }
    level = up;
  }
  return level[0];
}

Signature random_signature(Rng& rng) {
  return {acct(rng.below(1000)), random_digest(rng), random_digest(rng)};
}

lattice::LatticeBlock random_lattice_block(Rng& rng) {
  lattice::LatticeBlock b;
  b.account = acct(rng.below(50));
  b.predecessor = rng.bernoulli(0.2) ? Digest::zero() : random_digest(rng);
  switch (rng.below(4)) {
    case 0: b.payload = lattice::GenesisPayload{rng.next(), acct(rng.below(9))}; break;
    case 1: b.payload = lattice::SendPayload{acct(rng.below(9)), rng.next()}; break;
    case 2: b.payload = lattice::ReceivePayload{random_digest(rng), rng.next()}; break;
    default: b.payload = lattice::ChangePayload{acct(rng.below(9))}; break;
  }
  b.antispam_nonce = rng.next();
  b.signature = random_signature(rng);
  return b;
}

template <typename T>
void check_round_trip(const T& value) {
  const Bytes bytes = canonical_encode(value);
  const T back = canonical_decode<T>(bytes);
  CHECK(canonical_encode(back) == bytes);
}

}  // namespace

TEST_CASE("digest of the empty input is the SHA-256 constant") {
  CHECK(digest(Bytes{}).hex() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(kDigestAlgorithm == "SHA-256");
  CHECK(digest("abc") == digest("abc"));
}

TEST_CASE("a single flipped bit changes the digest") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    Bytes x(1 + rng.below(64), 0);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng.next());
    const Digest before = digest(x);
    x[rng.below(x.size())] ^= static_cast<std::uint8_t>(1u << rng.below(8));
    REQUIRE(digest(x) != before);
  }
}

TEST_CASE("leading zero bits") {
  Digest d;
  CHECK(leading_zero_bits(d) == 256);
  d.bytes[0] = 0x80;
  CHECK(leading_zero_bits(d) == 0);
  d.bytes[0] = 0x00;
  d.bytes[1] = 0x10;
  CHECK(leading_zero_bits(d) == 11);
}

TEST_CASE("hex round trip") {
  Rng rng(2);
  const Digest d = random_digest(rng);
  CHECK(Digest::from_hex(d.hex()) == d);
  CHECK_THROWS_AS(Digest::from_hex("abc"), Error);
}

TEST_CASE("merkle degenerate cases") {
  Rng rng(3);
  CHECK(merkle_root({}) == digest(Bytes{}));
  CHECK(empty_merkle_root() == digest(Bytes{}));
  const Digest h1 = random_digest(rng);
  const std::vector<Digest> one{h1};
  CHECK(merkle_root(one) == digest(ByteView(h1.bytes)));
}

TEST_CASE("merkle root of four leaves pairs adjacent leaves") {
  Rng rng(4);
  std::vector<Digest> h(4);
  for (auto& d : h) d = random_digest(rng);
  const Digest expected = digest(concat(digest(concat(h[0], h[1])), digest(concat(h[2], h[3]))));
  CHECK(merkle_root(h) == expected);
  CHECK(MerkleTree(h).root() == expected);
}

TEST_CASE("merkle root matches the pairing oracle for every size up to 40") {
  Rng rng(5);
  for (std::size_t n = 0; n <= 40; ++n) {
    std::vector<Digest> leaves(n);
    for (auto& d : leaves) d = random_digest(rng);
    REQUIRE(merkle_root(leaves) == merkle_oracle(leaves));
  }
}

TEST_CASE("property: changing any leaf changes the root") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Digest> leaves(1 + rng.below(256));
    for (auto& d : leaves) d = random_digest(rng);
    const Digest root = merkle_root(leaves);
    auto changed = leaves;
    changed[rng.below(changed.size())].bytes[rng.below(32)] ^= 1;
    REQUIRE(merkle_root(changed) != root);
  }
}

TEST_CASE("signatures verify only under their producer") {
  Keyring keys(11);
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const AccountId a = acct(rng.below(1000));
    AccountId b = acct(rng.below(1000));
    if (b == a) b = acct(raw(a) + 1);
    const Digest payload = random_digest(rng);
    const Signature sig = keys.sign(keys.identity(a), payload);
    REQUIRE(keys.verify(sig, a, payload));
    REQUIRE_FALSE(keys.verify(sig, b, payload));
    // Relabelling the signer does not help a forger either.
    Signature forged = sig;
    forged.signer = b;
    REQUIRE_FALSE(keys.verify(forged, b, payload));
    REQUIRE_FALSE(keys.verify(sig, a, random_digest(rng)));
  }
  // A different key seed is a different scenario universe.
  const Digest p = digest("x");
  CHECK_FALSE(Keyring(12).verify(keys.sign(keys.identity(acct(1)), p), acct(1), p));
}

TEST_CASE("encoding widths are fixed") {
  Writer w;
  w.u64(1);
  w.u32(2);
  w.u8(3);
  w.digest(Digest{});
  w.str("ab");
  CHECK(w.size() == 8 + 4 + 1 + 32 + 4 + 2);
  const Bytes& b = w.bytes();
  CHECK(b[7] == 1);
  CHECK(b[0] == 0);
  CHECK(b[11] == 2);
}

TEST_CASE("a send block encodes to the sum of its field widths") {
  lattice::LatticeBlock b;
  b.account = acct(1);
  b.payload = lattice::SendPayload{acct(2), 10};
  // account, predecessor, kind tag, recipient + amount, nonce,
  // signature (signer, payload digest, tag)
  const std::size_t widths = 8 + 32 + 1 + (8 + 8) + 8 + (8 + 32 + 32);
  CHECK(encoded_size(b) == widths);
  CHECK(widths == 137);

  lattice::LatticeBlock change = b;
  change.payload = lattice::ChangePayload{acct(3)};
  CHECK(encoded_size(change) == 8 + 32 + 1 + 8 + 8 + 72);
  lattice::LatticeBlock recv = b;
  recv.payload = lattice::ReceivePayload{Digest{}, 5};
  CHECK(encoded_size(recv) == 8 + 32 + 1 + 40 + 8 + 72);
}

TEST_CASE("property: decode after encode is the identity for every domain type") {
  Rng rng(8);
  Keyring keys(3);
  for (int i = 0; i < 200; ++i) {
    const Signature sig = random_signature(rng);
    check_round_trip(sig);
    CHECK(canonical_decode<Signature>(canonical_encode(sig)) == sig);

    const auto lb = random_lattice_block(rng);
    check_round_trip(lb);
    CHECK(canonical_decode<lattice::LatticeBlock>(canonical_encode(lb)) == lb);

    lattice::VoteRecord v{acct(rng.below(9)), random_digest(rng), random_digest(rng), rng.next(), rng.below(5),
                          random_signature(rng)};
    CHECK(canonical_decode<lattice::VoteRecord>(canonical_encode(v)) == v);

    std::vector<chain::Transaction> txs;
    for (std::uint64_t k = 0, n = rng.below(5); k < n; ++k)
      txs.push_back(chain::Transaction::make(keys, keys.identity(acct(k)), acct(k + 1), 1 + rng.below(100),
                                             1 + rng.below(10), 1 + rng.below(500)));
    for (const auto& tx : txs) {
      const auto back = canonical_decode<chain::Transaction>(canonical_encode(tx));
      CHECK(back.id() == tx.id());
      CHECK(back.signature() == tx.signature());
    }

    chain::Block block;
    block.header = {random_digest(rng), random_digest(rng), random_digest(rng), rng.below(1000), rng.next(),
                    rng.next(), acct(rng.below(9))};
    block.transactions = txs;
    block.seal = random_signature(rng);
    CHECK(canonical_decode<chain::BlockHeader>(canonical_encode(block.header)) == block.header);
    check_round_trip(block);

    chain::LedgerState state;
    chain::StateDelta delta;
    delta.block = random_digest(rng);
    for (std::uint64_t k = 0, n = rng.below(6); k < n; ++k) {
      chain::AccountState before{rng.below(100), rng.below(4)}, after{1 + rng.below(100), rng.below(4)};
      state.set(acct(k), after);
      delta.changes[acct(k)] = {before, after};
    }
    CHECK(canonical_decode<chain::LedgerState>(canonical_encode(state)) == state);
    const auto d2 = canonical_decode<chain::StateDelta>(canonical_encode(delta));
    CHECK(d2.block == delta.block);
    CHECK(d2.changes == delta.changes);
  }
}

TEST_CASE("structurally equal values encode identically") {
  lattice::LatticeBlock a;
  a.account = acct(4);
  a.payload = lattice::SendPayload{acct(5), 6};
  lattice::LatticeBlock b = a;
  CHECK(canonical_encode(a) == canonical_encode(b));
}

TEST_CASE("malformed input is an encoding error") {
  lattice::LatticeBlock b;
  b.payload = lattice::SendPayload{acct(1), 1};
  Bytes bytes = canonical_encode(b);

  auto code_of = [](const Bytes& in) {
    try {
      (void)canonical_decode<lattice::LatticeBlock>(in);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::validation;
  };
  CHECK(code_of(bytes.substr(0, bytes.size() - 1)) == ErrorCode::encoding);
  CHECK(code_of(bytes + Bytes(1, 0)) == ErrorCode::encoding);
  Bytes bad = bytes;
  bad[40] = 9;  // kind discriminant
  CHECK(code_of(bad) == ErrorCode::encoding);
}

TEST_CASE("derived seeds are label-sensitive") {
  CHECK(derive_seed(1, {2}) == derive_seed(1, {2}));
  CHECK(derive_seed(1, {2}) != derive_seed(1, {3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  Rng a(5), b(5);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
}
