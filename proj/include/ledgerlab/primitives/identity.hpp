#pragma once

#include <memory>

#include <cstdint>
#include <string>

#include "ledgerlab/primitives/digest.hpp"
#include "ledgerlab/primitives/encoding.hpp"

namespace ledgerlab {

enum class AccountId : std::uint64_t {};

constexpr std::uint64_t raw(AccountId id) { return static_cast<std::uint64_t>(id); }
std::string to_string(AccountId id);

/// Simulated identity. The secret is an opaque seed that stands in for a
/// private key; it never leaves the Keyring that derived it.
struct Identity {
  AccountId id{};
  Digest secret;
};

struct Signature {
  AccountId signer{};
  Digest payload;
  Digest tag;

  bool operator==(const Signature&) const = default;
};

void encode(Writer& w, const Signature& s);
Signature decode(Reader& r, Tag<Signature>);

/// Derives per-account secrets from a scenario key seed and checks
/// signatures against them. Keyed-digest authenticators, not real asymmetric
/// crypto: a tag verifies only under the id whose secret produced it.
class Keyring {
 public:
  explicit Keyring(std::uint64_t key_seed = 0);

  Identity identity(AccountId id) const;
  Signature sign(const Identity& who, const Digest& payload) const;
  bool verify(const Signature& sig, AccountId expected_signer, const Digest& payload) const;
  /// Keyrings with equal seeds derive the same secrets.
  std::uint64_t seed() const { return key_seed_; }

 private:
  Digest secret_for(AccountId id) const;
  std::uint64_t key_seed_;
  /// Derived secrets, shared by copies of the keyring.
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

}  // namespace ledgerlab
