#include "ledgerlab/primitives/identity.hpp"

#include <mutex>
#include <unordered_map>

namespace ledgerlab {

std::string to_string(AccountId id) { return "acct" + std::to_string(raw(id)); }

void encode(Writer& w, const Signature& s) {
  w.u64(raw(s.signer));
  w.digest(s.payload);
  w.digest(s.tag);
}

Signature decode(Reader& r, Tag<Signature>) {
  Signature s;
  s.signer = AccountId{r.u64()};
  s.payload = r.digest();
  s.tag = r.digest();
  return s;
}

namespace {

// The cache stops growing past this many entries.
constexpr std::size_t kCacheLimit = 1 << 21;

}  // namespace

struct Keyring::Cache {
  std::mutex mutex;
  std::unordered_map<std::uint64_t, Digest> secrets;
};

Keyring::Keyring(std::uint64_t key_seed) : key_seed_(key_seed), cache_(std::make_shared<Cache>()) {}

Digest Keyring::secret_for(AccountId id) const {
  {
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->secrets.find(raw(id)); it != cache_->secrets.end()) return it->second;
  }
  Writer w;
  w.str("ledgerlab/secret");
  w.u64(key_seed_);
  w.u64(raw(id));
  const Digest secret = digest(w.bytes());
  std::lock_guard lock(cache_->mutex);
  if (cache_->secrets.size() < kCacheLimit) cache_->secrets.emplace(raw(id), secret);
  return secret;
}

Identity Keyring::identity(AccountId id) const { return Identity{id, secret_for(id)}; }

Signature Keyring::sign(const Identity& who, const Digest& payload) const {
  return Signature{who.id, payload, digest_pair(who.secret, payload)};
}

bool Keyring::verify(const Signature& sig, AccountId expected_signer, const Digest& payload) const {
  if (sig.signer != expected_signer || sig.payload != payload) return false;
  return sig.tag == digest_pair(secret_for(expected_signer), payload);
}

}  // namespace ledgerlab
