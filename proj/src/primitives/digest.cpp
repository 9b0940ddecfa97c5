#include "ledgerlab/primitives/digest.hpp"

// The one-shot SHA256_* calls skip the EVP dispatch, which is a large
// share of the cost for the short inputs hashed here.
#define OPENSSL_SUPPRESS_DEPRECATED
#include <openssl/evp.h>
#include <openssl/sha.h>

#include <bit>
#include <stdexcept>

#include "ledgerlab/errors.hpp"

namespace ledgerlab {

namespace {

constexpr char kHex[] = "0123456789abcdef";

int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Digest Digest::from_hex(std::string_view hex) {
  if (hex.size() != 2 * kSize) throw Error(ErrorCode::encoding, "digest hex must be 64 chars");
  Digest d;
  for (std::size_t i = 0; i < kSize; ++i) {
    const int hi = nibble(hex[2 * i]);
    const int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::encoding, "bad hex digit in digest");
    d.bytes[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return d;
}

bool Digest::is_zero() const {
  for (auto b : bytes)
    if (b != 0) return false;
  return true;
}

std::string Digest::hex() const {
  std::string out;
  out.reserve(2 * kSize);
  for (auto b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

Digest digest(ByteView payload) {
  Digest d;
  SHA256_CTX ctx;
  if (SHA256_Init(&ctx) != 1 || SHA256_Update(&ctx, payload.data(), payload.size()) != 1 ||
      SHA256_Final(d.bytes.data(), &ctx) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  return d;
}

Digest digest(std::string_view text) {
  return digest(ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Digest digest_pair(const Digest& a, const Digest& b) {
  std::array<std::uint8_t, 2 * Digest::kSize> buf;
  std::copy(a.bytes.begin(), a.bytes.end(), buf.begin());
  std::copy(b.bytes.begin(), b.bytes.end(), buf.begin() + Digest::kSize);
  return digest(ByteView(buf));
}

int leading_zero_bits(const Digest& d) {
  int bits = 0;
  for (auto b : d.bytes) {
    if (b == 0) {
      bits += 8;
      continue;
    }
    return bits + std::countl_zero(b);
  }
  return bits;
}

DigestBuilder::DigestBuilder() : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("EVP_DigestInit_ex failed");
}

DigestBuilder::~DigestBuilder() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

void DigestBuilder::update(ByteView bytes) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), bytes.data(), bytes.size());
}

Digest DigestBuilder::finish() {
  Digest d;
  unsigned int len = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), d.bytes.data(), &len);
  return d;
}

}  // namespace ledgerlab
