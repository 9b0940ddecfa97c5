#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>

namespace ledgerlab {

using Bytes = std::basic_string<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Name of the digest function pinned for this build. Reports carry it so a
/// trace can be matched to the hash that produced it.
inline constexpr std::string_view kDigestAlgorithm = "SHA-256";

struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  static constexpr std::size_t kSize = 32;

  static Digest zero() { return Digest{}; }
  static Digest from_hex(std::string_view hex);

  bool is_zero() const;
  std::string hex() const;
  std::string short_hex() const { return hex().substr(0, 12); }

  auto operator<=>(const Digest&) const = default;
};

Digest digest(ByteView payload);
Digest digest(std::string_view text);
/// digest(a ‖ b)
Digest digest_pair(const Digest& a, const Digest& b);

/// Number of leading zero bits, 0..256.
int leading_zero_bits(const Digest& d);

/// Incremental hashing, used for trace digests over long event streams.
class DigestBuilder {
 public:
  DigestBuilder();
  ~DigestBuilder();
  DigestBuilder(const DigestBuilder&) = delete;
  DigestBuilder& operator=(const DigestBuilder&) = delete;

  void update(ByteView bytes);
  Digest finish();

 private:
  void* ctx_;
};

}  // namespace ledgerlab

template <>
struct std::hash<ledgerlab::Digest> {
  std::size_t operator()(const ledgerlab::Digest& d) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | d.bytes[i];
    return h;
  }
};
