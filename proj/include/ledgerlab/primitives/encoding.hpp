#pragma once

#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include "ledgerlab/errors.hpp"
#include "ledgerlab/primitives/digest.hpp"

namespace ledgerlab {

// Canonical binary encoding. Integers are 8-byte big-endian, digests are raw
// 32 bytes, lists are a 4-byte big-endian count followed by the elements and
// enums are a 1-byte discriminant followed by their payload.

class Writer {
 public:
  void u64(std::uint64_t v);
  void u32(std::uint32_t v);
  void u8(std::uint8_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v);
  void digest(const Digest& d);
  void str(std::string_view s);

  template <typename T, typename F>
  void list(const std::vector<T>& items, F&& each) {
    u32(static_cast<std::uint32_t>(items.size()));
    for (const auto& item : items) each(*this, item);
  }

  const Bytes& bytes() const& { return out_; }
  Bytes take() && { return std::move(out_); }
  std::size_t size() const { return out_.size(); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}

  std::uint64_t u64();
  std::uint32_t u32();
  std::uint8_t u8();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64();
  Digest digest();
  std::string str();

  template <typename T, typename F>
  std::vector<T> list(F&& each) {
    const std::uint32_t n = u32();
    // Each element takes at least one byte; rejects absurd counts early.
    if (n > remaining()) throw Error(ErrorCode::encoding, "list count exceeds input");
    std::vector<T> items;
    items.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) items.push_back(each(*this));
    return items;
  }

  template <typename E>
  E discriminant(std::uint8_t count) {
    const auto d = u8();
    if (d >= count) throw Error(ErrorCode::encoding, "enum discriminant out of range");
    return static_cast<E>(d);
  }

  std::size_t remaining() const { return in_.size() - pos_; }
  void expect_end() const;

 private:
  void need(std::size_t n) const;
  ByteView in_;
  std::size_t pos_ = 0;
};

/// A domain type with a declared field order: `encode(Writer&, const T&)` and
/// `T decode(Reader&, Tag<T>)` found by ADL.
template <typename T>
struct Tag {};

template <typename T>
concept Encodable = requires(Writer& w, Reader& r, const T& v) {
  encode(w, v);
  { decode(r, Tag<T>{}) } -> std::same_as<T>;
};

template <Encodable T>
Bytes canonical_encode(const T& value) {
  Writer w;
  encode(w, value);
  return std::move(w).take();
}

template <Encodable T>
T canonical_decode(ByteView bytes) {
  Reader r(bytes);
  T value = decode(r, Tag<T>{});
  r.expect_end();
  return value;
}

template <Encodable T>
std::size_t encoded_size(const T& value) {
  Writer w;
  encode(w, value);
  return w.size();
}

template <Encodable T>
Digest digest_of(const T& value) {
  return digest(canonical_encode(value));
}

}  // namespace ledgerlab
