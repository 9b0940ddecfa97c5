#include "ledgerlab/primitives/encoding.hpp"

#include <bit>
#include <cstring>

namespace ledgerlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::encoding: return "encoding";
    case ErrorCode::config: return "config";
    case ErrorCode::mining_budget: return "mining-budget";
    case ErrorCode::no_leader: return "no-leader";
    case ErrorCode::no_validator: return "no-validator";
    case ErrorCode::slash_rejected: return "slash-rejected";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::orphan_parent: return "orphan-parent";
    case ErrorCode::insufficient_balance: return "insufficient-balance";
    case ErrorCode::stale_predecessor: return "stale-predecessor";
    case ErrorCode::invalid_amount: return "invalid-amount";
    case ErrorCode::duplicate_receive: return "duplicate-receive";
    case ErrorCode::scheduling: return "scheduling";
    case ErrorCode::zero_capacity: return "zero-capacity";
    case ErrorCode::wrong_paradigm: return "wrong-paradigm";
    case ErrorCode::invariant_breach: return "invariant-breach";
    case ErrorCode::validation: return "validation";
  }
  return "unknown";
}

void Writer::u64(std::uint64_t v) {
  std::uint8_t buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
  out_.append(buf, sizeof buf);
}

void Writer::u32(std::uint32_t v) {
  std::uint8_t buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<std::uint8_t>(v >> (24 - 8 * i));
  out_.append(buf, sizeof buf);
}

void Writer::u8(std::uint8_t v) { out_.push_back(v); }

void Writer::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void Writer::digest(const Digest& d) { out_.append(d.bytes.data(), d.bytes.size()); }

void Writer::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  out_.append(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

void Reader::need(std::size_t n) const {
  if (remaining() < n) throw Error(ErrorCode::encoding, "truncated input");
}

std::uint64_t Reader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_++];
  return v;
}

std::uint32_t Reader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_++];
  return v;
}

std::uint8_t Reader::u8() {
  need(1);
  return in_[pos_++];
}

double Reader::f64() { return std::bit_cast<double>(u64()); }

Digest Reader::digest() {
  need(Digest::kSize);
  Digest d;
  std::memcpy(d.bytes.data(), in_.data() + pos_, Digest::kSize);
  pos_ += Digest::kSize;
  return d;
}

std::string Reader::str() {
  const auto n = u32();
  need(n);
  std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
  pos_ += n;
  return s;
}

void Reader::expect_end() const {
  if (remaining() != 0) throw Error(ErrorCode::encoding, "trailing bytes after value");
}

}  // namespace ledgerlab
