#include "ledgerlab/election/pow.hpp"

#include <array>
#include <string>

#include "ledgerlab/errors.hpp"
#include "ledgerlab/primitives/rng.hpp"

namespace ledgerlab::election {

Digest work_digest(const Digest& header, std::uint64_t nonce) {
  std::array<std::uint8_t, Digest::kSize + 8> buf;
  std::copy(header.bytes.begin(), header.bytes.end(), buf.begin());
  for (int i = 0; i < 8; ++i) buf[Digest::kSize + i] = static_cast<std::uint8_t>(nonce >> (56 - 8 * i));
  return digest(ByteView(buf));
}

bool check_pow(const Digest& header, std::uint64_t nonce, int difficulty_bits) {
  if (difficulty_bits < 0 || difficulty_bits > 255)
    throw Error(ErrorCode::config, "difficulty bits must be in 0..255");
  if (difficulty_bits == 0) return true;
  return leading_zero_bits(work_digest(header, nonce)) >= difficulty_bits;
}

bool PowPuzzle::solved() const { return check_pow(header, nonce, target_bits); }

std::uint64_t first_nonce(std::uint64_t rng_seed) { return mix64(rng_seed); }

std::uint64_t mine(const Digest& header, int difficulty_bits, std::uint64_t rng_seed, MineOptions opts) {
  if (difficulty_bits < 0 || difficulty_bits > kMaxGrindBits)
    throw Error(ErrorCode::config,
                "grind difficulty must be in 0.." + std::to_string(kMaxGrindBits) + " bits");
  std::uint64_t nonce = first_nonce(rng_seed);
  for (std::uint64_t attempt = 0; attempt < opts.budget; ++attempt, ++nonce) {
    if (difficulty_bits == 0) return nonce;
    if (opts.counter != nullptr) ++opts.counter->evaluations;
    if (leading_zero_bits(work_digest(header, nonce)) >= difficulty_bits) return nonce;
  }
  throw Error(ErrorCode::mining_budget, "nonce search budget exhausted");
}

std::uint64_t antispam_pow(const Digest& tx_digest, int spam_difficulty_bits, std::uint64_t rng_seed,
                           MineOptions opts) {
  return mine(tx_digest, spam_difficulty_bits, rng_seed, opts);
}

}  // namespace ledgerlab::election
