#pragma once

#include <cstdint>
#include <optional>

#include "ledgerlab/primitives/digest.hpp"

namespace ledgerlab::election {

/// Upper bound for literal nonce grinding; larger targets belong to the
/// lottery mining mode.
inline constexpr int kMaxGrindBits = 24;

/// Counts digest evaluations spent on puzzles.
struct WorkCounter {
  std::uint64_t evaluations = 0;
};

struct PowPuzzle {
  int target_bits = 0;
  Digest header;
  std::uint64_t nonce = 0;

  bool solved() const;
};

/// digest(header ‖ nonce as 8 big-endian bytes)
Digest work_digest(const Digest& header, std::uint64_t nonce);

bool check_pow(const Digest& header, std::uint64_t nonce, int difficulty_bits);

/// Nonce enumeration order is a seeded start followed by consecutive values,
/// so the answer is the first solution in that order.
std::uint64_t first_nonce(std::uint64_t rng_seed);

struct MineOptions {
  std::uint64_t budget = 1ULL << 32;
  WorkCounter* counter = nullptr;
};

/// Throws Error(mining_budget) when the budget runs out and Error(config) for
/// difficulties beyond kMaxGrindBits.
std::uint64_t mine(const Digest& header, int difficulty_bits, std::uint64_t rng_seed, MineOptions opts = {});

/// Same contract as mine(); attached to every lattice block.
std::uint64_t antispam_pow(const Digest& tx_digest, int spam_difficulty_bits, std::uint64_t rng_seed = 0,
                           MineOptions opts = {});

}  // namespace ledgerlab::election
