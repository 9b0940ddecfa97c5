#pragma once

#include <cstdint>

namespace ledgerlab::election {

inline constexpr double kRetargetClamp = 4.0;

struct DifficultySchedule {
  double target_interval_s = 600.0;
  std::uint32_t retarget_window = 16;
  /// Expected number of digest evaluations per block.
  double expected_hashes = 1.0;

  /// round(log2(expected_hashes)), clamped to [0, 255]
  int leading_zero_bits() const;
};

/// Scales expected_hashes by target window duration / observed duration,
/// with the multiplier clamped to [1/4, 4].
DifficultySchedule retarget(const DifficultySchedule& schedule, double observed_window_duration_s);

}  // namespace ledgerlab::election
