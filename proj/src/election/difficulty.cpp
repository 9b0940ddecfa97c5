#include "ledgerlab/election/difficulty.hpp"

#include <algorithm>
#include <cmath>

#include "ledgerlab/errors.hpp"

namespace ledgerlab::election {

int DifficultySchedule::leading_zero_bits() const {
  if (expected_hashes <= 1.0) return 0;
  return std::clamp(static_cast<int>(std::lround(std::log2(expected_hashes))), 0, 255);
}

DifficultySchedule retarget(const DifficultySchedule& schedule, double observed_window_duration_s) {
  if (!(observed_window_duration_s > 0.0))
    throw Error(ErrorCode::config, "observed window duration must be positive");
  const double wanted = schedule.target_interval_s * schedule.retarget_window;
  const double factor = std::clamp(wanted / observed_window_duration_s, 1.0 / kRetargetClamp, kRetargetClamp);
  DifficultySchedule next = schedule;
  next.expected_hashes = schedule.expected_hashes * factor;
  return next;
}

}  // namespace ledgerlab::election
