#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ledgerlab {

enum class ErrorCode {
  encoding,
  config,
  mining_budget,
  no_leader,
  no_validator,
  slash_rejected,
  not_found,
  orphan_parent,
  insufficient_balance,
  stale_predecessor,
  invalid_amount,
  duplicate_receive,
  scheduling,
  zero_capacity,
  wrong_paradigm,
  invariant_breach,
  validation,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for every recoverable failure in the library; the
/// code carries the category a caller is expected to branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ledgerlab
