#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "ledgerlab/chain/store.hpp"
#include "ledgerlab/lattice/ledger.hpp"
#include "ledgerlab/metrics/trace.hpp"

namespace ledgerlab::metrics {

/// floor(capacity / tx_weight) / interval. Throws Error(zero_capacity) when a
/// single transaction exceeds the capacity and Error(config) for
/// non-positive inputs.
double tps_cap(double capacity_units, double tx_weight, double interval_s);

/// Orphaned / mined among blocks at least confirm_threshold below the final
/// head, so the still-contested tip is not counted either way. Throws
/// Error(wrong_paradigm) for lattice traces.
double measure_orphan_rate(const RunTrace& trace);

/// Number of heights at which more than one block was mined.
std::uint64_t measure_fork_count(const RunTrace& trace);

struct SurvivalEstimate {
  std::uint32_t depth = 0;
  std::uint64_t observations = 0;
  std::uint64_t survived = 0;
  double probability = 1.0;
  double standard_error = 0.0;
  /// Fewer than 100 observations.
  bool low_confidence = true;
};

/// Fraction of blocks that reached `depth` at the observer and are on its
/// final chain, pooled over the ensemble.
SurvivalEstimate measure_confirmation_survival(std::span<const RunTrace> traces, std::uint32_t depth);
SurvivalEstimate measure_confirmation_survival(const RunTrace& trace, std::uint32_t depth);

struct SettlementLatency {
  MetricSeries series{"settlement_latency", "s", {}};
  Summary summary;
  std::uint64_t settled = 0;
  std::uint64_t unsettled = 0;
};

/// Send creation to receive adoption at the observer. Transfers still open
/// at the horizon are counted separately and not averaged in.
SettlementLatency measure_settlement_latency(const RunTrace& trace);

/// Settled transfers per simulated second.
double measure_settled_tps(const RunTrace& trace);

/// Transactions on the observer's adopted chain per second of chain time.
double measure_adopted_tps(const RunTrace& trace);

/// Canonical-encoded bytes by category.
std::map<std::string, std::uint64_t> measure_ledger_bytes(const chain::ChainStore& store);
std::map<std::string, std::uint64_t> measure_ledger_bytes(const lattice::Ledger& ledger);

}  // namespace ledgerlab::metrics
