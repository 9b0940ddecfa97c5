#include "ledgerlab/metrics/measures.hpp"

#include <cmath>

#include "ledgerlab/chain/ops.hpp"
#include "ledgerlab/errors.hpp"

namespace ledgerlab::metrics {

bool ForkRecord::converged() const {
  if (node_choices.empty() || !node_choices.front()) return false;
  for (const auto& c : node_choices)
    if (c != node_choices.front()) return false;
  return true;
}

double tps_cap(double capacity_units, double tx_weight, double interval_s) {
  if (!(capacity_units > 0) || !(tx_weight > 0) || !(interval_s > 0))
    throw Error(ErrorCode::config, "tps_cap inputs must be positive");
  if (tx_weight > capacity_units) throw Error(ErrorCode::zero_capacity, "transaction weight exceeds block capacity");
  return std::floor(capacity_units / tx_weight) / interval_s;
}

namespace {

void require_chain(const RunTrace& trace) {
  if (trace.paradigm != Paradigm::blockchain)
    throw Error(ErrorCode::wrong_paradigm, "measurement needs a blockchain trace");
}

}  // namespace

double measure_orphan_rate(const RunTrace& trace) {
  require_chain(trace);
  if (trace.final_height < trace.confirm_threshold) return 0.0;
  const std::uint64_t settled_height = trace.final_height - trace.confirm_threshold;
  std::uint64_t mined = 0, orphaned = 0;
  for (const auto& b : trace.mined) {
    if (b.height > settled_height) continue;
    ++mined;
    if (!trace.final_chain.contains(b.id)) ++orphaned;
  }
  return mined == 0 ? 0.0 : static_cast<double>(orphaned) / static_cast<double>(mined);
}

std::uint64_t measure_fork_count(const RunTrace& trace) {
  require_chain(trace);
  std::map<std::uint64_t, std::uint64_t> per_height;
  for (const auto& b : trace.mined) ++per_height[b.height];
  std::uint64_t forks = 0;
  for (const auto& [h, n] : per_height)
    if (n > 1) ++forks;
  return forks;
}

SurvivalEstimate measure_confirmation_survival(std::span<const RunTrace> traces, std::uint32_t depth) {
  SurvivalEstimate est;
  est.depth = depth;
  for (const auto& trace : traces) {
    require_chain(trace);
    if (depth > trace.max_tracked_depth)
      throw Error(ErrorCode::config, "depth " + std::to_string(depth) + " beyond the tracked maximum");
    for (const auto& [id, reached] : trace.depth_reached) {
      if (reached < depth) continue;
      ++est.observations;
      if (trace.final_chain.contains(id)) ++est.survived;
    }
  }
  if (est.observations > 0) {
    const double n = static_cast<double>(est.observations);
    est.probability = static_cast<double>(est.survived) / n;
    est.standard_error = std::sqrt(est.probability * (1.0 - est.probability) / n);
  }
  est.low_confidence = est.observations < 100;
  return est;
}

SurvivalEstimate measure_confirmation_survival(const RunTrace& trace, std::uint32_t depth) {
  return measure_confirmation_survival(std::span<const RunTrace>(&trace, 1), depth);
}

SettlementLatency measure_settlement_latency(const RunTrace& trace) {
  if (trace.paradigm != Paradigm::lattice)
    throw Error(ErrorCode::wrong_paradigm, "settlement latency needs a lattice trace");
  SettlementLatency out;
  std::vector<std::pair<double, double>> samples;
  for (const auto& t : trace.transfers) {
    if (!t.settled_at) {
      ++out.unsettled;
      continue;
    }
    ++out.settled;
    samples.emplace_back(*t.settled_at, *t.settled_at - t.created_at);
  }
  std::sort(samples.begin(), samples.end());
  for (const auto& [at, v] : samples) out.series.add(at, v);
  out.summary = out.series.summary();
  return out;
}

double measure_settled_tps(const RunTrace& trace) {
  if (trace.paradigm != Paradigm::lattice)
    throw Error(ErrorCode::wrong_paradigm, "settled TPS needs a lattice trace");
  if (!(trace.ended_at > 0)) return 0.0;
  std::uint64_t settled = 0;
  for (const auto& t : trace.transfers)
    if (t.settled_at) ++settled;
  return static_cast<double>(settled) / trace.ended_at;
}

double measure_adopted_tps(const RunTrace& trace) {
  require_chain(trace);
  if (!(trace.chain_duration_s > 0)) return 0.0;
  return static_cast<double>(trace.chain_transactions) / trace.chain_duration_s;
}

std::map<std::string, std::uint64_t> measure_ledger_bytes(const chain::ChainStore& store) {
  const auto b = chain::ledger_bytes(store);
  return {{"headers", b.headers}, {"bodies", b.bodies}, {"deltas", b.deltas}, {"state", b.state}, {"total", b.total()}};
}

std::map<std::string, std::uint64_t> measure_ledger_bytes(const lattice::Ledger& ledger) {
  const auto b = ledger.bytes();
  return {{"lattice_blocks", b.lattice_blocks}, {"pending", b.pending}, {"state", b.state}, {"total", b.total()}};
}

}  // namespace ledgerlab::metrics
