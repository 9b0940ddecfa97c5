#pragma once

#include <cstdint>

#include "ledgerlab/metrics/config.hpp"
#include "ledgerlab/metrics/trace.hpp"

namespace ledgerlab::metrics {

/// Runs one (scenario, seed). An invariant breach stops the run and is
/// recorded in RunTrace::breach; Error(config) escapes for bad configs.
RunTrace run_chain(const Config& config, std::uint64_t seed);
RunTrace run_lattice(const Config& config, std::uint64_t seed);
RunTrace simulate(const Config& config, std::uint64_t seed);

/// Observer node index after resolving -1.
simnet::NodeId observer_of(const Config& config);

}  // namespace ledgerlab::metrics
