#pragma once

#include <string_view>
#include <vector>

#include "ledgerlab/simnet/network.hpp"

namespace ledgerlab::metrics {

class Config;

/// "START-END:a,b|c,d" entries separated by ';', times in seconds. Throws
/// Error(config) naming net.partitions on malformed input or unknown nodes.
std::vector<simnet::Partition> parse_partitions(std::string_view text, std::size_t nodes);

simnet::LinkModel link_model(const Config& config);
simnet::Topology topology(const Config& config);

}  // namespace ledgerlab::metrics
