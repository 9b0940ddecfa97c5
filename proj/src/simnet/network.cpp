#include "ledgerlab/simnet/network.hpp"

#include <algorithm>

namespace ledgerlab::simnet {

bool Partition::separates(NodeId from, NodeId to, double t) const {
  if (t < start || t >= end) return false;
  return (side_a.contains(from) && side_b.contains(to)) || (side_b.contains(from) && side_a.contains(to));
}

double LinkModel::sample_latency(Rng& rng) const {
  const double jitter = jitter_s > 0.0 ? rng.uniform(-jitter_s, jitter_s) : 0.0;
  return std::max(0.0, base_latency_s + jitter);
}

bool LinkModel::partitioned(NodeId from, NodeId to, double t) const {
  return std::any_of(partitions.begin(), partitions.end(),
                     [&](const Partition& p) { return p.separates(from, to, t); });
}

Topology Topology::full_mesh(std::size_t nodes) {
  Topology t;
  t.peers.resize(nodes);
  for (NodeId i = 0; i < nodes; ++i)
    for (NodeId j = 0; j < nodes; ++j)
      if (i != j) t.peers[i].push_back(j);
  return t;
}

}  // namespace ledgerlab::simnet
