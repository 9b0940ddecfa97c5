#include "ledgerlab/metrics/netconfig.hpp"

#include <sstream>
#include <string>

#include "ledgerlab/errors.hpp"
#include "ledgerlab/metrics/config.hpp"

namespace ledgerlab::metrics {

namespace {

[[noreturn]] void bad(const std::string& entry, const std::string& why) {
  throw Error(ErrorCode::config, "config key 'net.partitions': entry '" + entry + "' " + why);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

double seconds(const std::string& entry, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && v >= 0) return v;
  } catch (const std::exception&) {
  }
  bad(entry, "has a bad time '" + s + "'");
}

std::set<simnet::NodeId> side(const std::string& entry, const std::string& s, std::size_t nodes) {
  std::set<simnet::NodeId> out;
  for (const auto& n : split(s, ',')) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(n, &used);
    } catch (const std::exception&) {
      bad(entry, "has a bad node id '" + n + "'");
    }
    if (used != n.size()) bad(entry, "has a bad node id '" + n + "'");
    if (v >= nodes) bad(entry, "names node " + n + " beyond net.nodes");
    out.insert(static_cast<simnet::NodeId>(v));
  }
  if (out.empty()) bad(entry, "has an empty side");
  return out;
}

}  // namespace

std::vector<simnet::Partition> parse_partitions(std::string_view text, std::size_t nodes) {
  std::vector<simnet::Partition> out;
  for (const auto& entry : split(std::string(text), ';')) {
    if (entry.empty()) continue;
    const auto colon = entry.find(':');
    if (colon == std::string::npos) bad(entry, "needs START-END:SIDE|SIDE");
    const auto window = split(entry.substr(0, colon), '-');
    const auto sides = split(entry.substr(colon + 1), '|');
    if (window.size() != 2 || sides.size() != 2) bad(entry, "needs START-END:SIDE|SIDE");
    simnet::Partition p;
    p.start = seconds(entry, window[0]);
    p.end = seconds(entry, window[1]);
    if (p.end < p.start) bad(entry, "ends before it starts");
    p.side_a = side(entry, sides[0], nodes);
    p.side_b = side(entry, sides[1], nodes);
    for (auto n : p.side_a)
      if (p.side_b.contains(n)) bad(entry, "puts node " + std::to_string(n) + " on both sides");
    out.push_back(std::move(p));
  }
  return out;
}

simnet::LinkModel link_model(const Config& config) {
  simnet::LinkModel link;
  link.base_latency_s = config.number("net.base_latency_ms") / 1000.0;
  link.jitter_s = config.number("net.jitter_ms") / 1000.0;
  link.drop_probability = config.number("net.drop_prob");
  link.partitions = parse_partitions(config.text("net.partitions"), config.count("net.nodes"));
  return link;
}

simnet::Topology topology(const Config& config) {
  const auto n = config.count("net.nodes");
  if (config.text("net.topology") != "ring" || n < 3) return simnet::Topology::full_mesh(n);
  simnet::Topology t;
  t.peers.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.peers[i].push_back(static_cast<simnet::NodeId>((i + n - 1) % n));
    t.peers[i].push_back(static_cast<simnet::NodeId>((i + 1) % n));
  }
  return t;
}

}  // namespace ledgerlab::metrics
