#include <doctest.h>

#include <algorithm>

#include "ledgerlab/simnet/network.hpp"
#include "support.hpp"

using namespace ledgerlab;
using namespace ledgerlab::simnet;

namespace {

struct Note {
  std::uint64_t value = 0;
  Digest digest() const { return ledgerlab::digest(std::to_string(value)); }
};

using Net = Network<Note>;

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::validation;
}

/// Gossip workload: each delivery is re-broadcast with a counter until it
/// hits zero. Returns the final trace digest.
Digest gossip_trace(std::uint64_t seed, LinkModel link = {0.05, 0.02, 0.1, {}}) {
  Net net(6, link, {}, seed);
  for (NodeId n = 0; n < 6; ++n) net.command(n, 0.01 * n, Note{3});
  net.run(100.0, [&](const Net::Event& e) {
    if (e.payload.value > 0) net.broadcast(e.destination, Note{e.payload.value - 1});
  });
  return net.trace_digest();
}

}  // namespace

TEST_CASE("scheduler ordering") {
  Scheduler<Note> s;
  s.schedule(1.0, EventKind::timer, 0, Note{1});
  s.schedule(1.0, EventKind::timer, 0, Note{2});
  s.schedule(0.5, EventKind::timer, 0, Note{3});
  CHECK(s.pop().payload.value == 3);
  CHECK(s.pop().payload.value == 1);
  // Scheduling at the current time runs before time advances.
  s.schedule(1.0, EventKind::timer, 0, Note{4});
  CHECK(s.pop().payload.value == 2);
  CHECK(s.pop().payload.value == 4);
  CHECK(code_of([&] { s.schedule(0.5, EventKind::timer, 0, Note{}); }) == ErrorCode::scheduling);
}

TEST_CASE("ten thousand random events pop in time order") {
  Scheduler<Note> s;
  Rng rng(1);
  std::vector<double> times;
  for (int i = 0; i < 10'000; ++i) {
    times.push_back(rng.uniform(0, 100));
    s.schedule(times.back(), EventKind::timer, 0, Note{static_cast<std::uint64_t>(i)});
  }
  std::sort(times.begin(), times.end());
  std::uint64_t last_seq = 0;
  double last_at = -1;
  for (double expected : times) {
    const auto e = s.pop();
    REQUIRE(e.at == expected);
    if (e.at == last_at) REQUIRE(e.sequence > last_seq);
    last_at = e.at;
    last_seq = e.sequence;
  }
}

TEST_CASE("broadcast fan-out, drops and partitions") {
  SUBCASE("no drops") {
    Net net(6, {0.1, 0.0, 0.0, {}}, {}, 1);
    CHECK(net.broadcast(0, Note{}) == 5);
  }
  SUBCASE("always dropped") {
    Net net(6, {0.1, 0.0, 1.0, {}}, {}, 1);
    CHECK(net.broadcast(0, Note{}) == 0);
    CHECK(net.stats().dropped == 5);
  }
  SUBCASE("partition") {
    LinkModel link{0.1, 0.0, 0.0, {Partition{0.0, 10.0, {0, 1, 2}, {3, 4, 5}}}};
    Net net(6, link, {}, 1);
    std::vector<NodeId> got;
    net.broadcast(0, Note{});
    net.run(5.0, [&](const Net::Event& e) { got.push_back(e.destination); });
    std::sort(got.begin(), got.end());
    CHECK(got == std::vector<NodeId>{1, 2});
    CHECK(net.stats().partition_drops == 3);
    // After the window the link heals.
    net.timer(0, 10.0, Note{});
    net.run(10.0, [&](const Net::Event&) { CHECK(net.broadcast(0, Note{}) == 5); });
  }
  SUBCASE("custom topology") {
    Topology t{{{1}, {0, 2}, {1}}};
    Net net(3, {0.1, 0, 0, {}}, t, 1);
    CHECK(net.broadcast(0, Note{}) == 1);
    CHECK(net.broadcast(1, Note{}) == 2);
  }
  SUBCASE("unknown sender") {
    Net net(2, {}, {}, 1);
    CHECK(code_of([&] { net.broadcast(5, Note{}); }) == ErrorCode::config);
  }
}

TEST_CASE("latency sampling stays within jitter bounds and is causal") {
  Net net(2, {0.2, 0.05, 0.0, {}}, {}, 3);
  for (int i = 0; i < 500; ++i) net.send(0, 1, Note{static_cast<std::uint64_t>(i)});
  net.run(10.0, [&](const Net::Event& e) {
    CHECK(e.at >= 0.15);
    CHECK(e.at <= 0.25);
  });
  LinkModel wide{0.01, 0.5, 0.0, {}};
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) CHECK(wide.sample_latency(rng) >= 0.0);
}

TEST_CASE("traces are a pure function of the seed") {
  CHECK(gossip_trace(1) == gossip_trace(1));
  CHECK(gossip_trace(1) != gossip_trace(2));
}

TEST_CASE("horizon zero runs only time-zero events") {
  Net net(2, {0.1, 0, 0, {}}, {}, 1);
  net.command(0, 0.0, Note{1});
  net.command(1, 0.0, Note{2});
  net.command(1, 0.5, Note{3});
  std::vector<std::uint64_t> seen;
  net.run(0.0, [&](const Net::Event& e) { seen.push_back(e.payload.value); });
  CHECK(seen == std::vector<std::uint64_t>{1, 2});
  CHECK(net.scheduler().size() == 1);
}

TEST_CASE("records mirror executed events") {
  Net net(3, {0.1, 0.01, 0, {}}, {}, 9);
  net.keep_records(true);
  net.command(0, 0.0, Note{2});
  net.run(5.0, [&](const Net::Event& e) {
    if (e.payload.value > 0) net.broadcast(e.destination, Note{e.payload.value - 1});
  });
  CHECK(net.records().size() == net.stats().events);
  for (std::size_t i = 1; i < net.records().size(); ++i) CHECK(net.records()[i].at >= net.records()[i - 1].at);
}

TEST_CASE("stop predicate ends the run early") {
  Net net(2, {}, {}, 1);
  for (int i = 0; i < 10; ++i) net.command(0, i, Note{});
  int count = 0;
  net.stop_when([&] { return count == 4; });
  net.run(100.0, [&](const Net::Event&) { ++count; });
  CHECK(count == 4);
}
