#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "ledgerlab/metrics/config.hpp"
#include "ledgerlab/metrics/measures.hpp"
#include "ledgerlab/metrics/report.hpp"
#include "ledgerlab/metrics/simulate.hpp"
#include "support.hpp"

using namespace ledgerlab;
using namespace ledgerlab::metrics;
using testing::acct;

namespace {

std::string message_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::validation;
}

// Integer oracle: whole transactions per block over the interval.
double cap_oracle(std::uint64_t capacity, std::uint64_t weight, double interval) {
  return static_cast<double>(capacity / weight) / interval;
}

Digest tag(std::uint64_t n) { return digest("block " + std::to_string(n)); }

RunTrace chain_trace() {
  RunTrace t;
  t.paradigm = Paradigm::blockchain;
  t.confirm_threshold = 2;
  t.final_height = 6;
  // heights 1..6 on the final chain; 100+h are losers at heights 2, 3 and 5
  for (std::uint64_t h = 1; h <= 6; ++h) {
    t.mined.push_back({tag(h), h, 0, static_cast<double>(h)});
    t.final_chain.insert(tag(h));
  }
  for (std::uint64_t h : {2, 3, 5}) t.mined.push_back({tag(100 + h), h, 1, static_cast<double>(h)});
  return t;
}

/// A short lattice config for determinism checks.
Config small_lattice() {
  auto cfg = Config::load("nano-baseline");
  cfg.set("scenario.horizon_s", ConfigValue{20.0});
  return cfg;
}

Config small_chain() {
  auto cfg = Config::load("ethereum-baseline");
  cfg.set("chain.target_blocks", ConfigValue{std::int64_t{30}});
  cfg.set("chain.capacity_units", ConfigValue{std::int64_t{300000}});
  return cfg;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ledgerlab-metrics-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("tps_cap reproduces the quoted throughput ranges") {
  CHECK(std::abs(tps_cap(1'000'000, 250, 600) - 6.67) < 0.01);
  CHECK(std::abs(tps_cap(1'000'000, 500, 600) - 3.33) < 0.01);
  CHECK(std::abs(tps_cap(6'700'000, 30'000, 15) - 14.87) < 0.01);
  CHECK(std::abs(tps_cap(6'700'000, 64'000, 15) - 6.93) < 0.01);
  CHECK(tps_cap(1'000'000, 1'000'000, 600) == doctest::Approx(1.0 / 600));

  for (std::uint64_t w = 250; w <= 500; w += 25) {
    CHECK(tps_cap(1'000'000, static_cast<double>(w), 600) == doctest::Approx(cap_oracle(1'000'000, w, 600)));
    CHECK(tps_cap(1'000'000, static_cast<double>(w), 600) >= 3.0);
    CHECK(tps_cap(1'000'000, static_cast<double>(w), 600) <= 7.0);
  }
  for (std::uint64_t w = 30'000; w <= 64'000; w += 2'000) {
    CHECK(tps_cap(6'700'000, static_cast<double>(w), 15) >= 6.9);
    CHECK(tps_cap(6'700'000, static_cast<double>(w), 15) <= 14.9);
  }
}

TEST_CASE("tps_cap rejects impossible inputs") {
  CHECK(code_of([] { tps_cap(1000, 1001, 10); }) == ErrorCode::zero_capacity);
  CHECK(code_of([] { tps_cap(0, 1, 10); }) == ErrorCode::config);
  CHECK(code_of([] { tps_cap(1000, 0, 10); }) == ErrorCode::config);
  CHECK(code_of([] { tps_cap(1000, 10, 0); }) == ErrorCode::config);
  CHECK(code_of([] { tps_cap(1000, 10, -1); }) == ErrorCode::config);
}

TEST_CASE("property: tps_cap is monotone in each argument") {
  Rng rng(41);
  for (int i = 0; i < 500; ++i) {
    const double w = static_cast<double>(1 + rng.below(1000));
    const double cap = w + static_cast<double>(rng.below(100'000));
    const double interval = rng.uniform(0.1, 1000.0);
    const double base = tps_cap(cap, w, interval);
    CHECK(tps_cap(cap + static_cast<double>(1 + rng.below(10'000)), w, interval) >= base);
    CHECK(tps_cap(cap, std::min(cap, w + static_cast<double>(1 + rng.below(100))), interval) <= base);
    CHECK(tps_cap(cap, w, interval * rng.uniform(1.0, 10.0)) <= base);
  }
}

TEST_CASE("summaries use nearest-rank quantiles") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + rng.below(200));
    for (auto& x : v) x = rng.uniform(0, 100);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const auto rank = [&](double q) {
      const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
      return sorted[std::max<std::size_t>(r, 1) - 1];
    };
    double sum = 0;
    for (double x : v) sum += x;
    const auto s = summarize(v);
    CHECK(s.count == v.size());
    CHECK(s.mean == doctest::Approx(sum / static_cast<double>(v.size())));
    CHECK(s.p50 == rank(0.5));
    CHECK(s.p95 == rank(0.95));
    CHECK(s.max == sorted.back());
  }
  CHECK(summarize({}) == Summary{});
  const auto s = summarize({1, 2, 3, 4});
  CHECK(s.p50 == 2);
  CHECK(s.p95 == 4);
}

TEST_CASE("metric series refuse samples out of time order") {
  MetricSeries s{"x", "s", {}};
  s.add(1.0, 5);
  s.add(1.0, 6);
  CHECK(code_of([&] { s.add(0.5, 7); }) == ErrorCode::invariant_breach);
  CHECK(s.values() == std::vector<double>{5, 6});
}

TEST_CASE("orphan rate and fork count on a hand-built trace") {
  const auto t = chain_trace();
  // Settled heights are 1..4: six blocks mined there, two of them losers.
  CHECK(measure_orphan_rate(t) == doctest::Approx(2.0 / 6.0));
  CHECK(measure_fork_count(t) == 3);

  RunTrace short_chain = t;
  short_chain.final_height = 1;
  CHECK(measure_orphan_rate(short_chain) == 0.0);

  RunTrace lattice_trace;
  lattice_trace.paradigm = Paradigm::lattice;
  CHECK(code_of([&] { measure_orphan_rate(lattice_trace); }) == ErrorCode::wrong_paradigm);
  CHECK(code_of([&] { measure_adopted_tps(lattice_trace); }) == ErrorCode::wrong_paradigm);
  CHECK(code_of([&] { measure_settlement_latency(t); }) == ErrorCode::wrong_paradigm);
}

TEST_CASE("confirmation survival pools the ensemble") {
  auto a = chain_trace();
  auto b = chain_trace();
  a.depth_reached = {{tag(1), 6}, {tag(2), 6}, {tag(102), 3}, {tag(103), 1}};
  b.depth_reached = {{tag(1), 8}, {tag(105), 4}, {tag(3), 2}};
  const std::vector<RunTrace> both{a, b};

  const auto d3 = measure_confirmation_survival(both, 3);
  CHECK(d3.observations == 5);
  CHECK(d3.survived == 3);
  CHECK(d3.probability == doctest::Approx(0.6));
  CHECK(d3.standard_error == doctest::Approx(std::sqrt(0.6 * 0.4 / 5)));
  CHECK(d3.low_confidence);

  const auto d6 = measure_confirmation_survival(both, 6);
  CHECK(d6.observations == 3);
  CHECK(d6.probability == 1.0);
  CHECK(d6.standard_error == 0.0);

  CHECK(measure_confirmation_survival(a, 1).observations == 4);
  CHECK(code_of([&] { measure_confirmation_survival(a, 9); }) == ErrorCode::config);
}

TEST_CASE("settlement latency leaves open transfers out of the average") {
  RunTrace t;
  t.paradigm = Paradigm::lattice;
  t.ended_at = 10;
  t.transfers = {{tag(1), 1.0, 1.5}, {tag(2), 2.0, std::nullopt}, {tag(3), 0.5, 3.5}, {tag(4), 9.0, std::nullopt}};
  const auto l = measure_settlement_latency(t);
  CHECK(l.settled == 2);
  CHECK(l.unsettled == 2);
  CHECK(l.summary.mean == doctest::Approx(1.75));
  CHECK(l.summary.max == doctest::Approx(3.0));
  CHECK(l.series.samples.front().first == 1.5);
  CHECK(measure_settled_tps(t) == doctest::Approx(0.2));
}

TEST_CASE("chain ledger bytes split into categories that sum to the total") {
  testing::ChainFixture f(3);
  f.extend(f.store.head(), 3);
  const auto bytes = measure_ledger_bytes(f.store);
  std::uint64_t parts = 0;
  for (const auto& [k, v] : bytes)
    if (k != "total") parts += v;
  CHECK(bytes.at("total") == parts);
  CHECK(bytes.at("headers") > 0);
}

TEST_CASE("config errors name the offending key") {
  Config cfg;
  CHECK(message_of([&] { cfg.set("net.nodez", "3"); }).find("'net.nodez'") != std::string::npos);
  CHECK(message_of([&] { cfg.set("net.nodes", "0"); }).find("'net.nodes'") != std::string::npos);
  CHECK(message_of([&] { cfg.set("net.nodes", "three"); }).find("'net.nodes'") != std::string::npos);
  CHECK(message_of([&] { cfg.set("net.topology", "star"); }).find("'net.topology'") != std::string::npos);
  CHECK(code_of([] { Config::load("/nonexistent/scenario.json"); }) == ErrorCode::config);
  CHECK(message_of([] { Config::load("/nonexistent/scenario.json"); }).find("not found") != std::string::npos);

  auto over = Config::load("pos-baseline");
  over.set("chain.tx_weight", ConfigValue{std::int64_t{2'000'000}});
  CHECK(message_of([&] { over.validate(); }).find("chain.tx_weight") != std::string::npos);
}

TEST_CASE("text overrides parse by declared type") {
  Config cfg;
  cfg.set("chain.capacity_units", "1e6");
  CHECK(cfg.count("chain.capacity_units") == 1'000'000);
  cfg.set("pow.hash_rates", "[1, 2.5]");
  CHECK(cfg.list("pow.hash_rates") == std::vector<double>{1, 2.5});
  cfg.set("pow.hash_rates", "3,4");
  CHECK(cfg.list("pow.hash_rates") == std::vector<double>{3, 4});
  cfg.set("fault.breach_conservation", "true");
  CHECK(cfg.flag("fault.breach_conservation"));
  cfg.set("lattice.cement_delay_s", "inf");
  CHECK(std::isinf(cfg.number("lattice.cement_delay_s")));
  CHECK(code_of([&] { cfg.set("scenario.horizon_s", "inf"); }) == ErrorCode::config);
}

TEST_CASE("every bundled preset validates") {
  const auto names = preset_names();
  CHECK(names.size() == 7);
  for (const auto& name : names) {
    CAPTURE(name);
    CHECK_NOTHROW(Config::load(name).validate());
  }
  const auto btc = Config::load("bitcoin-baseline");
  const double cap = tps_cap(static_cast<double>(btc.count("chain.capacity_units")),
                             static_cast<double>(btc.count("chain.tx_weight")), btc.number("pow.target_interval_s"));
  CHECK(cap >= 3.0);
  CHECK(cap <= 7.0);
}

TEST_CASE("config files inherit from a preset and flatten nested keys") {
  const auto dir = scratch("inherit");
  const auto path = dir / "mine.json";
  std::ofstream(path) << R"({"preset": "nano-baseline", "scenario": {"name": "mine"}, "lattice.accounts": 12})";
  const auto cfg = Config::load(path.string());
  CHECK(cfg.name() == "mine");
  CHECK(cfg.count("lattice.accounts") == 12);
  CHECK(cfg.count("lattice.reps") == Config::load("nano-baseline").count("lattice.reps"));

  std::ofstream(dir / "bad.json") << R"({"preset": "nano-baseline", "lattice.acounts": 12})";
  CHECK(message_of([&] { Config::load((dir / "bad.json").string()); }).find("lattice.acounts") != std::string::npos);
}

TEST_CASE("sweeps expand into named variants") {
  const auto variants = Config::load("nano-scaling").expand_sweep();
  REQUIRE(variants.size() == 2);
  CHECK(variants[0].count("lattice.accounts") == 10);
  CHECK(variants[1].count("lattice.accounts") == 100);
  CHECK(variants[0].name() != variants[1].name());
  CHECK(Config::load("nano-baseline").expand_sweep().size() == 1);
}

TEST_CASE("reports are byte-identical across repeated runs and round-trip") {
  for (const auto& cfg : {small_lattice(), small_chain()}) {
    CAPTURE(cfg.name());
    const auto a = build_report(cfg, simulate(cfg, 3));
    const auto b = build_report(cfg, simulate(cfg, 3));
    CHECK_FALSE(a.breach);
    CHECK(a.to_json().dump() == b.to_json().dump());
    CHECK(a.to_csv() == b.to_csv());
    CHECK(ScenarioReport::from_json(a.to_json()).to_json().dump() == a.to_json().dump());

    // Summaries in the report are recomputable from the raw samples.
    for (const auto& s : a.to_json().at("series")) {
      std::vector<double> values;
      for (const auto& p : s.at("samples")) values.push_back(p.at(1).get<double>());
      const auto sum = summarize(values);
      CHECK(s.at("summary").at("count").get<std::size_t>() == sum.count);
      CHECK(s.at("summary").at("p95").get<double>() == sum.p95);
      CHECK(s.at("summary").at("mean").get<double>() == doctest::Approx(sum.mean));
    }
  }
  const auto other = build_report(small_lattice(), simulate(small_lattice(), 4));
  CHECK(other.trace_digest != build_report(small_lattice(), simulate(small_lattice(), 3)).trace_digest);
}

TEST_CASE("csv rows carry scenario, seed, metric, unit, stat and value") {
  const auto r = build_report(small_lattice(), simulate(small_lattice(), 1));
  const auto csv = r.to_csv();
  CHECK(csv.rfind("scenario,seed,metric,unit,stat,value\n", 0) == 0);
  const auto rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
  CHECK(rows == 1 + r.scalars.size() + 5 * r.series.size());
  CHECK(csv.find("nano-baseline,1,settled_tps,tx/s,value,") != std::string::npos);
}

TEST_CASE("suites write one report per seed whatever the thread count") {
  const auto dir = scratch("suite");
  const auto one = run_scenario_suite(small_lattice(), {1, 2, 3}, dir, 1);
  const auto many = run_scenario_suite(small_lattice(), {1, 2, 3}, std::nullopt, 3);
  REQUIRE(one.reports.size() == 3);
  REQUIRE(many.reports.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(one.reports[i].seed == i + 1);
    CHECK(one.reports[i].to_json().dump() == many.reports[i].to_json().dump());
  }
  CHECK(one.files.size() == 6);
  for (const auto& f : one.files) CHECK(std::filesystem::exists(f));
  CHECK(std::filesystem::exists(dir / "nano-baseline-seed2.json"));
  CHECK(one.breaches.empty());
}

TEST_CASE("an injected credit is reported as a conservation breach") {
  for (auto cfg : {small_lattice(), small_chain()}) {
    CAPTURE(cfg.name());
    cfg.set("fault.breach_conservation", ConfigValue{true});
    const auto t = simulate(cfg, 1);
    REQUIRE(t.breach);
    CHECK(t.breach->find("balance conservation") != std::string::npos);
    const auto suite = run_scenario_suite(cfg, {1}, std::nullopt, 1);
    CHECK(suite.breaches.size() == 1);
  }
}

TEST_CASE("report stems are filesystem-safe") {
  CHECK(report_stem("nano-scaling[lattice.accounts=10]", 7) == "nano-scaling_lattice.accounts_10_-seed7");
  CHECK(report_stem("a b/c", 1) == "a_b_c-seed1");
}
