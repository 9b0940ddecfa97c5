#include "ledgerlab/metrics/report.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ledgerlab/errors.hpp"
#include "ledgerlab/metrics/measures.hpp"
#include "ledgerlab/metrics/simulate.hpp"

namespace ledgerlab::metrics {

namespace {

using json = nlohmann::json;

json summary_json(const Summary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"p50", s.p50}, {"p95", s.p95}, {"max", s.max}};
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void add_bytes(std::vector<Scalar>& out, const std::map<std::string, std::uint64_t>& bytes) {
  for (const auto& [category, n] : bytes) out.push_back({"ledger_bytes_" + category, "bytes", static_cast<double>(n)});
}

void chain_scalars(const Config& cfg, const RunTrace& t, std::vector<Scalar>& out) {
  const bool pos = cfg.text("chain.proof") == "pos";
  const double interval = pos ? cfg.number("pos.slot_interval_s") : cfg.number("pow.target_interval_s");
  out.push_back({"tps_cap", "tx/s",
                 tps_cap(static_cast<double>(cfg.count("chain.capacity_units")),
                         static_cast<double>(cfg.count("chain.tx_weight")), interval)});
  out.push_back({"adopted_tps", "tx/s", measure_adopted_tps(t)});
  out.push_back({"chain_height", "blocks", static_cast<double>(t.final_height)});
  out.push_back({"chain_transactions", "tx", static_cast<double>(t.chain_transactions)});
  out.push_back({"chain_duration", "s", t.chain_duration_s});
  out.push_back({"blocks_mined", "blocks", static_cast<double>(t.mined.size())});
  out.push_back({"orphan_rate", "ratio", measure_orphan_rate(t)});
  out.push_back({"fork_count", "forks", static_cast<double>(measure_fork_count(t))});
  for (std::uint32_t d = 1; d <= t.max_tracked_depth; ++d) {
    const auto s = measure_confirmation_survival(t, d);
    out.push_back({"survival_d" + std::to_string(d), "ratio", s.probability});
    out.push_back({"survival_d" + std::to_string(d) + "_observations", "blocks", static_cast<double>(s.observations)});
  }
  if (pos) {
    out.push_back({"slashes", "events", static_cast<double>(t.slashes)});
    out.push_back({"slashed_stake", "tokens", static_cast<double>(t.slashed_stake)});
    out.push_back({"stake_supply", "tokens", static_cast<double>(t.stake_supply)});
  }
}

void lattice_scalars(const RunTrace& t, std::vector<Scalar>& out) {
  const auto latency = measure_settlement_latency(t);
  out.push_back({"settled_tps", "tx/s", measure_settled_tps(t)});
  out.push_back({"transfers", "tx", static_cast<double>(t.transfers.size())});
  out.push_back({"settled", "tx", static_cast<double>(latency.settled)});
  out.push_back({"unsettled", "tx", static_cast<double>(latency.unsettled)});
  out.push_back({"blocks_applied", "blocks", static_cast<double>(t.blocks_applied)});
  std::uint64_t converged = 0, agree = 0, deadlocked = 0;
  for (const auto& f : t.forks) {
    if (f.converged()) ++converged;
    if (f.converged() && f.majority_choice == f.node_choices.front()) ++agree;
    if (f.deadlocked) ++deadlocked;
  }
  out.push_back({"fork_count", "forks", static_cast<double>(t.forks.size())});
  out.push_back({"forks_converged", "forks", static_cast<double>(converged)});
  out.push_back({"forks_majority_agree", "forks", static_cast<double>(agree)});
  out.push_back({"forks_deadlocked", "forks", static_cast<double>(deadlocked)});
}

}  // namespace

const Scalar* ScenarioReport::scalar(std::string_view metric) const {
  for (const auto& s : scalars)
    if (s.metric == metric) return &s;
  return nullptr;
}

ScenarioReport build_report(const Config& config, const RunTrace& trace) {
  ScenarioReport r;
  r.scenario = config.name();
  r.paradigm = config.text("scenario.paradigm");
  r.seed = trace.seed;
  r.trace_digest = trace.trace_digest.hex();
  r.config = config.to_json();
  r.breach = trace.breach;

  if (!trace.breach) {
    if (trace.paradigm == Paradigm::blockchain) {
      chain_scalars(config, trace, r.scalars);
      r.series.push_back(trace.confirmation_latency);
    } else {
      lattice_scalars(trace, r.scalars);
      r.series.push_back(measure_settlement_latency(trace).series);
    }
    r.series.push_back(trace.ledger_bytes);
    add_bytes(r.scalars, trace.final_bytes);
  }
  for (const auto& [name, v] : trace.extra) r.scalars.push_back({name, "", v});
  r.scalars.push_back({"net_sent", "messages", static_cast<double>(trace.net.sent)});
  r.scalars.push_back({"net_dropped", "messages", static_cast<double>(trace.net.dropped)});
  r.scalars.push_back({"events", "events", static_cast<double>(trace.net.events)});
  r.scalars.push_back({"sim_time", "s", trace.ended_at});
  return r;
}

json ScenarioReport::to_json() const {
  json doc;
  doc["scenario"] = scenario;
  doc["paradigm"] = paradigm;
  doc["seed"] = seed;
  doc["digest_algorithm"] = digest_algorithm;
  doc["trace_digest"] = trace_digest;
  doc["breach"] = breach ? json(*breach) : json(nullptr);
  doc["config"] = config;
  json metrics = json::array();
  for (const auto& s : scalars) metrics.push_back({{"metric", s.metric}, {"unit", s.unit}, {"value", s.value}});
  doc["metrics"] = std::move(metrics);
  json series_doc = json::array();
  for (const auto& s : series) {
    json samples = json::array();
    for (const auto& [t, v] : s.samples) samples.push_back({t, v});
    series_doc.push_back(
        {{"name", s.name}, {"unit", s.unit}, {"summary", summary_json(s.summary())}, {"samples", std::move(samples)}});
  }
  doc["series"] = std::move(series_doc);
  return doc;
}

ScenarioReport ScenarioReport::from_json(const json& doc) {
  try {
    ScenarioReport r;
    r.scenario = doc.at("scenario").get<std::string>();
    r.paradigm = doc.at("paradigm").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.digest_algorithm = doc.at("digest_algorithm").get<std::string>();
    r.trace_digest = doc.at("trace_digest").get<std::string>();
    if (!doc.at("breach").is_null()) r.breach = doc.at("breach").get<std::string>();
    r.config = doc.at("config");
    for (const auto& m : doc.at("metrics"))
      r.scalars.push_back({m.at("metric").get<std::string>(), m.at("unit").get<std::string>(), m.at("value").get<double>()});
    for (const auto& s : doc.at("series")) {
      MetricSeries series{s.at("name").get<std::string>(), s.at("unit").get<std::string>(), {}};
      for (const auto& p : s.at("samples")) series.add(p.at(0).get<double>(), p.at(1).get<double>());
      r.series.push_back(std::move(series));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::encoding, std::string("malformed report: ") + e.what());
  }
}

std::string ScenarioReport::to_csv() const {
  std::ostringstream os;
  os << "scenario,seed,metric,unit,stat,value\n";
  const std::string prefix = csv_field(scenario) + "," + std::to_string(seed) + ",";
  for (const auto& s : scalars)
    os << prefix << csv_field(s.metric) << "," << csv_field(s.unit) << ",value," << csv_number(s.value) << "\n";
  for (const auto& s : series) {
    const auto sum = s.summary();
    const std::pair<const char*, double> stats[] = {
        {"count", static_cast<double>(sum.count)}, {"mean", sum.mean}, {"p50", sum.p50}, {"p95", sum.p95}, {"max", sum.max}};
    for (const auto& [stat, v] : stats)
      os << prefix << csv_field(s.name) << "," << csv_field(s.unit) << "," << stat << "," << csv_number(v) << "\n";
  }
  return os.str();
}

std::string report_stem(const std::string& scenario, std::uint64_t seed) {
  std::string stem = scenario;
  for (char& c : stem)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')) c = '_';
  return stem + "-seed" + std::to_string(seed);
}

SuiteResult run_scenario_suite(const Config& config, const std::vector<std::uint64_t>& seeds,
                               const std::optional<std::filesystem::path>& out_dir, unsigned threads) {
  config.validate();
  const auto variants = config.expand_sweep();
  for (const auto& v : variants) v.validate();
  struct Task {
    const Config* config;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& v : variants)
    for (auto s : seeds) tasks.push_back({&v, s});

  std::vector<std::optional<ScenarioReport>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        const auto trace = simulate(*tasks[i].config, tasks[i].seed);
        results[i] = build_report(*tasks[i].config, trace);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks.size();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(tasks.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SuiteResult out;
  if (out_dir) std::filesystem::create_directories(*out_dir);
  for (auto& r : results) {
    if (r->breach) out.breaches.push_back(r->scenario + " seed " + std::to_string(r->seed) + ": " + *r->breach);
    if (out_dir) {
      const auto stem = report_stem(r->scenario, r->seed);
      const auto json_path = *out_dir / (stem + ".json");
      const auto csv_path = *out_dir / (stem + ".csv");
      std::ofstream(json_path) << r->to_json().dump(2) << "\n";
      std::ofstream(csv_path) << r->to_csv();
      out.files.push_back(json_path);
      out.files.push_back(csv_path);
    }
    out.reports.push_back(std::move(*r));
  }
  return out;
}

SuiteResult run_scenario_suite(std::string_view config_path, const std::vector<std::uint64_t>& seeds,
                               const std::optional<std::filesystem::path>& out_dir, unsigned threads) {
  return run_scenario_suite(Config::load(config_path), seeds, out_dir, threads);
}

}  // namespace ledgerlab::metrics
