// ledgerlab: run, validate, inspect and compare ledger simulation scenarios.
// Exit status: 0 ok, 1 usage or config error, 2 invariant breach.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ledgerlab/errors.hpp"
#include "ledgerlab/metrics/config.hpp"
#include "ledgerlab/metrics/report.hpp"
#include "ledgerlab/metrics/simulate.hpp"

namespace fs = std::filesystem;
using namespace ledgerlab;
using namespace ledgerlab::metrics;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kBreach = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// "A..B" (inclusive) or "N" meaning 1..N.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw UsageError("bad --seeds value '" + text + "'");
    return static_cast<std::uint64_t>(v);
  };
  std::uint64_t lo = 1, hi = 0;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    lo = number(text.substr(0, dots));
    hi = number(text.substr(dots + 2));
  } else {
    hi = number(text);
  }
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = lo; s <= hi && hi != UINT64_MAX; ++s) out.push_back(s);
  if (out.empty()) throw UsageError("no seeds in range '" + text + "'");
  return out;
}

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<double> horizon;
};

Config resolve(const Common& c) {
  Config cfg = Config::load(c.config);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--override expects KEY=VALUE, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), std::string_view(kv).substr(eq + 1));
  }
  if (c.horizon) cfg.set("scenario.horizon_s", ConfigValue{*c.horizon});
  cfg.validate();
  return cfg;
}

int cmd_validate(const Common& c) {
  const auto cfg = resolve(c);
  const auto variants = cfg.expand_sweep();
  std::cout << "ok: " << cfg.name() << " (" << cfg.text("scenario.paradigm") << ", " << variants.size()
            << (variants.size() == 1 ? " variant)" : " variants)") << "\n";
  return kOk;
}

int cmd_run(const Common& c, const std::string& seeds_text, const std::string& out, unsigned threads) {
  const auto seeds = parse_seeds(seeds_text);
  const auto cfg = resolve(c);
  const auto result = run_scenario_suite(cfg, seeds, fs::path(out), threads);
  std::cout << "wrote " << result.reports.size() << " reports to " << out << "\n";
  if (!result.breaches.empty()) {
    for (const auto& b : result.breaches) std::cerr << "invariant breach: " << b << "\n";
    return kBreach;
  }
  return kOk;
}

void print_report(const ScenarioReport& r) {
  std::cout << "scenario " << r.scenario << " (" << r.paradigm << "), seed " << r.seed << "\n";
  std::cout << "digest " << r.digest_algorithm << ", trace " << r.trace_digest << "\n";
  if (r.breach) std::cout << "BREACH " << *r.breach << "\n";
  for (const auto& s : r.scalars) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-32s %16.6g %s\n", s.metric.c_str(), s.value, s.unit.c_str());
    std::cout << line;
  }
  for (const auto& s : r.series) {
    const auto sum = s.summary();
    char line[200];
    std::snprintf(line, sizeof line, "  %-32s n=%zu mean=%.4g p50=%.4g p95=%.4g max=%.4g %s\n", s.name.c_str(),
                  sum.count, sum.mean, sum.p50, sum.p95, sum.max, s.unit.c_str());
    std::cout << line;
  }
}

ScenarioReport read_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path.string());
  try {
    return ScenarioReport::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

int cmd_inspect(const Common& c, const std::string& report, std::uint64_t seed, bool show_config) {
  if (!report.empty()) {
    print_report(read_report(report));
    return kOk;
  }
  if (c.config.empty()) throw UsageError("inspect needs --config or --report");
  const auto cfg = resolve(c);
  if (show_config) std::cout << cfg.to_json().dump(2) << "\n";
  int status = kOk;
  for (const auto& variant : cfg.expand_sweep()) {
    const auto r = build_report(variant, simulate(variant, seed));
    print_report(r);
    if (r.breach) status = kBreach;
  }
  return status;
}

std::string cell(std::optional<double> v, const char* fmt = "%.4g") {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

int cmd_compare(const std::string& dir) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw UsageError("no reports in " + dir);

  struct Row {
    std::string paradigm;
    std::size_t runs = 0;
    std::map<std::string, double> sums;
    std::map<std::string, std::size_t> counts;
    void add(const std::string& k, double v) {
      sums[k] += v;
      ++counts[k];
    }
    std::optional<double> mean(const std::string& k) const {
      auto it = counts.find(k);
      if (it == counts.end() || it->second == 0) return std::nullopt;
      return sums.at(k) / static_cast<double>(it->second);
    }
  };
  std::map<std::string, Row> rows;
  std::set<std::string> paradigms;
  for (const auto& f : files) {
    const auto r = read_report(f);
    auto& row = rows[r.scenario];
    row.paradigm = r.paradigm;
    ++row.runs;
    paradigms.insert(r.paradigm);
    for (const auto& s : r.scalars) row.add(s.metric, s.value);
    for (const auto& s : r.series)
      if (!s.samples.empty()) row.add(s.name + "_mean", s.summary().mean);
  }
  if (paradigms.size() < 2) std::cerr << "warning: reports cover a single paradigm\n";

  int width = 8;
  for (const auto& [name, row] : rows) width = std::max(width, static_cast<int>(name.size()));
  std::printf("%-*s %-10s %5s %12s %12s %12s %12s %10s %14s\n", width, "scenario", "paradigm", "runs", "tps",
              "confirm_s", "settle_s", "orphan_rate", "forks", "ledger_bytes");
  for (const auto& [name, row] : rows) {
    const bool chain = row.paradigm == "blockchain";
    const auto tps = chain ? row.mean("adopted_tps") : row.mean("settled_tps");
    const auto confirm = chain ? row.mean("confirmation_latency_mean") : std::nullopt;
    const auto settle = chain ? std::nullopt : row.mean("settlement_latency_mean");
    const auto orphan = chain ? row.mean("orphan_rate") : std::nullopt;
    std::printf("%-*s %-10s %5zu %12s %12s %12s %12s %10s %14s\n", width, name.c_str(), row.paradigm.c_str(), row.runs,
                cell(tps).c_str(), cell(confirm).c_str(), cell(settle).c_str(), cell(orphan).c_str(),
                cell(row.mean("fork_count")).c_str(), cell(row.mean("ledger_bytes_total"), "%.0f").c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic blockchain / block-lattice simulation lab"};
  app.require_subcommand(1, 1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", common.config, "preset name or JSON config file");
    if (config_required) opt->required();
    sub->add_option("--override", common.overrides, "KEY=VALUE with a dotted config key (repeatable)");
    sub->add_option("--horizon", common.horizon, "simulated seconds, overrides scenario.horizon_s");
  };

  std::string seeds = "1";
  std::string out = "reports";
  unsigned threads = 0;
  auto* run = app.add_subcommand("run", "run a scenario suite and write reports");
  add_common(run, true);
  run->add_option("--seeds", seeds, "seed range A..B, or N for 1..N")->required();
  run->add_option("--out", out, "report directory");
  run->add_option("--threads", threads, "worker threads (0 = hardware concurrency)");

  auto* validate = app.add_subcommand("validate", "check a config and exit");
  add_common(validate, true);

  std::string report;
  std::uint64_t seed = 1;
  bool show_config = false;
  auto* inspect = app.add_subcommand("inspect", "run one seed and print its measurements, or print a report");
  add_common(inspect, false);
  inspect->add_option("--report", report, "report JSON file to print");
  inspect->add_option("--seed", seed, "seed to run");
  inspect->add_flag("--show-config", show_config, "print the resolved configuration");

  std::string dir;
  auto* compare = app.add_subcommand("compare", "side-by-side table of the reports in a directory");
  compare->add_option("dir", dir, "report directory")->required();

  app.add_subcommand("presets", "list bundled scenario presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(common, seeds, out, threads);
    if (*validate) return cmd_validate(common);
    if (*inspect) return cmd_inspect(common, report, seed, show_config);
    if (*compare) return cmd_compare(dir);
    for (const auto& name : preset_names()) std::cout << name << "\n";
    return kOk;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::invariant_breach ? kBreach : kUsage;
  }
}
