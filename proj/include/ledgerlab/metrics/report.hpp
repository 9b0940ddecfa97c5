#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ledgerlab/metrics/config.hpp"
#include "ledgerlab/metrics/series.hpp"
#include "ledgerlab/metrics/trace.hpp"

namespace ledgerlab::metrics {

struct Scalar {
  std::string metric;
  std::string unit;
  double value = 0.0;
};

struct ScenarioReport {
  std::string scenario;
  std::string paradigm;
  std::uint64_t seed = 0;
  std::string digest_algorithm = "SHA-256";
  std::string trace_digest;
  nlohmann::json config;
  std::vector<MetricSeries> series;
  std::vector<Scalar> scalars;
  std::optional<std::string> breach;

  const Scalar* scalar(std::string_view metric) const;
  nlohmann::json to_json() const;
  static ScenarioReport from_json(const nlohmann::json& doc);
  /// Rows of scenario,seed,metric,unit,stat,value with a header line.
  std::string to_csv() const;
};

ScenarioReport build_report(const Config& config, const RunTrace& trace);

/// File stem for a report: the scenario name with anything outside
/// [A-Za-z0-9._-] replaced by '_', then "-seed<N>".
std::string report_stem(const std::string& scenario, std::uint64_t seed);

struct SuiteResult {
  std::vector<ScenarioReport> reports;
  std::vector<std::filesystem::path> files;
  /// "scenario seed N: <invariant>" for every breached run.
  std::vector<std::string> breaches;
};

/// One report per (sweep variant x seed), written as <stem>.json and
/// <stem>.csv under out_dir when it is set. Seeds run on a pool of
/// `threads` workers; 0 picks the hardware concurrency. Results are ordered
/// by variant, then seed, whatever the thread count.
SuiteResult run_scenario_suite(const Config& config, const std::vector<std::uint64_t>& seeds,
                               const std::optional<std::filesystem::path>& out_dir, unsigned threads = 0);
SuiteResult run_scenario_suite(std::string_view config_path, const std::vector<std::uint64_t>& seeds,
                               const std::optional<std::filesystem::path>& out_dir, unsigned threads = 0);

}  // namespace ledgerlab::metrics
