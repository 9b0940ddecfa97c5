#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ledgerlab::metrics {

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  double max = 0.0;

  bool operator==(const Summary&) const = default;
};

/// Nearest-rank quantiles (rank = ceil(q * n)). An empty input yields zeros.
Summary summarize(std::vector<double> values);

struct MetricSeries {
  std::string name;
  std::string unit;
  /// (simulation seconds, value), timestamps non-decreasing.
  std::vector<std::pair<double, double>> samples;

  /// Throws Error(invariant_breach) when `at` precedes the last sample.
  void add(double at, double value);
  std::vector<double> values() const;
  Summary summary() const { return summarize(values()); }
};

}  // namespace ledgerlab::metrics
