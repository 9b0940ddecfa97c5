#include "ledgerlab/metrics/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ledgerlab/errors.hpp"

namespace ledgerlab::metrics {

Summary summarize(std::vector<double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  auto rank = [&](double q) {
    const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    return values[std::max<std::size_t>(r, 1) - 1];
  };
  s.p50 = rank(0.50);
  s.p95 = rank(0.95);
  s.max = values.back();
  return s;
}

void MetricSeries::add(double at, double value) {
  if (!samples.empty() && at < samples.back().first)
    throw Error(ErrorCode::invariant_breach, "series " + name + ": sample time went backwards");
  samples.emplace_back(at, value);
}

std::vector<double> MetricSeries::values() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& [t, v] : samples) out.push_back(v);
  return out;
}

}  // namespace ledgerlab::metrics
