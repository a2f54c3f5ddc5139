#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "procshade/core/error.hpp"

namespace procshade::metrics {

// Nearest-rank quantile: the value at index ceil(q * n) of the sorted sample
// (1-based). Unambiguous and trivially checkable against a sort oracle.
inline double nearest_rank_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) raise(Errc::EmptySubset, "quantile of an empty sample");
  if (!(q > 0.0) || q > 1.0) raise(Errc::BadParameter, "quantile q must be in (0, 1]");
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(sorted.size())));
  const std::size_t index = std::max<std::size_t>(rank, 1) - 1;
  return sorted[std::min(index, sorted.size() - 1)];
}

struct SummaryStat {
  double avg = 0;
  double q5 = 0;
  double q95 = 0;
  std::size_t n = 0;
};

inline SummaryStat summarize_values(std::vector<double> values) {
  if (values.empty()) raise(Errc::EmptySubset, "no values to summarize");
  SummaryStat s;
  s.n = values.size();
  double sum = 0;
  for (double v : values) sum += v;
  s.avg = sum / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  s.q5 = nearest_rank_quantile(values, 0.05);
  s.q95 = nearest_rank_quantile(values, 0.95);
  return s;
}

}  // namespace procshade::metrics
