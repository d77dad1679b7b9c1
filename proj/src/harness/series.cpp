#include "gsq/harness.hpp"

namespace gsq {

std::vector<SeriesRow> stats_series(const std::vector<SeriesPoint>& points) {
  std::vector<SeriesRow> rows;
  rows.reserve(points.size());
  for (const auto& pt : points) {
    rows.push_back({pt.params.timeout, pt.params.precision, pt.stats.pop_count, pt.stats.max_occupancy,
                    pt.stats.modeled_mpps});
  }
  return rows;
}

}  // namespace gsq
