#include "conceptag/eval/run_stats.h"

#include <algorithm>
#include <cstdio>

#include "conceptag/errors.h"

namespace conceptag::eval {
namespace {

std::string Pad(const std::string &text, size_t width) {
  return text.size() >= width ? text + " " : text + std::string(width - text.size(), ' ');
}

}  // namespace

RunStats AggregateRuns(const std::vector<double> &per_run_f1) {
  if (per_run_f1.empty()) throw Error("cannot aggregate zero runs");
  RunStats stats;
  stats.n_runs = per_run_f1.size();
  stats.per_run = per_run_f1;
  auto [lo, hi] = std::minmax_element(per_run_f1.begin(), per_run_f1.end());
  stats.min_f1 = *lo;
  stats.best_f1 = *hi;
  double sum = 0.0;
  for (double f : per_run_f1) sum += f;
  // The rounded mean of equal values can land one ulp outside [min, max].
  stats.avg_f1 = std::clamp(sum / static_cast<double>(stats.n_runs),
                            stats.min_f1, stats.best_f1);
  return stats;
}

std::string FormatRunStatsHeader(size_t name_width) {
  char cols[64];
  std::snprintf(cols, sizeof(cols), "%8s %8s %8s", "min F1", "avg F1", "best F1");
  return Pad("model", name_width) + cols;
}

std::string FormatRunStatsRow(const std::string &name, const RunStats &stats,
                              size_t name_width) {
  char cols[64];
  std::snprintf(cols, sizeof(cols), "%8.2f %8.2f %8.2f", stats.min_f1,
                stats.avg_f1, stats.best_f1);
  return Pad(name, name_width) + cols;
}

}  // namespace conceptag::eval
