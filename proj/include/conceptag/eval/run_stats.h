#ifndef CONCEPTAG_EVAL_RUN_STATS_H_
#define CONCEPTAG_EVAL_RUN_STATS_H_

#include <string>
#include <vector>

namespace conceptag::eval {

// Spread of F1 over repeated runs that differ only in initialization seed.
struct RunStats {
  size_t n_runs = 0;
  double min_f1 = 0.0;
  double avg_f1 = 0.0;
  double best_f1 = 0.0;
  std::vector<double> per_run;
};

// Throws Error on an empty sequence.
RunStats AggregateRuns(const std::vector<double> &per_run_f1);

// Column header and row in the layout "model  min F1  avg F1  best F1".
std::string FormatRunStatsHeader(size_t name_width = 20);
std::string FormatRunStatsRow(const std::string &name, const RunStats &stats,
                              size_t name_width = 20);

}  // namespace conceptag::eval

#endif  // CONCEPTAG_EVAL_RUN_STATS_H_
