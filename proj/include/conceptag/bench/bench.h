#ifndef CONCEPTAG_BENCH_BENCH_H_
#define CONCEPTAG_BENCH_BENCH_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conceptag/bench/recipe.h"
#include "conceptag/eval/run_stats.h"

namespace conceptag::bench {

inline constexpr const char *kToolkitVersion = "conceptag 0.1.0";

struct SeedResult {
  uint64_t seed = 0;
  double f1 = 0.0;  // percent
};

struct BenchRow {
  std::string recipe;
  std::vector<SeedResult> runs;  // ascending seed
  eval::RunStats stats;
  std::optional<double> reference_f1;
  std::string citation;

  // avg_f1 - reference_f1 when a reference exists.
  std::optional<double> Delta() const;
};

struct BenchEnvironment {
  std::string toolkit = kToolkitVersion;
  std::string timestamp;
  // Dataset path -> SHA-256 hex digest.
  std::map<std::string, std::string> checksums;
};

struct BenchReport {
  std::vector<BenchRow> rows;  // sorted by recipe name
  BenchEnvironment environment;
};

struct BenchOptions {
  std::string out_dir = "bench-out";
  int threads = 1;
  // Replaces every neural recipe's seed list with this single seed.
  std::optional<uint64_t> seed_override;
  // Progress lines ("recipe seed f1"); called from worker threads.
  std::function<void(const std::string &)> log;
};

// Hex SHA-256 of a file's bytes. Throws Error if the file cannot be read.
std::string Sha256File(const std::string &path);

// Trains and scores one seed of `recipe`, writing the model, predictions
// and (for neural models) the per-epoch trace under
// <out_dir>/<recipe>/<seed>/. Dataset errors are rethrown with the recipe
// name prepended.
SeedResult RunSeed(const Recipe &recipe, uint64_t seed, const std::string &out_dir);

// Validates every recipe before any training, then runs all (recipe, seed)
// units on a pool of `threads` workers.
BenchReport RunRecipes(std::vector<Recipe> recipes, const BenchOptions &options);

// One recipe's row.
BenchRow RunRecipe(const Recipe &recipe, const BenchOptions &options);

// Aligned table: recipe, runs, min F1, avg F1, best F1, reference, delta;
// followed by the environment block.
std::string FormatReportText(const BenchReport &report);
// recipe,seed,f1,min,avg,best,reference,delta. Per-seed rows carry f1; the
// aggregate row has seed "all" and the min/avg/best/reference/delta
// columns. No environment data, so identical runs give identical bytes.
std::string FormatReportCsv(const BenchReport &report);

}  // namespace conceptag::bench

#endif  // CONCEPTAG_BENCH_BENCH_H_
