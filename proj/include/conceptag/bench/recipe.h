#ifndef CONCEPTAG_BENCH_RECIPE_H_
#define CONCEPTAG_BENCH_RECIPE_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conceptag/corpus/corpus.h"
#include "conceptag/crf/crf_model.h"
#include "conceptag/nn/tagger.h"
#include "conceptag/wfst/wfst_tagger.h"

namespace conceptag::bench {

enum class ModelFamily { kWfst, kCrf, kCrfEmb, kNeural };

// One experiment: a dataset, a model family with its hyperparameters, and
// the seeds to sweep. Recipe files hold one [section] per recipe:
//
//   [lstm-crf-atis]
//   model = LSTM-CRF
//   train = ../data/atis/train.txt
//   test = ../data/atis/test.txt
//   embeddings = ../data/embeddings/vectors.txt
//   hidden = 400
//   ...
//   seeds = 1..3
//   reference_f1 = 94.72
//   citation = published LSTM-CRF average on ATIS
//
// Relative paths resolve against the recipe file's directory.
struct Recipe {
  std::string name;
  std::string model;
  std::string train_path;
  std::string test_path;
  std::string embeddings_path;  // empty when absent
  std::string columns = "token,tag";
  // Model-specific keys (order, templates, hidden, lr, ...) as written.
  std::map<std::string, std::string> hyperparameters;
  std::vector<uint64_t> seeds;
  std::optional<double> reference_f1;
  std::string citation;

  ModelFamily Family() const;
  // Throws ValidationError on an unknown or out-of-scope model, missing or
  // unknown keys, unparsable values, or a seed list that does not fit the
  // family (non-empty for neural models, a single ignored seed otherwise).
  void Validate() const;

  ColumnSpec Columns() const { return ColumnSpec::Parse(columns); }
  wfst::WfstOptions WfstSettings() const;
  crf::CrfTrainOptions CrfSettings() const;
  std::vector<crf::FeatureTemplate> CrfTemplates() const;
  // Neural configuration for one seed.
  nn::ArchitectureConfig NeuralSettings(uint64_t seed) const;
};

// Parses "1..3", "1,2,5" or "7". Throws ValidationError.
std::vector<uint64_t> ParseSeeds(const std::string &text);

// Reads every section of an INI recipe file. Paths are resolved against
// `base_dir`. Recipes are validated; the first invalid one throws.
std::vector<Recipe> LoadRecipes(std::istream &in, const std::string &base_dir);
std::vector<Recipe> LoadRecipesFile(const std::string &path);

}  // namespace conceptag::bench

#endif  // CONCEPTAG_BENCH_RECIPE_H_
