#ifndef CONCEPTAG_CRF_CRF_MODEL_H_
#define CONCEPTAG_CRF_CRF_MODEL_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "conceptag/corpus/corpus.h"
#include "conceptag/corpus/embeddings.h"
#include "conceptag/crf/chain.h"
#include "conceptag/crf/features.h"

namespace conceptag::crf {

// (feature id, value) pairs active at one position.
using SparseVector = std::vector<std::pair<int32_t, double>>;

struct CrfInstance {
  std::vector<SparseVector> positions;
  std::vector<int> labels;  // empty when unlabeled
};

// Weight layout: unary block [feature][label] row-major, followed by the
// label x label transition block (row = previous label).
class CrfModel {
 public:
  CrfModel() = default;
  // Zero-weight model over the given indices.
  CrfModel(std::vector<std::string> labels, std::vector<std::string> features,
           std::vector<FeatureTemplate> templates, double l2);

  // Indexes the labels and the features seen at least `min_feature_count`
  // times in `sentences`. Throws ConfigError on missing columns.
  static CrfModel Index(const std::vector<Sentence> &sentences,
                        std::vector<FeatureTemplate> templates,
                        const EmbeddingTable *embeddings, double l2,
                        int64_t min_feature_count = 1);

  int NumLabels() const { return static_cast<int>(labels_.size()); }
  int NumFeatures() const { return static_cast<int>(features_.size()); }
  size_t NumWeights() const { return weights_.size(); }
  const std::vector<std::string> &labels() const { return labels_; }
  const std::vector<std::string> &features() const { return features_; }
  const std::vector<FeatureTemplate> &templates() const { return templates_; }
  double l2() const { return l2_; }
  int LabelId(const std::string &label) const;    // -1 if absent
  int FeatureId(const std::string &key) const;    // -1 if absent

  std::vector<double> &weights() { return weights_; }
  const std::vector<double> &weights() const { return weights_; }
  double Unary(int feature, int label) const { return weights_[feature * labels_.size() + label]; }
  double Transition(int prev, int label) const {
    return weights_[features_.size() * labels_.size() + prev * labels_.size() + label];
  }

  // Maps a sentence to feature ids, dropping unindexed features. Labels are
  // filled when `with_labels`; throws ValidationError on an unknown tag.
  CrfInstance Extract(const Sentence &sentence, const EmbeddingTable *embeddings,
                      bool with_labels) const;

  chain::Matrix UnaryScores(const CrfInstance &instance) const;
  chain::Matrix TransitionScores() const;

  std::vector<int> Viterbi(const CrfInstance &instance) const;
  std::vector<std::string> Decode(const Sentence &sentence,
                                  const EmbeddingTable *embeddings = nullptr) const;

  // Text dump with hexfloat weights; Load(Save(m)) == m bit for bit.
  void Save(std::ostream &out) const;
  static CrfModel Load(std::istream &in);
  void SaveFile(const std::string &path) const;
  static CrfModel LoadFile(const std::string &path);

 private:
  std::vector<std::string> labels_;
  std::vector<std::string> features_;
  std::map<std::string, int, std::less<>> label_index_;
  std::map<std::string, int, std::less<>> feature_index_;
  std::vector<FeatureTemplate> templates_;
  double l2_ = 1.0;
  std::vector<double> weights_;
};

// Regularized negative log-likelihood over pre-extracted instances:
//   sum_i [logZ_i - score_i(y_i)] + (l2/2) |w|^2
// Instances are split into fixed-size contiguous shards whose partial sums
// are combined by a pairwise tree in index order, so the result does not
// depend on `threads`.
class CrfObjective {
 public:
  CrfObjective(int num_features, int num_labels, std::span<const CrfInstance> instances,
               double l2, int threads = 1);

  size_t NumWeights() const { return num_weights_; }
  // Fills `gradient` (NumWeights entries) when non-null. Throws NumericError
  // on non-finite intermediates.
  double Evaluate(const double *weights, double *gradient) const;
  double Evaluate(const std::vector<double> &weights, std::vector<double> *gradient) const;

  static constexpr size_t kShardSize = 16;

 private:
  // Unregularized contribution of instances [begin, end).
  double EvaluateShard(const double *weights, size_t begin, size_t end, double *gradient) const;

  int num_features_;
  int num_labels_;
  size_t num_weights_;
  std::span<const CrfInstance> instances_;
  double l2_;
  int threads_;
};

struct CrfTrainOptions {
  double l2 = 1.0;
  int max_iterations = 100;
  double tolerance = 1e-5;  // max-norm of the gradient at termination
  int64_t min_feature_count = 1;
  int threads = 1;
};

struct CrfTrainReport {
  int iterations = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  std::string termination;
};

// Full-batch L-BFGS from all-zero weights. Throws OptimizationError when the
// objective ends above its starting value or becomes non-finite.
CrfModel TrainCrf(const std::vector<Sentence> &train, std::vector<FeatureTemplate> templates,
                  const CrfTrainOptions &options, const EmbeddingTable *embeddings = nullptr,
                  CrfTrainReport *report = nullptr);

}  // namespace conceptag::crf

#endif  // CONCEPTAG_CRF_CRF_MODEL_H_
