#ifndef CONCEPTAG_NN_TRAINER_H_
#define CONCEPTAG_NN_TRAINER_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "conceptag/corpus/corpus.h"
#include "conceptag/corpus/embeddings.h"
#include "conceptag/nn/autodiff.h"
#include "conceptag/nn/tagger.h"

namespace conceptag::nn {

// Adam with bias correction; frozen parameters are skipped.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void Step(const std::vector<Parameter *> &params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  std::vector<Tensor> m_, v_;
};

// Rescales every row of every trainable embedding parameter whose L2 norm
// exceeds `max_norm` back to `max_norm`.
void ApplyMaxNorm(const std::vector<Parameter *> &params, double max_norm);

// Same-length buckets in a seeded order: sentences are shuffled within each
// length, chunked into batches of at most `batch_size`, and the batch order
// is shuffled.
std::vector<std::vector<const Sentence *>> MakeBatches(const std::vector<Sentence> &sentences,
                                                       int batch_size, std::mt19937_64 &rng);

struct TrainTrace {
  std::vector<double> epoch_loss;  // mean loss per sentence
  std::vector<double> epoch_f1;    // test F1 in percent after each epoch
};

// Called after each epoch with (epoch index, test F1 percent).
using EpochCallback = std::function<void(int, double)>;

// Seeded end-to-end run. Throws TrainingError naming epoch and batch on a
// non-finite loss. The returned tagger is the state after the last epoch.
NeuralTagger TrainNeural(const ArchitectureConfig &config, const std::vector<Sentence> &train,
                         const std::vector<Sentence> &test, const EmbeddingTable *pretrained,
                         TrainTrace *trace = nullptr, const EpochCallback &on_epoch = {});

// Test-split F1 in percent.
double EvaluateF1(const NeuralTagger &tagger, const std::vector<Sentence> &test);

struct GradCheckResult {
  double max_relative_error = 0.0;
  size_t checked = 0;
};

// Compares backprop gradients of `loss` with central differences at up to
// `points` sampled trainable coordinates. `loss` must rebuild the same
// function on each call. Relative error uses |a| + |n| + 1e-12 as the
// denominator. `eligible` (optional) filters coordinates by parameter and
// flat index. Throws ParameterError unless step lies in [1e-6, 1e-3].
GradCheckResult GradCheck(const std::function<Var(Graph &)> &loss,
                          const std::vector<Parameter *> &params, int points, double step,
                          uint64_t seed,
                          const std::function<bool(const Parameter &, long)> &eligible = {});

}  // namespace conceptag::nn

#endif  // CONCEPTAG_NN_TRAINER_H_
