#include "conceptag/nn/trainer.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "conceptag/errors.h"
#include "conceptag/eval/scorer.h"

namespace conceptag::nn {

void Adam::Step(const std::vector<Parameter *> &params) {
  if (m_.empty()) {
    for (const Parameter *p : params) {
      m_.push_back(Tensor::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Tensor::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (m_.size() != params.size()) throw ShapeError("adam: parameter list changed between steps");
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (size_t k = 0; k < params.size(); ++k) {
    Parameter &p = *params[k];
    if (!p.trainable) continue;
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * p.grad;
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr_ * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + eps_);
  }
}

void ApplyMaxNorm(const std::vector<Parameter *> &params, double max_norm) {
  for (Parameter *p : params) {
    if (!p->trainable || !p->embedding) continue;
    for (long r = 0; r < p->value.rows(); ++r) {
      const double norm = p->value.row(r).norm();
      if (norm > max_norm) p->value.row(r) *= max_norm / norm;
    }
  }
}

std::vector<std::vector<const Sentence *>> MakeBatches(const std::vector<Sentence> &sentences,
                                                       int batch_size, std::mt19937_64 &rng) {
  std::map<size_t, std::vector<const Sentence *>> buckets;
  for (const Sentence &s : sentences) {
    if (s.size() > 0) buckets[s.size()].push_back(&s);
  }
  std::vector<std::vector<const Sentence *>> batches;
  const size_t chunk = static_cast<size_t>(std::max(1, batch_size));
  for (auto &[length, members] : buckets) {
    std::shuffle(members.begin(), members.end(), rng);
    for (size_t begin = 0; begin < members.size(); begin += chunk) {
      const size_t end = std::min(members.size(), begin + chunk);
      batches.emplace_back(members.begin() + begin, members.begin() + end);
    }
  }
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

double EvaluateF1(const NeuralTagger &tagger, const std::vector<Sentence> &test) {
  std::vector<std::vector<std::string>> gold;
  for (const Sentence &s : test) gold.push_back(s.tags);
  return eval::Score(gold, tagger.PredictAll(test)).F1Percent();
}

NeuralTagger TrainNeural(const ArchitectureConfig &config, const std::vector<Sentence> &train,
                         const std::vector<Sentence> &test, const EmbeddingTable *pretrained,
                         TrainTrace *trace, const EpochCallback &on_epoch) {
  std::set<std::string> tags;
  for (const Sentence &s : train) tags.insert(s.tags.begin(), s.tags.end());
  NeuralTagger tagger =
      NeuralTagger::Build(config, train, {tags.begin(), tags.end()}, pretrained);
  // Independent streams for batching and dropout, both derived from the seed.
  std::mt19937_64 order_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 dropout_rng(config.seed + 0x632be59bd9b4e019ULL);
  Adam adam(config.lr);
  std::vector<Parameter *> params = tagger.params().All();
  TrainTrace local;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto batches = MakeBatches(train, config.batch_size, order_rng);
    double total = 0.0;
    size_t count = 0;
    for (size_t b = 0; b < batches.size(); ++b) {
      tagger.params().ZeroGrad();
      Graph g(true);
      Var loss = tagger.Loss(g, batches[b], dropout_rng);
      const double value = loss.value()(0, 0);
      if (!std::isfinite(value)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                            std::to_string(b + 1));
      }
      Var mean = Scale(loss, 1.0 / static_cast<double>(batches[b].size()));
      g.Backward(mean);
      adam.Step(params);
      ApplyMaxNorm(params, config.emb_norm);
      total += value;
      count += batches[b].size();
    }
    local.epoch_loss.push_back(count ? total / static_cast<double>(count) : 0.0);
    const double f1 = test.empty() ? 0.0 : EvaluateF1(tagger, test);
    local.epoch_f1.push_back(f1);
    if (on_epoch) on_epoch(epoch, f1);
  }
  if (trace) *trace = std::move(local);
  return tagger;
}

GradCheckResult GradCheck(const std::function<Var(Graph &)> &loss,
                          const std::vector<Parameter *> &params, int points, double step,
                          uint64_t seed,
                          const std::function<bool(const Parameter &, long)> &eligible) {
  if (!(step >= 1e-6 && step <= 1e-3)) throw ParameterError("grad_check: step must lie in [1e-6, 1e-3]");
  for (Parameter *p : params) p->grad = Tensor::Zero(p->value.rows(), p->value.cols());
  {
    Graph g(true);
    g.Backward(loss(g));
  }
  std::vector<std::pair<Parameter *, long>> coords;
  for (Parameter *p : params) {
    if (!p->trainable) continue;
    for (long i = 0; i < p->value.size(); ++i) {
      if (!eligible || eligible(*p, i)) coords.emplace_back(p, i);
    }
  }
  std::mt19937_64 rng(seed);
  std::shuffle(coords.begin(), coords.end(), rng);
  if (points >= 0 && coords.size() > static_cast<size_t>(points)) coords.resize(points);
  auto evaluate = [&] {
    Graph g(true);
    return loss(g).value()(0, 0);
  };
  GradCheckResult result;
  for (auto [p, i] : coords) {
    double &x = p->value.data()[i];
    const double saved = x;
    x = saved + step;
    const double plus = evaluate();
    x = saved - step;
    const double minus = evaluate();
    x = saved;
    const double numeric = (plus - minus) / (2.0 * step);
    const double analytic = p->grad.data()[i];
    const double error =
        std::abs(analytic - numeric) / (std::abs(analytic) + std::abs(numeric) + 1e-12);
    result.max_relative_error = std::max(result.max_relative_error, error);
    ++result.checked;
  }
  return result;
}

}  // namespace conceptag::nn
