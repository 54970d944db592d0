#include "conceptag/crf/crf_model.h"

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <thread>
#include <unordered_map>

#include "conceptag/errors.h"
#include "conceptag/serialize.h"

namespace conceptag::crf {

CrfModel::CrfModel(std::vector<std::string> labels, std::vector<std::string> features,
                   std::vector<FeatureTemplate> templates, double l2)
    : labels_(std::move(labels)),
      features_(std::move(features)),
      templates_(std::move(templates)),
      l2_(l2) {
  if (labels_.empty()) throw ParameterError("crf: at least one label required");
  if (!(l2_ >= 0.0) || !std::isfinite(l2_)) throw ParameterError("crf: l2 must be finite and >= 0");
  for (size_t i = 0; i < labels_.size(); ++i) {
    if (!label_index_.emplace(labels_[i], static_cast<int>(i)).second) {
      throw ParameterError("crf: duplicate label " + labels_[i]);
    }
  }
  for (size_t i = 0; i < features_.size(); ++i) {
    if (!feature_index_.emplace(features_[i], static_cast<int>(i)).second) {
      throw ParameterError("crf: duplicate feature " + features_[i]);
    }
  }
  weights_.assign((features_.size() + labels_.size()) * labels_.size(), 0.0);
}

CrfModel CrfModel::Index(const std::vector<Sentence> &sentences,
                         std::vector<FeatureTemplate> templates,
                         const EmbeddingTable *embeddings, double l2,
                         int64_t min_feature_count) {
  CheckTemplateInputs(sentences, templates, embeddings);
  std::set<std::string> labels;
  std::map<std::string, int64_t> counts;
  for (const Sentence &s : sentences) {
    labels.insert(s.tags.begin(), s.tags.end());
    for (size_t t = 0; t < s.size(); ++t) {
      for (const Feature &f : ApplyTemplates(s, t, templates, embeddings)) ++counts[f.key];
    }
  }
  std::vector<std::string> features;
  for (const auto &[key, count] : counts) {
    if (count >= min_feature_count) features.push_back(key);
  }
  return CrfModel({labels.begin(), labels.end()}, std::move(features), std::move(templates), l2);
}

int CrfModel::LabelId(const std::string &label) const {
  auto it = label_index_.find(label);
  return it == label_index_.end() ? -1 : it->second;
}

int CrfModel::FeatureId(const std::string &key) const {
  auto it = feature_index_.find(key);
  return it == feature_index_.end() ? -1 : it->second;
}

CrfInstance CrfModel::Extract(const Sentence &sentence, const EmbeddingTable *embeddings,
                              bool with_labels) const {
  CrfInstance instance;
  instance.positions.resize(sentence.size());
  for (size_t t = 0; t < sentence.size(); ++t) {
    for (const Feature &f : ApplyTemplates(sentence, t, templates_, embeddings)) {
      const int id = FeatureId(f.key);
      if (id >= 0 && f.value != 0.0) instance.positions[t].emplace_back(id, f.value);
    }
  }
  if (with_labels) {
    for (const std::string &tag : sentence.tags) {
      const int id = LabelId(tag);
      if (id < 0) throw ValidationError("crf: tag " + tag + " is not in the model's label set");
      instance.labels.push_back(id);
    }
  }
  return instance;
}

chain::Matrix CrfModel::UnaryScores(const CrfInstance &instance) const {
  const int l = NumLabels();
  chain::Matrix unary = chain::Matrix::Zero(static_cast<Eigen::Index>(instance.positions.size()), l);
  for (size_t t = 0; t < instance.positions.size(); ++t) {
    for (const auto &[feature, value] : instance.positions[t]) {
      const double *row = &weights_[static_cast<size_t>(feature) * l];
      for (int y = 0; y < l; ++y) unary(t, y) += value * row[y];
    }
  }
  return unary;
}

chain::Matrix CrfModel::TransitionScores() const {
  const int l = NumLabels();
  chain::Matrix trans(l, l);
  const double *block = &weights_[features_.size() * l];
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j) trans(i, j) = block[i * l + j];
  }
  return trans;
}

std::vector<int> CrfModel::Viterbi(const CrfInstance &instance) const {
  if (instance.positions.empty()) return {};
  const chain::Matrix unary = UnaryScores(instance);
  const chain::Matrix trans = TransitionScores();
  return chain::Viterbi({unary, trans, chain::kNoBoundary, chain::kNoBoundary});
}

std::vector<std::string> CrfModel::Decode(const Sentence &sentence,
                                          const EmbeddingTable *embeddings) const {
  std::vector<std::string> tags;
  for (int id : Viterbi(Extract(sentence, embeddings, false))) tags.push_back(labels_[id]);
  return tags;
}

void CrfModel::Save(std::ostream &out) const {
  out << "conceptag-crf 1\n";
  out << "templates " << TemplatesToString(templates_) << "\n";
  out << "l2 " << serialize::Hex(l2_) << "\n";
  out << "labels " << labels_.size() << "\n";
  for (const std::string &label : labels_) out << label << "\n";
  out << "features " << features_.size() << "\n";
  const size_t l = labels_.size();
  for (size_t f = 0; f < features_.size(); ++f) {
    out << features_[f];
    for (size_t y = 0; y < l; ++y) out << ' ' << serialize::Hex(weights_[f * l + y]);
    out << "\n";
  }
  out << "transitions\n";
  for (size_t i = 0; i < l; ++i) {
    for (size_t j = 0; j < l; ++j) {
      out << (j ? " " : "") << serialize::Hex(weights_[(features_.size() + i) * l + j]);
    }
    out << "\n";
  }
}

CrfModel CrfModel::Load(std::istream &in) {
  using namespace serialize;
  Expect(in, "conceptag-crf");
  Expect(in, "1");
  Expect(in, "templates");
  std::vector<FeatureTemplate> templates = ParseTemplates(Next(in, "templates"));
  Expect(in, "l2");
  const double l2 = NextDouble(in, "l2");
  Expect(in, "labels");
  std::vector<std::string> labels;
  for (long long n = NextInt(in, "label count"); n > 0; --n) labels.push_back(Next(in, "label"));
  Expect(in, "features");
  const long long num_features = NextInt(in, "feature count");
  if (num_features < 0) throw FormatError("crf: negative feature count");
  std::vector<std::string> features;
  std::vector<double> unary;
  for (long long f = 0; f < num_features; ++f) {
    features.push_back(Next(in, "feature"));
    for (size_t y = 0; y < labels.size(); ++y) unary.push_back(NextDouble(in, "weight"));
  }
  CrfModel model(std::move(labels), std::move(features), std::move(templates), l2);
  std::copy(unary.begin(), unary.end(), model.weights_.begin());
  Expect(in, "transitions");
  for (size_t i = unary.size(); i < model.weights_.size(); ++i) {
    model.weights_[i] = NextDouble(in, "transition weight");
  }
  for (double w : model.weights_) {
    if (!std::isfinite(w)) throw FormatError("crf: non-finite weight in model file");
  }
  return model;
}

void CrfModel::SaveFile(const std::string &path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  Save(out);
  if (!out) throw Error("write failed: " + path);
}

CrfModel CrfModel::LoadFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  return Load(in);
}

CrfObjective::CrfObjective(int num_features, int num_labels,
                           std::span<const CrfInstance> instances, double l2, int threads)
    : num_features_(num_features),
      num_labels_(num_labels),
      num_weights_(static_cast<size_t>(num_features + num_labels) * num_labels),
      instances_(instances),
      l2_(l2),
      threads_(std::max(1, threads)) {
  for (const CrfInstance &instance : instances_) {
    if (instance.labels.size() != instance.positions.size()) {
      throw ShapeError("crf objective: instance labels and positions differ in length");
    }
  }
}

double CrfObjective::EvaluateShard(const double *weights, size_t begin, size_t end,
                                   double *gradient) const {
  const int l = num_labels_;
  const size_t trans_offset = static_cast<size_t>(num_features_) * l;
  chain::Matrix trans(l, l);
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j) trans(i, j) = weights[trans_offset + i * l + j];
  }
  double value = 0.0;
  for (size_t k = begin; k < end; ++k) {
    const CrfInstance &instance = instances_[k];
    const size_t n = instance.positions.size();
    if (n == 0) continue;
    chain::Matrix unary = chain::Matrix::Zero(static_cast<Eigen::Index>(n), l);
    for (size_t t = 0; t < n; ++t) {
      for (const auto &[feature, v] : instance.positions[t]) {
        const double *row = weights + static_cast<size_t>(feature) * l;
        for (int y = 0; y < l; ++y) unary(t, y) += v * row[y];
      }
    }
    const chain::ChainScores chain{unary, trans, chain::kNoBoundary, chain::kNoBoundary};
    const chain::Marginals m = chain::ComputeMarginals(chain);
    value += m.log_z - chain::PathScore(chain, instance.labels);
    if (!gradient) continue;
    for (size_t t = 0; t < n; ++t) {
      for (const auto &[feature, v] : instance.positions[t]) {
        double *row = gradient + static_cast<size_t>(feature) * l;
        for (int y = 0; y < l; ++y) row[y] += v * m.node(t, y);
        row[instance.labels[t]] -= v;
      }
    }
    double *tg = gradient + trans_offset;
    for (int i = 0; i < l; ++i) {
      for (int j = 0; j < l; ++j) tg[i * l + j] += m.edge(i, j);
    }
    for (size_t t = 1; t < n; ++t) tg[instance.labels[t - 1] * l + instance.labels[t]] -= 1.0;
  }
  if (!std::isfinite(value)) throw NumericError("crf objective: non-finite value");
  return value;
}

double CrfObjective::Evaluate(const double *weights, double *gradient) const {
  const size_t shards = std::max<size_t>(1, (instances_.size() + kShardSize - 1) / kShardSize);
  std::vector<double> values(shards, 0.0);
  std::vector<std::vector<double>> grads(gradient ? shards : 0);
  std::vector<std::exception_ptr> errors(shards);
  auto run = [&](size_t shard) {
    try {
      const size_t begin = shard * kShardSize;
      const size_t end = std::min(instances_.size(), begin + kShardSize);
      double *g = nullptr;
      if (gradient) {
        grads[shard].assign(num_weights_, 0.0);
        g = grads[shard].data();
      }
      values[shard] = EvaluateShard(weights, begin, end, g);
    } catch (...) {
      errors[shard] = std::current_exception();
    }
  };
  const size_t workers = std::min<size_t>(static_cast<size_t>(threads_), shards);
  if (workers <= 1) {
    for (size_t s = 0; s < shards; ++s) run(s);
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (size_t s = w; s < shards; s += workers) run(s);
      });
    }
    for (auto &thread : pool) thread.join();
  }
  for (const auto &error : errors) {
    if (error) std::rethrow_exception(error);
  }
  // Pairwise reduction: shard s absorbs s + stride at each level.
  for (size_t stride = 1; stride < shards; stride *= 2) {
    for (size_t s = 0; s + stride < shards; s += 2 * stride) {
      values[s] += values[s + stride];
      if (gradient) {
        for (size_t i = 0; i < num_weights_; ++i) grads[s][i] += grads[s + stride][i];
      }
    }
  }
  double value = values[0];
  double squared = 0.0;
  for (size_t i = 0; i < num_weights_; ++i) squared += weights[i] * weights[i];
  value += 0.5 * l2_ * squared;
  if (gradient) {
    for (size_t i = 0; i < num_weights_; ++i) gradient[i] = grads[0][i] + l2_ * weights[i];
  }
  if (!std::isfinite(value)) throw NumericError("crf objective: non-finite value");
  return value;
}

double CrfObjective::Evaluate(const std::vector<double> &weights,
                              std::vector<double> *gradient) const {
  if (weights.size() != num_weights_) throw ShapeError("crf objective: weight vector size");
  if (gradient) gradient->assign(num_weights_, 0.0);
  return Evaluate(weights.data(), gradient ? gradient->data() : nullptr);
}

namespace {

class CeresAdapter : public ceres::FirstOrderFunction {
 public:
  explicit CeresAdapter(const CrfObjective &objective) : objective_(objective) {}
  bool Evaluate(const double *parameters, double *cost, double *gradient) const override {
    try {
      *cost = objective_.Evaluate(parameters, gradient);
    } catch (const NumericError &) {
      return false;
    }
    return true;
  }
  int NumParameters() const override { return static_cast<int>(objective_.NumWeights()); }

 private:
  const CrfObjective &objective_;
};

}  // namespace

CrfModel TrainCrf(const std::vector<Sentence> &train, std::vector<FeatureTemplate> templates,
                  const CrfTrainOptions &options, const EmbeddingTable *embeddings,
                  CrfTrainReport *report) {
  if (train.empty()) throw TrainingError("crf: empty training split");
  if (options.max_iterations < 0) throw ParameterError("crf: max_iterations must be >= 0");
  if (!(options.tolerance > 0.0)) throw ParameterError("crf: tolerance must be > 0");
  CrfModel model = CrfModel::Index(train, std::move(templates), embeddings, options.l2,
                                   options.min_feature_count);
  std::vector<CrfInstance> instances;
  instances.reserve(train.size());
  for (const Sentence &s : train) instances.push_back(model.Extract(s, embeddings, true));
  CrfObjective objective(model.NumFeatures(), model.NumLabels(), instances, options.l2,
                         options.threads);

  CrfTrainReport local;
  local.initial_objective = objective.Evaluate(model.weights(), nullptr);
  local.final_objective = local.initial_objective;
  local.termination = "max_iterations";
  if (options.max_iterations > 0) {
    ceres::GradientProblemSolver::Options solver;
    solver.line_search_direction_type = ceres::LBFGS;
    solver.max_num_iterations = options.max_iterations;
    solver.gradient_tolerance = options.tolerance;
    solver.function_tolerance = 1e-12;
    solver.parameter_tolerance = 1e-14;
    solver.logging_type = ceres::SILENT;
    solver.minimizer_progress_to_stdout = false;
    ceres::GradientProblem problem(new CeresAdapter(objective));
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(solver, problem, model.weights().data(), &summary);
    local.iterations = static_cast<int>(summary.iterations.size()) - 1;
    local.final_objective = objective.Evaluate(model.weights(), nullptr);
    local.termination = ceres::TerminationTypeToString(summary.termination_type);
    if (!std::isfinite(local.final_objective) ||
        local.final_objective > local.initial_objective) {
      throw OptimizationError("crf: objective rose from " +
                              std::to_string(local.initial_objective) + " to " +
                              std::to_string(local.final_objective) + " (" +
                              summary.message + ")");
    }
  }
  if (report) *report = local;
  return model;
}

}  // namespace conceptag::crf
