#ifndef CONCEPTAG_NN_TAGGER_H_
#define CONCEPTAG_NN_TAGGER_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "conceptag/corpus/corpus.h"
#include "conceptag/corpus/embeddings.h"
#include "conceptag/nn/autodiff.h"
#include "conceptag/nn/layers.h"

namespace conceptag::nn {

enum class ArchKind {
  kRnn,
  kLstm,
  kLstmCharRep,
  kLstm2Ch,
  kGru,
  kConv,
  kFcInit,
  kEncoder,
  kAttention,
  kLstmCrf,
  kLstmCrfCharRep,
};

const std::vector<std::string> &ArchNames();
std::string ArchName(ArchKind kind);
// Throws ConfigError on an unknown name.
ArchKind ParseArch(const std::string &name);

inline constexpr int kCharDim = 30;
inline constexpr int kLabelDim = 30;

struct ArchitectureConfig {
  ArchKind kind = ArchKind::kLstm;
  int hidden = 100;
  int epochs = 10;
  int batch_size = 10;
  double lr = 0.001;
  double drop_rate = 0.0;
  double emb_norm = 6.0;
  bool bidirectional = true;
  bool freeze_embeddings = false;
  uint64_t seed = 1;
  // Word vector size when no pretrained table is supplied.
  int embedding_dim = 50;

  // Throws ConfigError on out-of-range values or indivisible hidden sizes.
  void Validate() const;
  // Hidden size of one recurrent direction of the main encoder.
  int DirectionHidden() const;
  // LSTM-2CH: hidden size of one channel (both directions).
  int ChannelHidden() const { return hidden / 2; }
  bool UsesCrf() const {
    return kind == ArchKind::kLstmCrf || kind == ArchKind::kLstmCrfCharRep;
  }
  bool UsesChars() const {
    return kind == ArchKind::kLstmCharRep || kind == ArchKind::kLstmCrfCharRep;
  }
  bool UsesDecoder() const { return kind == ArchKind::kEncoder || kind == ArchKind::kAttention; }
  // The pretrained channel is frozen regardless of freeze_embeddings.
  bool FrozenPretrained() const { return kind == ArchKind::kConv || kind == ArchKind::kLstm2Ch; }
};

struct Vocabulary {
  std::vector<std::string> words;   // id 0 is <unk>
  std::vector<std::string> chars;   // ids 0/1 are pad/unknown
  std::vector<std::string> labels;
  std::map<std::string, int, std::less<>> word_index;
  std::map<std::string, int, std::less<>> char_index;
  std::map<std::string, int, std::less<>> label_index;

  // Words: <unk> then the sorted union of training lookup keys and keys with
  // a pretrained vector. Chars: pad, unknown, sorted training characters.
  static Vocabulary Build(const std::vector<Sentence> &train,
                          const std::vector<std::string> &labels,
                          const EmbeddingTable *pretrained);
  static Vocabulary FromLists(std::vector<std::string> words, std::vector<std::string> chars,
                              std::vector<std::string> labels);
  int WordId(std::string_view surface) const;
  std::vector<int> CharIds(std::string_view surface) const;
  int LabelId(const std::string &label) const;  // -1 if absent
};

// A batch of sentences that share one length.
using Batch = std::span<const Sentence *const>;

class NeuralTagger {
 public:
  // Seeded initialization; copies pretrained vectors into the word tables.
  static NeuralTagger Build(const ArchitectureConfig &config, const std::vector<Sentence> &train,
                            const std::vector<std::string> &labels,
                            const EmbeddingTable *pretrained);

  NeuralTagger(NeuralTagger &&) = default;
  NeuralTagger &operator=(NeuralTagger &&) = default;

  const ArchitectureConfig &config() const { return config_; }
  const Vocabulary &vocabulary() const { return vocab_; }
  ParameterStore &params() { return params_; }
  const ParameterStore &params() const { return params_; }
  size_t ParameterCount() const { return params_.TotalSize(); }
  int EmbeddingDim() const { return embedding_dim_; }
  int MaxLength() const { return max_length_; }
  int NumLabels() const { return static_cast<int>(vocab_.labels.size()); }

  // Summed loss over a same-length batch. Dropout is active when the graph
  // is in training mode and draws from `rng`.
  Var Loss(Graph &g, Batch batch, std::mt19937_64 &rng) const;

  std::vector<std::vector<int>> PredictIds(Batch batch) const;
  std::vector<std::string> Predict(const Sentence &sentence) const;
  // Decodes in same-length buckets of up to `batch_size` sentences, in a
  // fixed order; results are returned in input order.
  std::vector<std::vector<std::string>> PredictAll(const std::vector<Sentence> &sentences,
                                                   int batch_size = 32) const;
  // Per-position label distributions (N x L); softmax architectures only.
  Tensor Distributions(const Sentence &sentence) const;

  void Save(std::ostream &out, std::optional<double> recorded_f1 = std::nullopt) const;
  static NeuralTagger Load(std::istream &in, std::optional<double> *recorded_f1 = nullptr);

 private:
  NeuralTagger(const ArchitectureConfig &config, Vocabulary vocab, int embedding_dim,
               int max_length, const EmbeddingTable *pretrained);

  // Per-position logits (B x L each). With `teacher`, decoders consume the
  // gold previous label; otherwise their own greedy prediction.
  std::vector<Var> Logits(Graph &g, Batch batch, std::mt19937_64 &rng,
                          const std::vector<std::vector<int>> *teacher) const;
  std::vector<Var> WordInputs(Graph &g, Batch batch, Parameter &table, std::mt19937_64 &rng,
                              bool chars) const;
  std::vector<Var> Recur(Graph &g, const Cell &fwd, const Cell *bwd, const std::vector<Var> &xs,
                         const CellState *init_fwd, const CellState *init_bwd,
                         CellState *last_fwd = nullptr, CellState *last_bwd = nullptr) const;
  Var Affine(Graph &g, Var x, const std::string &name) const;
  Parameter &P(const std::string &name) const;

  ArchitectureConfig config_;
  Vocabulary vocab_;
  int embedding_dim_ = 0;
  int max_length_ = 0;
  // Mutable: graphs built by const methods accumulate into parameter grads.
  mutable ParameterStore params_;
  std::map<std::string, Cell> cells_;
  CharConv char_conv_;
};

}  // namespace conceptag::nn

#endif  // CONCEPTAG_NN_TAGGER_H_
