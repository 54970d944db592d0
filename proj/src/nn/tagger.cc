#include "conceptag/nn/tagger.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "conceptag/corpus/utf8.h"
#include "conceptag/errors.h"
#include "conceptag/serialize.h"

namespace conceptag::nn {
namespace {

constexpr const char *kUnknownWordKey = "<unk>";

const std::vector<std::pair<ArchKind, std::string>> &ArchTable() {
  static const std::vector<std::pair<ArchKind, std::string>> table = {
      {ArchKind::kRnn, "RNN"},
      {ArchKind::kLstm, "LSTM"},
      {ArchKind::kLstmCharRep, "LSTM-CHAR-REP"},
      {ArchKind::kLstm2Ch, "LSTM-2CH"},
      {ArchKind::kGru, "GRU"},
      {ArchKind::kConv, "CONV"},
      {ArchKind::kFcInit, "FC-INIT"},
      {ArchKind::kEncoder, "ENCODER"},
      {ArchKind::kAttention, "ATTENTION"},
      {ArchKind::kLstmCrf, "LSTM-CRF"},
      {ArchKind::kLstmCrfCharRep, "LSTM-CRF-CHAR-REP"},
  };
  return table;
}

CellKind EncoderCell(ArchKind kind) {
  switch (kind) {
    case ArchKind::kRnn: return CellKind::kElman;
    case ArchKind::kGru:
    case ArchKind::kConv:
    case ArchKind::kFcInit: return CellKind::kGru;
    default: return CellKind::kLstm;
  }
}

int ArgMax(const Tensor &row_source, long row) {
  int best = 0;
  for (long c = 1; c < row_source.cols(); ++c) {
    if (row_source(row, c) > row_source(row, best)) best = static_cast<int>(c);
  }
  return best;
}

std::vector<std::vector<int>> GoldIds(const Vocabulary &vocab, Batch batch) {
  std::vector<std::vector<int>> gold;
  for (const Sentence *s : batch) {
    std::vector<int> ids;
    for (const std::string &tag : s->tags) {
      const int id = vocab.LabelId(tag);
      if (id < 0) throw ValidationError("neural tagger: tag " + tag + " not in the label set");
      ids.push_back(id);
    }
    gold.push_back(std::move(ids));
  }
  return gold;
}

void CheckBatch(Batch batch) {
  if (batch.empty()) throw ShapeError("neural tagger: empty batch");
  const size_t n = batch[0]->size();
  if (n == 0) throw ShapeError("neural tagger: empty sentence");
  for (const Sentence *s : batch) {
    if (s->size() != n) throw ShapeError("neural tagger: batch sentences differ in length");
  }
}

std::string ConfigLine(const ArchitectureConfig &c) {
  std::ostringstream out;
  out << "kind " << ArchName(c.kind) << " hidden " << c.hidden << " epochs " << c.epochs
      << " batch_size " << c.batch_size << " lr " << serialize::Hex(c.lr) << " drop_rate "
      << serialize::Hex(c.drop_rate) << " emb_norm " << serialize::Hex(c.emb_norm)
      << " bidirectional " << c.bidirectional << " freeze_embeddings " << c.freeze_embeddings
      << " seed " << c.seed << " embedding_dim " << c.embedding_dim;
  return out.str();
}

void WriteList(std::ostream &out, const char *name, const std::vector<std::string> &items) {
  out << name << ' ' << items.size() << "\n";
  for (const std::string &item : items) out << item << "\n";
}

std::vector<std::string> ReadList(std::istream &in, const char *name) {
  serialize::Expect(in, name);
  std::vector<std::string> items;
  for (long long n = serialize::NextInt(in, name); n > 0; --n) items.push_back(serialize::Next(in, name));
  return items;
}

}  // namespace

const std::vector<std::string> &ArchNames() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto &[kind, name] : ArchTable()) out.push_back(name);
    return out;
  }();
  return names;
}

std::string ArchName(ArchKind kind) {
  for (const auto &[k, name] : ArchTable()) {
    if (k == kind) return name;
  }
  throw ConfigError("unknown architecture kind");
}

ArchKind ParseArch(const std::string &name) {
  for (const auto &[kind, n] : ArchTable()) {
    if (n == name) return kind;
  }
  throw ConfigError("unknown architecture '" + name + "'");
}

void ArchitectureConfig::Validate() const {
  auto fail = [](const std::string &what) { throw ConfigError("architecture config: " + what); };
  if (hidden < 1) fail("hidden must be positive");
  if (bidirectional && hidden % 2 != 0) fail("hidden must be even for bidirectional models");
  if (kind == ArchKind::kLstm2Ch && hidden % (bidirectional ? 4 : 2) != 0) {
    fail("LSTM-2CH hidden must be divisible by 4");
  }
  if (epochs < 0) fail("epochs must be >= 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr must be positive");
  if (!(drop_rate >= 0.0 && drop_rate < 1.0)) fail("drop_rate must lie in [0, 1)");
  if (!(emb_norm > 0.0)) fail("emb_norm must be positive");
  if (embedding_dim < 1) fail("embedding_dim must be positive");
}

int ArchitectureConfig::DirectionHidden() const {
  const int width = kind == ArchKind::kLstm2Ch ? hidden / 2 : hidden;
  return bidirectional ? width / 2 : width;
}

Vocabulary Vocabulary::Build(const std::vector<Sentence> &train,
                             const std::vector<std::string> &labels,
                             const EmbeddingTable *pretrained) {
  std::set<std::string> words, chars;
  for (const Sentence &s : train) {
    for (const Token &t : s.tokens) {
      words.insert(LookupKey(t.surface));
      for (std::string &c : utf8::Characters(t.surface)) chars.insert(std::move(c));
    }
  }
  if (pretrained) {
    for (const auto &[key, vec] : pretrained->vectors) words.insert(key);
  }
  words.erase(kUnknownWordKey);
  std::vector<std::string> word_list{kUnknownWordKey};
  word_list.insert(word_list.end(), words.begin(), words.end());
  std::vector<std::string> char_list{"<pad>", "<unk>"};
  for (const std::string &c : chars) {
    if (c != "<pad>" && c != "<unk>") char_list.push_back(c);
  }
  return FromLists(std::move(word_list), std::move(char_list), labels);
}

Vocabulary Vocabulary::FromLists(std::vector<std::string> words, std::vector<std::string> chars,
                                 std::vector<std::string> labels) {
  if (words.empty() || chars.size() < 2 || labels.empty()) {
    throw ParameterError("vocabulary: words, chars and labels must be non-empty");
  }
  Vocabulary v;
  v.words = std::move(words);
  v.chars = std::move(chars);
  v.labels = std::move(labels);
  for (size_t i = 0; i < v.words.size(); ++i) v.word_index.emplace(v.words[i], static_cast<int>(i));
  for (size_t i = 0; i < v.chars.size(); ++i) v.char_index.emplace(v.chars[i], static_cast<int>(i));
  for (size_t i = 0; i < v.labels.size(); ++i) {
    if (!v.label_index.emplace(v.labels[i], static_cast<int>(i)).second) {
      throw ParameterError("vocabulary: duplicate label " + v.labels[i]);
    }
  }
  return v;
}

int Vocabulary::WordId(std::string_view surface) const {
  auto it = word_index.find(LookupKey(surface));
  return it == word_index.end() ? 0 : it->second;
}

std::vector<int> Vocabulary::CharIds(std::string_view surface) const {
  std::vector<int> ids;
  for (const std::string &c : utf8::Characters(surface)) {
    auto it = char_index.find(c);
    ids.push_back(it == char_index.end() || it->second < 2 ? kCharUnknown : it->second);
  }
  return ids;
}

int Vocabulary::LabelId(const std::string &label) const {
  auto it = label_index.find(label);
  return it == label_index.end() ? -1 : it->second;
}

NeuralTagger NeuralTagger::Build(const ArchitectureConfig &config,
                                 const std::vector<Sentence> &train,
                                 const std::vector<std::string> &labels,
                                 const EmbeddingTable *pretrained) {
  config.Validate();
  if (train.empty()) throw TrainingError("neural tagger: empty training split");
  int max_length = 1;
  for (const Sentence &s : train) max_length = std::max(max_length, static_cast<int>(s.size()));
  const int dim = pretrained && pretrained->dimension > 0
                      ? static_cast<int>(pretrained->dimension)
                      : config.embedding_dim;
  return NeuralTagger(config, Vocabulary::Build(train, labels, pretrained), dim, max_length,
                      pretrained);
}

NeuralTagger::NeuralTagger(const ArchitectureConfig &config, Vocabulary vocab, int embedding_dim,
                           int max_length, const EmbeddingTable *pretrained)
    : config_(config), vocab_(std::move(vocab)), embedding_dim_(embedding_dim),
      max_length_(max_length) {
  config_.Validate();
  std::mt19937_64 rng(config_.seed);
  const int d = embedding_dim_;
  const int v = static_cast<int>(vocab_.words.size());
  const int labels = NumLabels();
  const int dir = config_.DirectionHidden();
  const bool bi = config_.bidirectional;
  const ArchKind kind = config_.kind;

  auto word_table = [&](const std::string &name, bool trainable) {
    Parameter &p = params_.Add(name, v, d, d, rng);
    p.embedding = true;
    p.trainable = trainable;
    if (pretrained) {
      for (int i = 0; i < v; ++i) {
        if (const std::vector<double> *vec = pretrained->Find(vocab_.words[i])) {
          for (int k = 0; k < d; ++k) p.value(i, k) = (*vec)[k];
        }
      }
    }
  };
  word_table("emb.word", !config_.freeze_embeddings && kind != ArchKind::kConv);
  if (kind == ArchKind::kLstm2Ch) word_table("emb.frozen", false);

  int input = d;
  if (config_.UsesChars()) {
    char_conv_ = CharConv(static_cast<int>(vocab_.chars.size()), kCharDim, config_.hidden / 2,
                          params_, "char", rng);
    input += char_conv_.filters();
  }
  const CellKind cell = EncoderCell(kind);
  cells_["enc.f"] = Cell(cell, input, dir, params_, "enc.f", rng);
  if (bi) cells_["enc.b"] = Cell(cell, input, dir, params_, "enc.b", rng);
  if (kind == ArchKind::kLstm2Ch) {
    cells_["ch2.f"] = Cell(cell, d, dir, params_, "ch2.f", rng);
    if (bi) cells_["ch2.b"] = Cell(cell, d, dir, params_, "ch2.b", rng);
  }
  // Width of the per-position encoder output.
  const int width = config_.hidden;
  if (kind == ArchKind::kConv) {
    const int filters = config_.hidden / 2;
    for (int w = 1; w <= 3; ++w) {
      params_.Add("conv" + std::to_string(w) + ".w", w * d, filters, w * d, rng);
      params_.Add("conv" + std::to_string(w) + ".b", 1, filters, w * d, rng);
    }
    params_.Add("init.w", 3 * filters, width, 3 * filters, rng);
    params_.Add("init.b", 1, width, 3 * filters, rng);
  } else if (kind == ArchKind::kFcInit) {
    params_.Add("fc.w", d, width, d, rng);
    params_.Add("fc.b", 1, width, d, rng);
    params_.Add("init.w", width, width, width, rng);
    params_.Add("init.b", 1, width, width, rng);
  } else if (config_.UsesDecoder()) {
    Parameter &label_emb = params_.Add("label.emb", labels + 1, kLabelDim, kLabelDim, rng);
    label_emb.embedding = true;
    int dec_input = kLabelDim;
    if (kind == ArchKind::kAttention) {
      params_.Add("attn.w", d + width, max_length_, d + width, rng);
      params_.Add("attn.b", 1, max_length_, d + width, rng);
      dec_input += width;
    }
    cells_["dec"] = Cell(CellKind::kLstm, dec_input, width, params_, "dec", rng);
  }
  params_.Add("out.w", width, labels, width, rng);
  params_.Add("out.b", 1, labels, width, rng);
  if (config_.UsesCrf()) params_.Add("crf.trans", labels + 2, labels + 2, labels + 2, rng);
}

Parameter &NeuralTagger::P(const std::string &name) const {
  Parameter *p = params_.Find(name);
  if (!p) throw Error("neural tagger: missing parameter " + name);
  return *p;
}

Var NeuralTagger::Affine(Graph &g, Var x, const std::string &name) const {
  return Add(MatMul(x, g.Param(P(name + ".w"))), g.Param(P(name + ".b")));
}

std::vector<Var> NeuralTagger::WordInputs(Graph &g, Batch batch, Parameter &table,
                                          std::mt19937_64 &rng, bool chars) const {
  const size_t steps = batch[0]->size();
  Var tv = g.Param(table);
  std::vector<Var> xs;
  for (size_t t = 0; t < steps; ++t) {
    std::vector<int> ids;
    for (const Sentence *s : batch) ids.push_back(vocab_.WordId(s->tokens[t].surface));
    Var x = Gather(tv, ids);
    if (chars) {
      std::vector<Var> reps;
      for (const Sentence *s : batch) {
        reps.push_back(char_conv_.Embed(g, vocab_.CharIds(s->tokens[t].surface)));
      }
      x = ConcatCols({x, ConcatRows(reps)});
    }
    xs.push_back(Dropout(x, config_.drop_rate, rng));
  }
  return xs;
}

std::vector<Var> NeuralTagger::Recur(Graph &g, const Cell &fwd, const Cell *bwd,
                                     const std::vector<Var> &xs, const CellState *init_fwd,
                                     const CellState *init_bwd, CellState *last_fwd,
                                     CellState *last_bwd) const {
  const long batch = xs[0].rows();
  const size_t steps = xs.size();
  std::vector<Var> out_f(steps), out_b(steps);
  CellState state = init_fwd ? *init_fwd : fwd.Zero(g, batch);
  for (size_t t = 0; t < steps; ++t) {
    state = fwd.Step(g, xs[t], state);
    out_f[t] = state.h;
  }
  if (last_fwd) *last_fwd = state;
  if (!bwd) return out_f;
  state = init_bwd ? *init_bwd : bwd->Zero(g, batch);
  for (size_t t = steps; t-- > 0;) {
    state = bwd->Step(g, xs[t], state);
    out_b[t] = state.h;
  }
  if (last_bwd) *last_bwd = state;
  std::vector<Var> out(steps);
  for (size_t t = 0; t < steps; ++t) out[t] = ConcatCols({out_f[t], out_b[t]});
  return out;
}

std::vector<Var> NeuralTagger::Logits(Graph &g, Batch batch, std::mt19937_64 &rng,
                                      const std::vector<std::vector<int>> *teacher) const {
  CheckBatch(batch);
  const size_t steps = batch[0]->size();
  const long size = static_cast<long>(batch.size());
  const ArchKind kind = config_.kind;
  const bool bi = config_.bidirectional;
  const double drop = config_.drop_rate;
  const Cell &enc_f = cells_.at("enc.f");
  const Cell *enc_b = bi ? &cells_.at("enc.b") : nullptr;
  std::vector<Var> logits;

  // Splits a B x hidden initial vector into per-direction states.
  auto init_states = [&](Var h0, CellState *f, CellState *b) {
    const long dir = config_.DirectionHidden();
    f->h = bi ? SliceCols(h0, 0, dir) : h0;
    if (bi) b->h = SliceCols(h0, dir, dir);
  };

  if (config_.UsesDecoder()) {
    std::vector<Var> xs = WordInputs(g, batch, P("emb.word"), rng, false);
    CellState last_f, last_b;
    std::vector<Var> memory = Recur(g, enc_f, enc_b, xs, nullptr, nullptr, &last_f, &last_b);
    for (Var &m : memory) m = Dropout(m, drop, rng);
    CellState state;
    state.h = bi ? ConcatCols({last_f.h, last_b.h}) : last_f.h;
    state.c = bi ? ConcatCols({last_f.c, last_b.c}) : last_f.c;
    const Cell &dec = cells_.at("dec");
    Var label_table = g.Param(P("label.emb"));
    std::vector<int> prev(size, NumLabels());
    const long attend = std::min<long>(static_cast<long>(steps), max_length_);
    for (size_t t = 0; t < steps; ++t) {
      Var in = Gather(label_table, prev);
      if (kind == ArchKind::kAttention) {
        Var scores = Affine(g, ConcatCols({xs[t], state.h}), "attn");
        Var weights = Softmax(SliceCols(scores, 0, attend));
        std::vector<Var> parts;
        for (long k = 0; k < attend; ++k) parts.push_back(ScaleRows(memory[k], SliceCols(weights, k, 1)));
        in = ConcatCols({in, AddN(parts)});
      }
      state = dec.Step(g, in, state);
      Var out = Affine(g, Dropout(state.h, drop, rng), "out");
      for (long b = 0; b < size; ++b) {
        prev[b] = teacher ? (*teacher)[b][t] : ArgMax(out.value(), b);
      }
      logits.push_back(out);
    }
    return logits;
  }

  std::vector<Var> hs;
  if (kind == ArchKind::kLstm2Ch) {
    std::vector<Var> xa = WordInputs(g, batch, P("emb.word"), rng, false);
    std::vector<Var> xb = WordInputs(g, batch, P("emb.frozen"), rng, false);
    std::vector<Var> ha = Recur(g, enc_f, enc_b, xa, nullptr, nullptr);
    std::vector<Var> hb = Recur(g, cells_.at("ch2.f"), bi ? &cells_.at("ch2.b") : nullptr, xb,
                                nullptr, nullptr);
    for (size_t t = 0; t < steps; ++t) hs.push_back(ConcatCols({ha[t], hb[t]}));
  } else if (kind == ArchKind::kConv || kind == ArchKind::kFcInit) {
    std::vector<Var> xs = WordInputs(g, batch, P("emb.word"), rng, false);
    Var h0;
    if (kind == ArchKind::kConv) {
      std::vector<Var> pooled;
      for (long b = 0; b < size; ++b) {
        std::vector<Var> rows;
        for (size_t t = 0; t < steps; ++t) rows.push_back(SliceRows(xs[t], b, 1));
        if (steps < 3) rows.push_back(g.Constant(Tensor::Zero(3 - steps, embedding_dim_)));
        Var sentence = ConcatRows(rows);
        std::vector<Var> features;
        for (int w = 1; w <= 3; ++w) {
          const std::string name = "conv" + std::to_string(w);
          features.push_back(MaxOverTime(
              Conv1d(sentence, g.Param(P(name + ".w")), g.Param(P(name + ".b")), w)));
        }
        pooled.push_back(ConcatCols(features));
      }
      h0 = Tanh(Affine(g, ConcatRows(pooled), "init"));
    } else {
      std::vector<Var> projected;
      for (Var x : xs) projected.push_back(Tanh(Affine(g, x, "fc")));
      Var mean = Scale(AddN(projected), 1.0 / static_cast<double>(steps));
      h0 = Tanh(Affine(g, mean, "init"));
    }
    CellState init_f, init_b;
    init_states(h0, &init_f, &init_b);
    hs = Recur(g, enc_f, enc_b, xs, &init_f, bi ? &init_b : nullptr);
  } else {
    std::vector<Var> xs = WordInputs(g, batch, P("emb.word"), rng, config_.UsesChars());
    hs = Recur(g, enc_f, enc_b, xs, nullptr, nullptr);
  }
  for (Var h : hs) logits.push_back(Affine(g, Dropout(h, drop, rng), "out"));
  return logits;
}

Var NeuralTagger::Loss(Graph &g, Batch batch, std::mt19937_64 &rng) const {
  CheckBatch(batch);
  const std::vector<std::vector<int>> gold = GoldIds(vocab_, batch);
  std::vector<Var> logits = Logits(g, batch, rng, &gold);
  Var stacked = ConcatRows(logits);  // row t * B + b
  if (config_.UsesCrf()) return NeuralCrfLoss(stacked, g.Param(P("crf.trans")), gold);
  std::vector<int> flat;
  for (size_t t = 0; t < logits.size(); ++t) {
    for (size_t b = 0; b < batch.size(); ++b) flat.push_back(gold[b][t]);
  }
  return SoftmaxCrossEntropy(stacked, flat);
}

std::vector<std::vector<int>> NeuralTagger::PredictIds(Batch batch) const {
  CheckBatch(batch);
  Graph g(false);
  std::mt19937_64 unused(0);
  std::vector<Var> logits = Logits(g, batch, unused, nullptr);
  const size_t steps = logits.size();
  std::vector<std::vector<int>> out(batch.size(), std::vector<int>(steps));
  for (size_t b = 0; b < batch.size(); ++b) {
    if (config_.UsesCrf()) {
      Tensor emissions(static_cast<long>(steps), NumLabels());
      for (size_t t = 0; t < steps; ++t) emissions.row(t) = logits[t].value().row(b);
      out[b] = NeuralCrfViterbi(emissions, P("crf.trans").value);
    } else {
      for (size_t t = 0; t < steps; ++t) out[b][t] = ArgMax(logits[t].value(), b);
    }
  }
  return out;
}

std::vector<std::string> NeuralTagger::Predict(const Sentence &sentence) const {
  if (sentence.size() == 0) return {};
  const Sentence *one[] = {&sentence};
  std::vector<std::string> tags;
  for (int id : PredictIds(one)[0]) tags.push_back(vocab_.labels[id]);
  return tags;
}

std::vector<std::vector<std::string>> NeuralTagger::PredictAll(
    const std::vector<Sentence> &sentences, int batch_size) const {
  std::map<size_t, std::vector<size_t>> buckets;
  for (size_t i = 0; i < sentences.size(); ++i) buckets[sentences[i].size()].push_back(i);
  std::vector<std::vector<std::string>> out(sentences.size());
  const size_t chunk = static_cast<size_t>(std::max(1, batch_size));
  for (const auto &[length, indices] : buckets) {
    if (length == 0) continue;
    for (size_t begin = 0; begin < indices.size(); begin += chunk) {
      std::vector<const Sentence *> batch;
      for (size_t k = begin; k < std::min(indices.size(), begin + chunk); ++k) {
        batch.push_back(&sentences[indices[k]]);
      }
      auto ids = PredictIds(batch);
      for (size_t k = 0; k < batch.size(); ++k) {
        for (int id : ids[k]) out[indices[begin + k]].push_back(vocab_.labels[id]);
      }
    }
  }
  return out;
}

Tensor NeuralTagger::Distributions(const Sentence &sentence) const {
  if (config_.UsesCrf()) throw ConfigError("distributions: CRF output layers are not per-token");
  const Sentence *one[] = {&sentence};
  Graph g(false);
  std::mt19937_64 unused(0);
  std::vector<Var> logits = Logits(g, one, unused, nullptr);
  return Softmax(ConcatRows(logits)).value();
}

void NeuralTagger::Save(std::ostream &out, std::optional<double> recorded_f1) const {
  out << "conceptag-nn 1\n";
  out << "config " << ConfigLine(config_) << "\n";
  out << "dims " << embedding_dim_ << ' ' << max_length_ << "\n";
  out << "recorded_f1 " << (recorded_f1 ? serialize::Hex(*recorded_f1) : "none") << "\n";
  WriteList(out, "words", vocab_.words);
  WriteList(out, "chars", vocab_.chars);
  WriteList(out, "labels", vocab_.labels);
  const auto all = params_.All();
  out << "params " << all.size() << "\n";
  for (const Parameter *p : all) {
    out << p->name << ' ' << p->value.rows() << ' ' << p->value.cols();
    for (long i = 0; i < p->value.size(); ++i) out << ' ' << serialize::Hex(p->value.data()[i]);
    out << "\n";
  }
}

NeuralTagger NeuralTagger::Load(std::istream &in, std::optional<double> *recorded_f1) {
  using namespace serialize;
  Expect(in, "conceptag-nn");
  Expect(in, "1");
  Expect(in, "config");
  ArchitectureConfig c;
  Expect(in, "kind");
  c.kind = ParseArch(Next(in, "kind"));
  Expect(in, "hidden");
  c.hidden = static_cast<int>(NextInt(in, "hidden"));
  Expect(in, "epochs");
  c.epochs = static_cast<int>(NextInt(in, "epochs"));
  Expect(in, "batch_size");
  c.batch_size = static_cast<int>(NextInt(in, "batch_size"));
  Expect(in, "lr");
  c.lr = NextDouble(in, "lr");
  Expect(in, "drop_rate");
  c.drop_rate = NextDouble(in, "drop_rate");
  Expect(in, "emb_norm");
  c.emb_norm = NextDouble(in, "emb_norm");
  Expect(in, "bidirectional");
  c.bidirectional = NextInt(in, "bidirectional") != 0;
  Expect(in, "freeze_embeddings");
  c.freeze_embeddings = NextInt(in, "freeze_embeddings") != 0;
  Expect(in, "seed");
  c.seed = static_cast<uint64_t>(std::stoull(Next(in, "seed")));
  Expect(in, "embedding_dim");
  c.embedding_dim = static_cast<int>(NextInt(in, "embedding_dim"));
  Expect(in, "dims");
  const int dim = static_cast<int>(NextInt(in, "embedding dim"));
  const int max_length = static_cast<int>(NextInt(in, "max length"));
  Expect(in, "recorded_f1");
  const std::string f1 = Next(in, "recorded_f1");
  if (recorded_f1) *recorded_f1 = f1 == "none" ? std::nullopt : std::optional(ParseDouble(f1));
  std::vector<std::string> words = ReadList(in, "words");
  std::vector<std::string> chars = ReadList(in, "chars");
  std::vector<std::string> labels = ReadList(in, "labels");
  NeuralTagger tagger(c, Vocabulary::FromLists(std::move(words), std::move(chars), std::move(labels)),
                      dim, max_length, nullptr);
  Expect(in, "params");
  const long long count = NextInt(in, "param count");
  if (count != static_cast<long long>(tagger.params_.All().size())) {
    throw FormatError("checkpoint: parameter count does not match the architecture");
  }
  for (long long k = 0; k < count; ++k) {
    const std::string name = Next(in, "param name");
    Parameter *p = tagger.params_.Find(name);
    if (!p) throw FormatError("checkpoint: unexpected parameter " + name);
    const long long rows = NextInt(in, "rows"), cols = NextInt(in, "cols");
    if (rows != p->value.rows() || cols != p->value.cols()) {
      throw FormatError("checkpoint: shape mismatch for " + name);
    }
    for (long i = 0; i < p->value.size(); ++i) p->value.data()[i] = NextDouble(in, "value");
    if (!p->value.allFinite()) throw FormatError("checkpoint: non-finite values in " + name);
  }
  return tagger;
}

}  // namespace conceptag::nn
