#include "conceptag/wfst/ngram_lm.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "conceptag/errors.h"
#include "conceptag/serialize.h"

namespace conceptag::wfst {
namespace {

using Gram = std::vector<std::string>;

NgramLm::History DropOldest(const NgramLm::History &h) {
  return NgramLm::History(h.begin() + 1, h.end());
}

}  // namespace

NgramLm NgramLm::Train(const std::vector<std::vector<std::string>> &sequences,
                       int order, double discount) {
  if (order < 1) throw ParameterError("n-gram order must be >= 1");
  if (!(discount > 0.0 && discount < 1.0)) {
    throw ParameterError("Kneser-Ney discount must lie in (0, 1)");
  }
  if (sequences.empty()) throw ParameterError("cannot train an LM on zero sequences");

  NgramLm lm;
  lm.order_ = order;
  lm.discount_ = discount;

  // Raw counts of every k-gram (k <= order) that ends on a predicted label.
  std::map<Gram, double> raw;
  std::vector<std::string> vocab;
  for (const auto &seq : sequences) {
    Gram padded;
    padded.reserve(seq.size() + 2);
    padded.push_back(kSentenceStart);
    padded.insert(padded.end(), seq.begin(), seq.end());
    padded.push_back(kSentenceEnd);
    for (size_t i = 1; i < padded.size(); ++i) {
      vocab.push_back(padded[i]);
      for (int k = 1; k <= order && static_cast<int>(i) - k + 1 >= 0; ++k) {
        raw[Gram(padded.begin() + (i - k + 1), padded.begin() + i + 1)] += 1.0;
      }
    }
  }
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  lm.vocabulary_ = vocab;

  // Lower orders count distinct left contexts, except for grams anchored at
  // "<s>", which have none and keep their raw counts.
  std::map<Gram, double> continuation;
  for (const auto &[gram, count] : raw) {
    if (gram.size() >= 2) continuation[DropOldest(gram)] += 1.0;
  }
  // adjusted[k][history][word]
  std::vector<std::map<History, std::map<std::string, double>>> adjusted(order + 1);
  for (const auto &[gram, count] : raw) {
    const int k = static_cast<int>(gram.size());
    double a = count;
    if (k < order && gram.front() != kSentenceStart) a = continuation.at(gram);
    History h(gram.begin(), gram.end() - 1);
    adjusted[k][h][gram.back()] = a;
  }

  const double uniform = 1.0 / static_cast<double>(vocab.size());
  for (int k = 1; k <= order; ++k) {
    for (const auto &[h, counts] : adjusted[k]) {
      double denom = 0.0;
      for (const auto &[w, a] : counts) denom += a;
      const double gamma = discount * static_cast<double>(counts.size()) / denom;
      HistoryEntry entry;
      entry.backoff = gamma;
      for (const auto &[w, a] : counts) {
        double lower = h.empty() ? uniform : lm.Prob(DropOldest(h), w);
        entry.probs[w] = std::max(a - discount, 0.0) / denom + gamma * lower;
      }
      lm.histories_.emplace(h, std::move(entry));
    }
  }
  return lm;
}

NgramLm::History NgramLm::StateFor(const History &history) const {
  size_t keep = std::min(history.size(), static_cast<size_t>(order_ - 1));
  History h(history.end() - keep, history.end());
  while (!h.empty() && !histories_.count(h)) h.erase(h.begin());
  return h;
}

double NgramLm::Prob(const History &history, const std::string &word) const {
  if (!std::binary_search(vocabulary_.begin(), vocabulary_.end(), word)) return 0.0;
  History h = StateFor(history);
  double scale = 1.0;
  while (true) {
    const HistoryEntry &entry = histories_.at(h);
    auto it = entry.probs.find(word);
    if (it != entry.probs.end()) return scale * it->second;
    scale *= entry.backoff;
    if (h.empty()) return scale / static_cast<double>(vocabulary_.size());
    h.erase(h.begin());
  }
}

double NgramLm::SentenceLogProb(const std::vector<std::string> &labels) const {
  History h = {kSentenceStart};
  double logp = 0.0;
  for (const std::string &w : labels) {
    logp += std::log(Prob(h, w));
    h.push_back(w);
  }
  return logp + std::log(Prob(h, kSentenceEnd));
}

Fst NgramLm::ToAcceptor(std::shared_ptr<const SymbolTable> labels) const {
  Fst fst(labels, labels);
  std::map<History, int> ids;
  for (const auto &[h, entry] : histories_) ids[h] = fst.AddState();
  fst.SetStart(ids.at(StateFor({kSentenceStart})));
  for (const auto &[h, entry] : histories_) {
    const int s = ids.at(h);
    if (!h.empty()) {
      fst.AddArc(s, {kEpsilon, kEpsilon, -std::log(entry.backoff), ids.at(DropOldest(h))});
    }
    for (const auto &[w, p] : entry.probs) {
      if (w == kSentenceEnd) continue;
      const int label = labels->Find(w);
      if (label <= kEpsilon) continue;
      History next = h;
      next.push_back(w);
      fst.AddArc(s, {label, label, -std::log(p), ids.at(StateFor(next))});
    }
    fst.SetFinal(s, -std::log(Prob(h, kSentenceEnd)));
  }
  fst.ArcSortInput();
  return fst;
}

void NgramLm::WriteArpa(std::ostream &out) const {
  // grams[k] = (gram, log10 prob, optional log10 backoff)
  std::vector<std::vector<std::pair<Gram, double>>> grams(order_ + 1);
  for (const auto &[h, entry] : histories_) {
    for (const auto &[w, p] : entry.probs) {
      Gram g = h;
      g.push_back(w);
      grams[g.size()].emplace_back(g, std::log10(p));
    }
  }
  if (histories_.count({kSentenceStart})) {
    grams[1].emplace_back(Gram{kSentenceStart}, -99.0);
  }
  for (auto &level : grams) std::sort(level.begin(), level.end());
  out << "\\data\\\n";
  for (int k = 1; k <= order_; ++k) out << "ngram " << k << "=" << grams[k].size() << "\n";
  char number[64];
  for (int k = 1; k <= order_; ++k) {
    out << "\n\\" << k << "-grams:\n";
    for (const auto &[g, logp] : grams[k]) {
      std::snprintf(number, sizeof(number), "%.6f", logp);
      out << number << '\t';
      for (size_t i = 0; i < g.size(); ++i) out << (i ? " " : "") << g[i];
      auto it = histories_.find(g);
      if (k < order_ && it != histories_.end()) {
        std::snprintf(number, sizeof(number), "%.6f", std::log10(it->second.backoff));
        out << '\t' << number;
      }
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

void NgramLm::Save(std::ostream &out) const {
  out << "conceptag-ngram 1\n";
  out << "order " << order_ << " discount " << serialize::Hex(discount_) << "\n";
  out << "vocabulary " << vocabulary_.size();
  for (const auto &w : vocabulary_) out << ' ' << w;
  out << "\nhistories " << histories_.size() << "\n";
  for (const auto &[h, entry] : histories_) {
    out << h.size();
    for (const auto &w : h) out << ' ' << w;
    out << ' ' << serialize::Hex(entry.backoff) << ' ' << entry.probs.size();
    for (const auto &[w, p] : entry.probs) out << ' ' << w << ' ' << serialize::Hex(p);
    out << "\n";
  }
}

NgramLm NgramLm::Load(std::istream &in) {
  using namespace serialize;
  Expect(in, "conceptag-ngram");
  Expect(in, "1");
  NgramLm lm;
  Expect(in, "order");
  lm.order_ = static_cast<int>(NextInt(in, "order"));
  Expect(in, "discount");
  lm.discount_ = NextDouble(in, "discount");
  Expect(in, "vocabulary");
  for (long long n = NextInt(in, "vocabulary size"); n > 0; --n) {
    lm.vocabulary_.push_back(Next(in, "vocabulary"));
  }
  Expect(in, "histories");
  for (long long n = NextInt(in, "history count"); n > 0; --n) {
    History h;
    for (long long k = NextInt(in, "history length"); k > 0; --k) h.push_back(Next(in, "history"));
    HistoryEntry entry;
    entry.backoff = NextDouble(in, "backoff");
    for (long long k = NextInt(in, "entry count"); k > 0; --k) {
      std::string w = Next(in, "word");
      entry.probs[w] = NextDouble(in, "probability");
    }
    lm.histories_.emplace(std::move(h), std::move(entry));
  }
  if (lm.order_ < 1 || !lm.histories_.count({})) throw FormatError("malformed n-gram model");
  return lm;
}

}  // namespace conceptag::wfst
