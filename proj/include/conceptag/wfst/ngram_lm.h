#ifndef CONCEPTAG_WFST_NGRAM_LM_H_
#define CONCEPTAG_WFST_NGRAM_LM_H_

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "conceptag/wfst/fst.h"

namespace conceptag::wfst {

inline constexpr const char *kSentenceStart = "<s>";
inline constexpr const char *kSentenceEnd = "</s>";

// Interpolated Kneser-Ney n-gram model over label sequences, stored in
// backoff form: every history keeps the full interpolated probability of the
// labels observed after it, plus the weight that scales the next-shorter
// history's distribution for everything else.
class NgramLm {
 public:
  using History = std::vector<std::string>;

  struct HistoryEntry {
    std::map<std::string, double> probs;  // P(w | h) for observed w
    double backoff = 1.0;                 // gamma(h)
  };

  // Throws ParameterError unless order >= 1 and 0 < discount < 1, or if
  // `sequences` is empty.
  static NgramLm Train(const std::vector<std::vector<std::string>> &sequences,
                       int order, double discount = 0.75);

  int order() const { return order_; }
  double discount() const { return discount_; }
  // Every predictable label, "</s>" included and "<s>" excluded.
  const std::vector<std::string> &vocabulary() const { return vocabulary_; }
  const std::map<History, HistoryEntry> &histories() const { return histories_; }

  // P(w | history) through the backoff chain. Histories longer than order-1
  // are truncated; unseen histories back off to their longest stored
  // suffix. Returns 0 for labels outside the vocabulary.
  double Prob(const History &history, const std::string &word) const;

  // Natural-log probability of `labels` followed by "</s>", starting from
  // "<s>".
  double SentenceLogProb(const std::vector<std::string> &labels) const;

  // Longest stored suffix of `history`, truncated to order-1 labels.
  History StateFor(const History &history) const;

  // Backoff acceptor over `labels`: one state per stored history, arcs at
  // cost -ln P(w|h), epsilon backoff arcs at cost -ln gamma(h), final
  // weights -ln P(</s>|h). Labels absent from `labels` are skipped.
  Fst ToAcceptor(std::shared_ptr<const SymbolTable> labels) const;

  void WriteArpa(std::ostream &out) const;

  void Save(std::ostream &out) const;
  static NgramLm Load(std::istream &in);

 private:
  int order_ = 1;
  double discount_ = 0.75;
  std::vector<std::string> vocabulary_;
  std::map<History, HistoryEntry> histories_;
};

}  // namespace conceptag::wfst

#endif  // CONCEPTAG_WFST_NGRAM_LM_H_
