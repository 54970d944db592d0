#ifndef CONCEPTAG_WFST_WFST_TAGGER_H_
#define CONCEPTAG_WFST_WFST_TAGGER_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "conceptag/corpus/corpus.h"
#include "conceptag/wfst/fst.h"
#include "conceptag/wfst/ngram_lm.h"

namespace conceptag::wfst {

inline constexpr const char *kUnknownWord = "<unk>";

using PairCounts = std::map<std::pair<std::string, std::string>, int64_t>;

// Single-state transducer from words to concepts. Each observed (w, c) pair
// becomes an arc at cost -ln(count(w, c) / count(., c)); the unknown-word
// symbol maps to every concept at cost ln |inventory|. Throws ParameterError
// on empty counts, non-positive counts, or concepts missing from the
// inventory.
Fst BuildEmissionFst(const PairCounts &pair_counts,
                     const std::vector<std::string> &concept_inventory);

struct WfstOptions {
  int order = 4;
  double discount = 0.75;
};

struct WfstDecodeResult {
  std::vector<std::string> tags;
  double cost = 0.0;
};

// Generative tagger: P(word | concept) emissions composed with a
// Kneser-Ney concept-sequence model and decoded by shortest path.
class WfstTagger {
 public:
  static WfstTagger Train(const std::vector<Sentence> &train,
                          const WfstOptions &options = {});
  // Assembles a tagger from already-built parts.
  WfstTagger(Fst emission, NgramLm lm);

  std::vector<std::string> Decode(const Sentence &sentence) const;
  // Decodes lookup keys (already lowercased and number-classed).
  WfstDecodeResult DecodeKeys(const std::vector<std::string> &keys) const;

  const Fst &emission() const { return emission_; }
  const NgramLm &lm() const { return lm_; }
  const Fst &lm_acceptor() const { return lm_acceptor_; }

  void Save(std::ostream &out) const;
  static WfstTagger Load(std::istream &in);

 private:
  Fst emission_;
  NgramLm lm_;
  Fst lm_acceptor_;
};

}  // namespace conceptag::wfst

#endif  // CONCEPTAG_WFST_WFST_TAGGER_H_
