#ifndef CONCEPTAG_CRF_FEATURES_H_
#define CONCEPTAG_CRF_FEATURES_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "conceptag/corpus/corpus.h"
#include "conceptag/corpus/embeddings.h"

namespace conceptag::crf {

enum class TemplateKind {
  kTokenWindow,
  kPosWindow,
  kPrefixWindow,
  kSuffixWindow,
  kLemmaCurrent,
  kConjPrevCur,
  kConjCurNext,
  kEmbeddingWindow,
  kCharNgramCurrent,
};

// One row of a feature template specification. Textual form:
//   token:-4..4   pos:-1..0   prefix:-1..0   prefix:-1..0:3   suffix:0..0
//   lemma   conj-prev-cur   conj-cur-next   emb:-4..4   char-ngrams
// Prefix/suffix templates without an explicit length emit lengths 1..4.
struct FeatureTemplate {
  TemplateKind kind = TemplateKind::kTokenWindow;
  int lo = 0;
  int hi = 0;
  std::optional<int> affix_length;

  // Throws ParameterError on unknown kinds, empty ranges, or bad lengths.
  static FeatureTemplate Parse(std::string_view text);
  std::string ToString() const;
  bool NeedsPos() const { return kind == TemplateKind::kPosWindow; }
  bool NeedsLemma() const { return kind == TemplateKind::kLemmaCurrent; }
  bool NeedsEmbeddings() const { return kind == TemplateKind::kEmbeddingWindow; }
};

// Parses a ';'-separated template list.
std::vector<FeatureTemplate> ParseTemplates(std::string_view spec);
std::string TemplatesToString(std::span<const FeatureTemplate> templates);

struct Feature {
  std::string key;
  double value = 1.0;
};

// Features active at `position`. Discrete features have value 1; window
// offsets past either end produce "BOS-k"/"EOS-k" markers; embedding
// windows contribute one real-valued feature per (offset, dimension), zero
// for words without a vector. Throws ConfigError if a template needs data
// the sentence or `embeddings` lacks.
std::vector<Feature> ApplyTemplates(const Sentence &sentence, size_t position,
                                    std::span<const FeatureTemplate> templates,
                                    const EmbeddingTable *embeddings = nullptr);

// Checks every sentence carries the columns the templates reference.
void CheckTemplateInputs(const std::vector<Sentence> &sentences,
                         std::span<const FeatureTemplate> templates,
                         const EmbeddingTable *embeddings);

}  // namespace conceptag::crf

#endif  // CONCEPTAG_CRF_FEATURES_H_
