#ifndef CONCEPTAG_TESTS_COMMON_TOY_DATA_H_
#define CONCEPTAG_TESTS_COMMON_TOY_DATA_H_

#include <string>
#include <utility>
#include <vector>

#include "conceptag/corpus/corpus.h"

namespace conceptag::testing {

inline Sentence MakeSentence(const std::vector<std::string> &words,
                             const std::vector<std::string> &tags, bool with_pos = false) {
  Sentence s;
  for (const auto &w : words) {
    Token t{w, std::nullopt, std::nullopt};
    if (with_pos) {
      t.pos = "P" + w.substr(0, 1);
      t.lemma = w + "_l";
    }
    s.tokens.push_back(t);
  }
  s.tags = tags;
  return s;
}

// Ten sentences in which each word type determines its tag.
inline std::vector<Sentence> SeparableToy() {
  const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> rows = {
      {{"fly", "to", "boston"}, {"O", "O", "B-city"}},
      {{"fly", "to", "denver"}, {"O", "O", "B-city"}},
      {{"from", "boston", "to", "denver"}, {"O", "B-city", "O", "B-city"}},
      {{"list", "flights", "monday"}, {"O", "O", "B-day"}},
      {{"flights", "on", "tuesday"}, {"O", "O", "B-day"}},
      {{"new", "york", "to", "boston"}, {"B-city", "I-city", "O", "B-city"}},
      {{"to", "new", "york", "monday"}, {"O", "B-city", "I-city", "B-day"}},
      {{"denver", "on", "tuesday"}, {"B-city", "O", "B-day"}},
      {{"list", "flights", "to", "new", "york"}, {"O", "O", "O", "B-city", "I-city"}},
      {{"from", "denver"}, {"O", "B-city"}},
  };
  std::vector<Sentence> out;
  for (const auto &[w, t] : rows) out.push_back(MakeSentence(w, t));
  return out;
}

}  // namespace conceptag::testing

#endif  // CONCEPTAG_TESTS_COMMON_TOY_DATA_H_
