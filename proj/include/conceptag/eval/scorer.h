#ifndef CONCEPTAG_EVAL_SCORER_H_
#define CONCEPTAG_EVAL_SCORER_H_

#include <map>
#include <string>
#include <vector>

namespace conceptag::eval {

using TagSequence = std::vector<std::string>;

// Chunk counts and the rates derived from them. Rates are fractions in
// [0, 1]; multiply by 100 for display.
struct ChunkScores {
  size_t correct = 0;
  size_t predicted = 0;
  size_t gold = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  // Recomputes the rates from the counts.
  void Finalize();
};

struct EvalReport {
  std::map<std::string, ChunkScores> per_concept;
  ChunkScores overall;
  size_t tokens = 0;
  size_t correct_tokens = 0;
  double token_accuracy = 0.0;

  double F1Percent() const { return 100.0 * overall.f1; }
};

// Chunk-level precision/recall/F1 with conlleval chunking rules. Throws
// ShapeError naming the first sentence whose length disagrees.
EvalReport Score(const std::vector<TagSequence> &gold,
                 const std::vector<TagSequence> &pred);

// Renders the report in conlleval's text layout.
std::string FormatConlleval(const EvalReport &report);

// Two-decimal percentage as printed in result tables, e.g. "93.98".
std::string FormatPercent(double fraction);

}  // namespace conceptag::eval

#endif  // CONCEPTAG_EVAL_SCORER_H_
