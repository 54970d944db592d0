#include "conceptag/eval/scorer.h"

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <set>
#include <tuple>

#include "conceptag/corpus/corpus.h"
#include "conceptag/errors.h"
#include "conceptag/eval/chunks.h"

namespace conceptag::eval {
namespace {

std::string Printf(const char *format, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), format, value);
  return buffer;
}

bool SameTag(const std::string &a, const std::string &b) {
  return a == b || (IsOutsideTag(a) && IsOutsideTag(b));
}

}  // namespace

void ChunkScores::Finalize() {
  precision = predicted > 0 ? static_cast<double>(correct) / predicted : 0.0;
  recall = gold > 0 ? static_cast<double>(correct) / gold : 0.0;
  f1 = precision + recall > 0.0
           ? 2.0 * precision * recall / (precision + recall)
           : 0.0;
}

EvalReport Score(const std::vector<TagSequence> &gold,
                 const std::vector<TagSequence> &pred) {
  if (gold.size() != pred.size()) {
    throw ShapeError("gold has " + std::to_string(gold.size()) +
                     " sentences but predictions have " +
                     std::to_string(pred.size()));
  }
  EvalReport report;
  for (size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size()) {
      throw ShapeError("sentence " + std::to_string(s) + ": gold length " +
                       std::to_string(gold[s].size()) + " != predicted length " +
                       std::to_string(pred[s].size()));
    }
    for (size_t i = 0; i < gold[s].size(); ++i) {
      ++report.tokens;
      if (SameTag(gold[s][i], pred[s][i])) ++report.correct_tokens;
    }
    std::vector<ChunkSpan> gold_chunks = ExtractChunks(gold[s]);
    std::vector<ChunkSpan> pred_chunks = ExtractChunks(pred[s]);
    for (const ChunkSpan &c : gold_chunks) ++report.per_concept[c.concept_name].gold;
    for (const ChunkSpan &c : pred_chunks) {
      ++report.per_concept[c.concept_name].predicted;
    }
    // Both lists are sorted; correct chunks are the exact intersection.
    std::vector<ChunkSpan> correct;
    std::set_intersection(gold_chunks.begin(), gold_chunks.end(),
                          pred_chunks.begin(), pred_chunks.end(),
                          std::back_inserter(correct),
                          [](const ChunkSpan &a, const ChunkSpan &b) {
                            return std::tie(a.start, a.end, a.concept_name) <
                                   std::tie(b.start, b.end, b.concept_name);
                          });
    for (const ChunkSpan &c : correct) ++report.per_concept[c.concept_name].correct;
  }
  for (auto &[name, scores] : report.per_concept) {
    scores.Finalize();
    report.overall.correct += scores.correct;
    report.overall.predicted += scores.predicted;
    report.overall.gold += scores.gold;
  }
  report.overall.Finalize();
  if (report.tokens > 0) {
    report.token_accuracy =
        static_cast<double>(report.correct_tokens) / report.tokens;
  }
  return report;
}

std::string FormatPercent(double fraction) { return Printf("%.2f", 100.0 * fraction); }

std::string FormatConlleval(const EvalReport &report) {
  std::string out;
  out += "processed " + std::to_string(report.tokens) + " tokens with " +
         std::to_string(report.overall.gold) + " phrases; found: " +
         std::to_string(report.overall.predicted) + " phrases; correct: " +
         std::to_string(report.overall.correct) + ".\n";
  if (report.tokens > 0) {
    out += "accuracy: " + Printf("%6.2f", 100.0 * report.token_accuracy) + "%; ";
    out += "precision: " + Printf("%6.2f", 100.0 * report.overall.precision) + "%; ";
    out += "recall: " + Printf("%6.2f", 100.0 * report.overall.recall) + "%; ";
    out += "FB1: " + Printf("%6.2f", 100.0 * report.overall.f1) + "\n";
  }
  for (const auto &[name, s] : report.per_concept) {
    char label[256];
    std::snprintf(label, sizeof(label), "%17s: ", name.c_str());
    out += label;
    out += "precision: " + Printf("%6.2f", 100.0 * s.precision) + "%; ";
    out += "recall: " + Printf("%6.2f", 100.0 * s.recall) + "%; ";
    out += "FB1: " + Printf("%6.2f", 100.0 * s.f1) + "  " +
           std::to_string(s.predicted) + "\n";
  }
  return out;
}

}  // namespace conceptag::eval
