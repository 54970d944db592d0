#ifndef CONCEPTAG_TESTS_ORACLES_CONLLEVAL_ORACLE_H_
#define CONCEPTAG_TESTS_ORACLES_CONLLEVAL_ORACLE_H_

// Token-streaming chunk counter transcribed from the conlleval reference
// script (IOB subset: B, I, O). It never materializes spans, so it is an
// independent route to the numbers the scorer derives from span sets.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace conceptag::oracle {

struct ConllevalCounts {
  int correct_chunk = 0;
  int found_correct = 0;
  int found_guessed = 0;
  int correct_tags = 0;
  int token_counter = 0;
  std::map<std::string, int> correct_chunk_by_type;
  std::map<std::string, int> found_correct_by_type;
  std::map<std::string, int> found_guessed_by_type;
};

inline void SplitTag(std::string tag, std::string *prefix, std::string *type) {
  if (tag == "null") tag = "O";
  size_t dash = tag.find('-');
  if (dash == std::string::npos) {
    *prefix = tag;
    type->clear();
  } else {
    *prefix = tag.substr(0, dash);
    *type = tag.substr(dash + 1);
  }
}

inline bool EndOfChunk(const std::string &prev_tag, const std::string &tag,
                       const std::string &prev_type, const std::string &type) {
  bool end = false;
  if (prev_tag == "B" && tag == "B") end = true;
  if (prev_tag == "B" && tag == "O") end = true;
  if (prev_tag == "I" && tag == "B") end = true;
  if (prev_tag == "I" && tag == "O") end = true;
  if (prev_tag != "O" && prev_tag != "." && prev_type != type) end = true;
  return end;
}

inline bool StartOfChunk(const std::string &prev_tag, const std::string &tag,
                         const std::string &prev_type, const std::string &type) {
  bool start = false;
  if (prev_tag == "B" && tag == "B") start = true;
  if (prev_tag == "I" && tag == "B") start = true;
  if (prev_tag == "O" && tag == "B") start = true;
  if (prev_tag == "O" && tag == "I") start = true;
  if (tag != "O" && tag != "." && prev_type != type) start = true;
  return start;
}

inline ConllevalCounts RunConlleval(const std::vector<std::vector<std::string>> &gold,
                                    const std::vector<std::vector<std::string>> &pred) {
  ConllevalCounts c;
  std::string last_correct = "O", last_correct_type;
  std::string last_guessed = "O", last_guessed_type;
  bool in_correct = false;
  auto step = [&](const std::string &gold_tag, const std::string &pred_tag, bool boundary) {
    std::string correct, correct_type, guessed, guessed_type;
    SplitTag(gold_tag, &correct, &correct_type);
    SplitTag(pred_tag, &guessed, &guessed_type);
    if (in_correct) {
      bool end_c = EndOfChunk(last_correct, correct, last_correct_type, correct_type);
      bool end_g = EndOfChunk(last_guessed, guessed, last_guessed_type, guessed_type);
      if (end_c && end_g && last_guessed_type == last_correct_type) {
        in_correct = false;
        ++c.correct_chunk;
        ++c.correct_chunk_by_type[last_correct_type];
      } else if (end_c != end_g || guessed_type != correct_type) {
        in_correct = false;
      }
    }
    bool start_c = StartOfChunk(last_correct, correct, last_correct_type, correct_type);
    bool start_g = StartOfChunk(last_guessed, guessed, last_guessed_type, guessed_type);
    if (start_c && start_g && guessed_type == correct_type) in_correct = true;
    if (start_c) {
      ++c.found_correct;
      ++c.found_correct_by_type[correct_type];
    }
    if (start_g) {
      ++c.found_guessed;
      ++c.found_guessed_by_type[guessed_type];
    }
    if (!boundary) {
      if (correct == guessed && guessed_type == correct_type) ++c.correct_tags;
      ++c.token_counter;
    }
    last_guessed = guessed;
    last_correct = correct;
    last_guessed_type = guessed_type;
    last_correct_type = correct_type;
  };
  for (size_t s = 0; s < gold.size(); ++s) {
    for (size_t i = 0; i < gold[s].size(); ++i) step(gold[s][i], pred[s][i], false);
    step("O", "O", true);  // sentence boundary line
  }
  if (in_correct) {
    ++c.correct_chunk;
    ++c.correct_chunk_by_type[last_correct_type];
  }
  return c;
}

// Overall line exactly as the reference script prints it.
inline std::string ConllevalSummary(const ConllevalCounts &c) {
  double precision = c.found_guessed > 0 ? 100.0 * c.correct_chunk / c.found_guessed : 0.0;
  double recall = c.found_correct > 0 ? 100.0 * c.correct_chunk / c.found_correct : 0.0;
  double fb1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
  char line[256];
  std::snprintf(line, sizeof(line),
                "accuracy: %6.2f%%; precision: %6.2f%%; recall: %6.2f%%; FB1: %6.2f",
                c.token_counter ? 100.0 * c.correct_tags / c.token_counter : 0.0,
                precision, recall, fb1);
  return line;
}

}  // namespace conceptag::oracle

#endif  // CONCEPTAG_TESTS_ORACLES_CONLLEVAL_ORACLE_H_
