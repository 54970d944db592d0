#ifndef CONCEPTAG_EVAL_CHUNKS_H_
#define CONCEPTAG_EVAL_CHUNKS_H_

#include <string>
#include <vector>

namespace conceptag::eval {

// A labeled span [start, end] (both inclusive, 0-based token indices).
struct ChunkSpan {
  std::string concept_name;
  size_t start = 0;
  size_t end = 0;

  auto operator<=>(const ChunkSpan &) const = default;
};

// Extracts maximal chunks from IOB tags with conlleval's leniency: an "I-x"
// not continuing a chunk of concept x opens a new one. "O" and "null" are
// both outside. The result is sorted by start and pairwise disjoint.
std::vector<ChunkSpan> ExtractChunks(const std::vector<std::string> &tags);

}  // namespace conceptag::eval

#endif  // CONCEPTAG_EVAL_CHUNKS_H_
