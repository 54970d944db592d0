#include "conceptag/eval/chunks.h"

#include "conceptag/corpus/corpus.h"

namespace conceptag::eval {

std::vector<ChunkSpan> ExtractChunks(const std::vector<std::string> &tags) {
  std::vector<ChunkSpan> chunks;
  bool open = false;
  for (size_t i = 0; i < tags.size(); ++i) {
    const std::string &tag = tags[i];
    if (IsOutsideTag(tag) || tag.size() < 2) {
      open = false;
      continue;
    }
    std::string concept_name = tag.substr(2);
    bool continues = tag[0] == 'I' && open &&
                     chunks.back().concept_name == concept_name;
    if (continues) {
      chunks.back().end = i;
    } else {
      chunks.push_back({std::move(concept_name), i, i});
      open = true;
    }
  }
  return chunks;
}

}  // namespace conceptag::eval
