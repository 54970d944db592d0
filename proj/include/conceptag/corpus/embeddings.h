#ifndef CONCEPTAG_CORPUS_EMBEDDINGS_H_
#define CONCEPTAG_CORPUS_EMBEDDINGS_H_

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace conceptag {

// Pretrained word vectors restricted to a vocabulary of lookup keys.
struct EmbeddingTable {
  size_t dimension = 0;
  std::map<std::string, std::vector<double>> vectors;
  // Vocabulary keys with no vector in the source file.
  std::set<std::string> missing;

  const std::vector<double> *Find(const std::string &key) const;
};

// Reads the textual word-vector format: an optional "count dimension" header
// line, then "word v1 ... vd" per line. File words are mapped through
// LookupKey; the first vector seen for a key wins. Throws FormatError on a
// dimension mismatch or a non-numeric component.
EmbeddingTable LoadEmbeddings(std::istream &in,
                              const std::set<std::string> &vocab);
EmbeddingTable LoadEmbeddingsFile(const std::string &path,
                                  const std::set<std::string> &vocab);

// Number of types of `split_keys` that have no vector in `table`.
size_t CountMissing(const EmbeddingTable &table,
                    const std::set<std::string> &split_keys);

}  // namespace conceptag

#endif  // CONCEPTAG_CORPUS_EMBEDDINGS_H_
