#ifndef CONCEPTAG_CORPUS_CORPUS_H_
#define CONCEPTAG_CORPUS_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace conceptag {

struct Token {
  std::string surface;
  std::optional<std::string> pos;
  std::optional<std::string> lemma;

  bool operator==(const Token &) const = default;
};

// A tokenized utterance with one IOB concept tag per token.
struct Sentence {
  std::vector<Token> tokens;
  std::vector<std::string> tags;

  size_t size() const { return tokens.size(); }
  std::vector<std::string> Surfaces() const;
  bool operator==(const Sentence &) const = default;
};

// Which optional middle columns a dataset file carries. The token is always
// the first column and the tag always the last; POS precedes lemma.
struct ColumnSpec {
  bool pos = false;
  bool lemma = false;

  size_t FieldCount() const { return 2 + (pos ? 1 : 0) + (lemma ? 1 : 0); }
  // Parses "token,tag", "token,pos,tag", "token,pos,lemma,tag", ...
  static ColumnSpec Parse(std::string_view layout);
  std::string ToString() const;
};

// "O" and "null" both mark tokens outside any concept.
bool IsOutsideTag(std::string_view tag);
// True for an outside tag or "B-x"/"I-x" with non-empty x.
bool IsValidTag(std::string_view tag);

// Reads whitespace-separated columns, one token per line, blank lines between
// sentences. Throws ParseError (with line number) or EncodingError.
std::vector<Sentence> LoadConll(std::istream &in, ColumnSpec columns = {});
std::vector<Sentence> LoadConllFile(const std::string &path,
                                    ColumnSpec columns = {});

// Writes sentences in the same layout LoadConll reads.
void WriteConll(std::ostream &out, const std::vector<Sentence> &sentences,
                ColumnSpec columns = {});

// Writes token/predicted-tag pairs in the two-column layout.
void WritePredictions(std::ostream &out, const std::vector<Sentence> &sentences,
                      const std::vector<std::vector<std::string>> &tags);

inline constexpr std::string_view kNumberToken = "<number>";

// Maps purely numeric tokens ("20", "1,000", "10:30") to kNumberToken.
std::string NormalizeNumbers(std::string_view token);

// Key used for vocabulary and embedding lookup: lowercased, numbers classed.
std::string LookupKey(std::string_view surface);

struct Corpus {
  std::vector<Sentence> train;
  std::vector<Sentence> test;
  // Sorted set of every tag seen in train.
  std::vector<std::string> tag_inventory;
  // LookupKey(surface) -> occurrence count over train.
  std::map<std::string, int64_t> vocabulary;
  // Test tags missing from the inventory, reported once each.
  std::vector<std::string> warnings;

  static Corpus Build(std::vector<Sentence> train, std::vector<Sentence> test);

  std::set<std::string> TrainKeys() const;
  // Concept names with IOB prefixes stripped; outside tags excluded.
  std::set<std::string> Concepts() const;
};

struct SplitStats {
  size_t sentences = 0;
  size_t tokens = 0;
  size_t types = 0;
  double average_length = 0.0;
};

struct CorpusStats {
  SplitStats train;
  SplitStats test;
  size_t tags = 0;
  size_t concepts = 0;
  double oov_rate = 0.0;
};

// Fraction of test token occurrences whose lookup key is absent from
// `train_keys`. Throws Error on an empty test split.
double OovRate(const std::set<std::string> &train_keys,
               const std::vector<Sentence> &test);

CorpusStats ComputeStats(const Corpus &corpus);

}  // namespace conceptag

#endif  // CONCEPTAG_CORPUS_CORPUS_H_
