#include "conceptag/corpus/corpus.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "conceptag/corpus/utf8.h"
#include "conceptag/errors.h"

namespace conceptag {
namespace {

std::vector<std::string> SplitFields(const std::string &line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string field;
  while (in >> field) fields.push_back(field);
  return fields;
}

bool IsDigit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::vector<std::string> Sentence::Surfaces() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token &t : tokens) out.push_back(t.surface);
  return out;
}

ColumnSpec ColumnSpec::Parse(std::string_view layout) {
  ColumnSpec spec;
  std::vector<std::string> names;
  std::string current;
  for (char c : layout) {
    if (c == ',') {
      names.push_back(current);
      current.clear();
    } else if (c != ' ') {
      current.push_back(c);
    }
  }
  names.push_back(current);
  if (names.size() < 2 || names.front() != "token" || names.back() != "tag") {
    throw ParameterError("column layout must start with 'token' and end with "
                         "'tag': " + std::string(layout));
  }
  for (size_t i = 1; i + 1 < names.size(); ++i) {
    if (names[i] == "pos" && !spec.pos && !spec.lemma) {
      spec.pos = true;
    } else if (names[i] == "lemma" && !spec.lemma) {
      spec.lemma = true;
    } else {
      throw ParameterError("unsupported column layout: " + std::string(layout));
    }
  }
  return spec;
}

std::string ColumnSpec::ToString() const {
  std::string s = "token";
  if (pos) s += ",pos";
  if (lemma) s += ",lemma";
  return s + ",tag";
}

bool IsOutsideTag(std::string_view tag) { return tag == "O" || tag == "null"; }

bool IsValidTag(std::string_view tag) {
  if (IsOutsideTag(tag)) return true;
  return tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-';
}

std::vector<Sentence> LoadConll(std::istream &in, ColumnSpec columns) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::string line;
  size_t line_no = 0;
  const size_t expected = columns.FieldCount();
  auto flush = [&] {
    if (!current.tokens.empty()) sentences.push_back(std::move(current));
    current = Sentence();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!utf8::IsValid(line)) {
      throw EncodingError("line " + std::to_string(line_no) +
                          ": input is not valid UTF-8");
    }
    std::vector<std::string> fields = SplitFields(line);
    if (fields.empty()) {
      flush();
      continue;
    }
    if (fields.size() != expected) {
      throw ParseError(line_no, "expected " + std::to_string(expected) +
                                    " fields (" + columns.ToString() +
                                    "), found " +
                                    std::to_string(fields.size()));
    }
    const std::string &tag = fields.back();
    if (!IsValidTag(tag)) {
      throw ParseError(line_no, "invalid IOB tag '" + tag + "'");
    }
    Token token;
    token.surface = fields.front();
    size_t k = 1;
    if (columns.pos) token.pos = fields[k++];
    if (columns.lemma) token.lemma = fields[k++];
    current.tokens.push_back(std::move(token));
    current.tags.push_back(tag);
  }
  flush();
  return sentences;
}

std::vector<Sentence> LoadConllFile(const std::string &path,
                                    ColumnSpec columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset file: " + path);
  try {
    return LoadConll(in, columns);
  } catch (const ParseError &e) {
    throw ParseError(e.line(), path + ": " + e.what());
  }
}

void WriteConll(std::ostream &out, const std::vector<Sentence> &sentences,
                ColumnSpec columns) {
  for (const Sentence &s : sentences) {
    for (size_t i = 0; i < s.size(); ++i) {
      const Token &t = s.tokens[i];
      out << t.surface;
      if (columns.pos) out << ' ' << t.pos.value_or("_");
      if (columns.lemma) out << ' ' << t.lemma.value_or("_");
      out << ' ' << s.tags[i] << '\n';
    }
    out << '\n';
  }
}

void WritePredictions(std::ostream &out, const std::vector<Sentence> &sentences,
                      const std::vector<std::vector<std::string>> &tags) {
  if (sentences.size() != tags.size()) {
    throw ShapeError("prediction count does not match sentence count");
  }
  for (size_t s = 0; s < sentences.size(); ++s) {
    if (sentences[s].size() != tags[s].size()) {
      throw ShapeError("prediction length mismatch in sentence " +
                       std::to_string(s));
    }
    for (size_t i = 0; i < tags[s].size(); ++i) {
      out << sentences[s].tokens[i].surface << ' ' << tags[s][i] << '\n';
    }
    out << '\n';
  }
}

std::string NormalizeNumbers(std::string_view token) {
  // digit+ ( [.,:] digit+ )*
  bool ok = !token.empty() && IsDigit(token.front()) && IsDigit(token.back());
  for (size_t i = 0; ok && i < token.size(); ++i) {
    char c = token[i];
    if (IsDigit(c)) continue;
    ok = (c == '.' || c == ',' || c == ':') && IsDigit(token[i + 1]);
  }
  return ok ? std::string(kNumberToken) : std::string(token);
}

std::string LookupKey(std::string_view surface) {
  return NormalizeNumbers(utf8::AsciiLower(surface));
}

Corpus Corpus::Build(std::vector<Sentence> train, std::vector<Sentence> test) {
  Corpus corpus;
  corpus.train = std::move(train);
  corpus.test = std::move(test);
  std::set<std::string> tags;
  for (const Sentence &s : corpus.train) {
    for (const std::string &tag : s.tags) tags.insert(tag);
    for (const Token &t : s.tokens) ++corpus.vocabulary[LookupKey(t.surface)];
  }
  corpus.tag_inventory.assign(tags.begin(), tags.end());
  std::set<std::string> unseen;
  for (const Sentence &s : corpus.test) {
    for (const std::string &tag : s.tags) {
      if (!tags.count(tag) && unseen.insert(tag).second) {
        corpus.warnings.push_back("test tag not seen in train: " + tag);
      }
    }
  }
  return corpus;
}

std::set<std::string> Corpus::TrainKeys() const {
  std::set<std::string> keys;
  for (const auto &[key, count] : vocabulary) keys.insert(key);
  return keys;
}

std::set<std::string> Corpus::Concepts() const {
  std::set<std::string> concepts;
  for (const std::string &tag : tag_inventory) {
    if (!IsOutsideTag(tag)) concepts.insert(tag.substr(2));
  }
  return concepts;
}

double OovRate(const std::set<std::string> &train_keys,
               const std::vector<Sentence> &test) {
  size_t total = 0, missing = 0;
  for (const Sentence &s : test) {
    for (const Token &t : s.tokens) {
      ++total;
      if (!train_keys.count(LookupKey(t.surface))) ++missing;
    }
  }
  if (total == 0) throw Error("OOV rate is undefined for an empty test split");
  return static_cast<double>(missing) / static_cast<double>(total);
}

namespace {

SplitStats StatsFor(const std::vector<Sentence> &split) {
  SplitStats stats;
  std::set<std::string> types;
  stats.sentences = split.size();
  for (const Sentence &s : split) {
    stats.tokens += s.size();
    for (const Token &t : s.tokens) types.insert(LookupKey(t.surface));
  }
  stats.types = types.size();
  if (stats.sentences > 0) {
    stats.average_length =
        static_cast<double>(stats.tokens) / static_cast<double>(stats.sentences);
  }
  return stats;
}

}  // namespace

CorpusStats ComputeStats(const Corpus &corpus) {
  CorpusStats stats;
  stats.train = StatsFor(corpus.train);
  stats.test = StatsFor(corpus.test);
  stats.tags = corpus.tag_inventory.size();
  stats.concepts = corpus.Concepts().size();
  if (!corpus.test.empty()) stats.oov_rate = OovRate(corpus.TrainKeys(), corpus.test);
  return stats;
}

}  // namespace conceptag
