#include "conceptag/corpus/embeddings.h"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include "conceptag/corpus/corpus.h"
#include "conceptag/errors.h"

namespace conceptag {
namespace {

bool ParseReal(const std::string &text, double *value) {
  const char *begin = text.c_str();
  char *end = nullptr;
  errno = 0;
  *value = std::strtod(begin, &end);
  return end != begin && *end == '\0' && errno != ERANGE && std::isfinite(*value);
}

bool IsHeader(const std::vector<std::string> &fields) {
  if (fields.size() != 2) return false;
  for (const std::string &f : fields) {
    if (f.empty() || f.find_first_not_of("0123456789") != std::string::npos) {
      return false;
    }
  }
  return true;
}

}  // namespace

const std::vector<double> *EmbeddingTable::Find(const std::string &key) const {
  auto it = vectors.find(key);
  return it == vectors.end() ? nullptr : &it->second;
}

EmbeddingTable LoadEmbeddings(std::istream &in,
                              const std::set<std::string> &vocab) {
  EmbeddingTable table;
  std::string line;
  size_t line_no = 0;
  size_t declared_dimension = 0;
  std::vector<std::string> fields;
  while (std::getline(in, line)) {
    ++line_no;
    fields.clear();
    std::istringstream split(line);
    for (std::string f; split >> f;) fields.push_back(std::move(f));
    if (fields.empty()) continue;
    if (line_no == 1 && IsHeader(fields)) {
      declared_dimension = std::stoul(fields[1]);
      continue;
    }
    size_t dim = fields.size() - 1;
    if (table.dimension == 0) {
      if (dim == 0 || (declared_dimension != 0 && dim != declared_dimension)) {
        throw FormatError("embeddings line " + std::to_string(line_no) +
                          ": bad vector dimension " + std::to_string(dim));
      }
      table.dimension = dim;
    } else if (dim != table.dimension) {
      throw FormatError("embeddings line " + std::to_string(line_no) +
                        ": expected " + std::to_string(table.dimension) +
                        " components, found " + std::to_string(dim));
    }
    std::vector<double> values(dim);
    for (size_t i = 0; i < dim; ++i) {
      if (!ParseReal(fields[i + 1], &values[i])) {
        throw FormatError("embeddings line " + std::to_string(line_no) +
                          ": non-numeric component '" + fields[i + 1] + "'");
      }
    }
    std::string key = LookupKey(fields[0]);
    if (vocab.count(key) && !table.vectors.count(key)) {
      table.vectors.emplace(std::move(key), std::move(values));
    }
  }
  for (const std::string &key : vocab) {
    if (!table.vectors.count(key)) table.missing.insert(key);
  }
  return table;
}

EmbeddingTable LoadEmbeddingsFile(const std::string &path,
                                  const std::set<std::string> &vocab) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file: " + path);
  return LoadEmbeddings(in, vocab);
}

size_t CountMissing(const EmbeddingTable &table,
                    const std::set<std::string> &split_keys) {
  size_t missing = 0;
  for (const std::string &key : split_keys) {
    if (!table.vectors.count(key)) ++missing;
  }
  return missing;
}

}  // namespace conceptag
