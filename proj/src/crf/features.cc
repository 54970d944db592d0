#include "conceptag/crf/features.h"

#include <charconv>

#include "conceptag/corpus/utf8.h"
#include "conceptag/errors.h"

namespace conceptag::crf {
namespace {

struct KindName {
  TemplateKind kind;
  const char *name;
  bool windowed;
};

constexpr KindName kKinds[] = {
    {TemplateKind::kTokenWindow, "token", true},
    {TemplateKind::kPosWindow, "pos", true},
    {TemplateKind::kPrefixWindow, "prefix", true},
    {TemplateKind::kSuffixWindow, "suffix", true},
    {TemplateKind::kLemmaCurrent, "lemma", false},
    {TemplateKind::kConjPrevCur, "conj-prev-cur", false},
    {TemplateKind::kConjCurNext, "conj-cur-next", false},
    {TemplateKind::kEmbeddingWindow, "emb", true},
    {TemplateKind::kCharNgramCurrent, "char-ngrams", false},
};

const KindName &Lookup(TemplateKind kind) {
  for (const auto &k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw ParameterError("unknown template kind");
}

int ParseInt(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParameterError("bad number in feature template '" + std::string(whole) + "'");
  }
  return value;
}

std::string Trim(std::string_view text) {
  size_t b = text.find_first_not_of(" \t\n");
  if (b == std::string_view::npos) return "";
  size_t e = text.find_last_not_of(" \t\n");
  return std::string(text.substr(b, e - b + 1));
}

std::string Affix(const std::string &surface, int length, bool prefix) {
  std::vector<std::string> chars = utf8::Characters(utf8::AsciiLower(surface));
  size_t n = std::min(chars.size(), static_cast<size_t>(length));
  std::string out;
  size_t from = prefix ? 0 : chars.size() - n;
  for (size_t i = from; i < from + n; ++i) out += chars[i];
  return out;
}

class Window {
 public:
  Window(const Sentence &s, size_t position) : s_(s), position_(static_cast<long>(position)) {}

  // Boundary marker, or nullopt for an in-range offset.
  std::optional<std::string> Boundary(int offset) const {
    long i = position_ + offset;
    if (i < 0) return "BOS-" + std::to_string(-i);
    long n = static_cast<long>(s_.size());
    if (i >= n) return "EOS-" + std::to_string(i - n + 1);
    return std::nullopt;
  }
  const Token &At(int offset) const { return s_.tokens[position_ + offset]; }
  std::string Word(int offset) const {
    auto b = Boundary(offset);
    return b ? *b : utf8::AsciiLower(At(offset).surface);
  }

 private:
  const Sentence &s_;
  long position_;
};

std::string Offset(int offset) { return "[" + std::to_string(offset) + "]"; }

}  // namespace

FeatureTemplate FeatureTemplate::Parse(std::string_view text) {
  std::string whole = Trim(text);
  std::string_view rest = whole;
  size_t colon = rest.find(':');
  std::string_view name = rest.substr(0, colon);
  const KindName *kind = nullptr;
  for (const auto &k : kKinds) {
    if (name == k.name) kind = &k;
  }
  if (!kind) throw ParameterError("unknown feature template '" + whole + "'");
  FeatureTemplate t;
  t.kind = kind->kind;
  if (!kind->windowed) {
    if (colon != std::string_view::npos) {
      throw ParameterError("template '" + whole + "' takes no offsets");
    }
    return t;
  }
  if (colon == std::string_view::npos) {
    throw ParameterError("template '" + whole + "' needs an offset range lo..hi");
  }
  rest = rest.substr(colon + 1);
  size_t second = rest.find(':');
  std::string_view range = rest.substr(0, second);
  size_t dots = range.find("..");
  if (dots == std::string_view::npos) {
    throw ParameterError("template '" + whole + "' needs an offset range lo..hi");
  }
  t.lo = ParseInt(range.substr(0, dots), whole);
  t.hi = ParseInt(range.substr(dots + 2), whole);
  if (t.lo > t.hi) throw ParameterError("empty offset range in '" + whole + "'");
  if (second != std::string_view::npos) {
    if (t.kind != TemplateKind::kPrefixWindow && t.kind != TemplateKind::kSuffixWindow) {
      throw ParameterError("only prefix/suffix templates take a length: '" + whole + "'");
    }
    t.affix_length = ParseInt(rest.substr(second + 1), whole);
    if (*t.affix_length < 1) throw ParameterError("affix length must be >= 1 in '" + whole + "'");
  }
  return t;
}

std::string FeatureTemplate::ToString() const {
  const KindName &k = Lookup(kind);
  std::string s = k.name;
  if (k.windowed) s += ":" + std::to_string(lo) + ".." + std::to_string(hi);
  if (affix_length) s += ":" + std::to_string(*affix_length);
  return s;
}

std::vector<FeatureTemplate> ParseTemplates(std::string_view spec) {
  std::vector<FeatureTemplate> templates;
  size_t begin = 0;
  while (begin <= spec.size()) {
    size_t end = spec.find(';', begin);
    if (end == std::string_view::npos) end = spec.size();
    std::string item = Trim(spec.substr(begin, end - begin));
    if (!item.empty()) templates.push_back(FeatureTemplate::Parse(item));
    begin = end + 1;
  }
  if (templates.empty()) throw ParameterError("no feature templates given");
  return templates;
}

std::string TemplatesToString(std::span<const FeatureTemplate> templates) {
  std::string s;
  for (const auto &t : templates) s += (s.empty() ? "" : ";") + t.ToString();
  return s;
}

std::vector<Feature> ApplyTemplates(const Sentence &sentence, size_t position,
                                    std::span<const FeatureTemplate> templates,
                                    const EmbeddingTable *embeddings) {
  std::vector<Feature> features;
  Window window(sentence, position);
  const Token &current = sentence.tokens.at(position);
  for (const FeatureTemplate &t : templates) {
    switch (t.kind) {
      case TemplateKind::kTokenWindow:
        for (int o = t.lo; o <= t.hi; ++o) features.push_back({"w" + Offset(o) + "=" + window.Word(o)});
        break;
      case TemplateKind::kPosWindow:
        for (int o = t.lo; o <= t.hi; ++o) {
          auto b = window.Boundary(o);
          if (!b && !window.At(o).pos) throw ConfigError("template " + t.ToString() + " needs a POS column");
          features.push_back({"p" + Offset(o) + "=" + (b ? *b : *window.At(o).pos)});
        }
        break;
      case TemplateKind::kPrefixWindow:
      case TemplateKind::kSuffixWindow: {
        const bool prefix = t.kind == TemplateKind::kPrefixWindow;
        const int from = t.affix_length.value_or(1);
        const int to = t.affix_length.value_or(4);
        for (int o = t.lo; o <= t.hi; ++o) {
          auto b = window.Boundary(o);
          for (int len = from; len <= to; ++len) {
            std::string value = b ? *b : Affix(window.At(o).surface, len, prefix);
            features.push_back({(prefix ? "pre" : "suf") + std::to_string(len) + Offset(o) + "=" + value});
          }
        }
        break;
      }
      case TemplateKind::kLemmaCurrent:
        if (!current.lemma) throw ConfigError("template " + t.ToString() + " needs a lemma column");
        features.push_back({"l[0]=" + *current.lemma});
        break;
      case TemplateKind::kConjPrevCur:
        features.push_back({"w[-1]|w[0]=" + window.Word(-1) + "|" + window.Word(0)});
        break;
      case TemplateKind::kConjCurNext:
        features.push_back({"w[0]|w[1]=" + window.Word(0) + "|" + window.Word(1)});
        break;
      case TemplateKind::kEmbeddingWindow: {
        if (!embeddings) throw ConfigError("template " + t.ToString() + " needs word embeddings");
        for (int o = t.lo; o <= t.hi; ++o) {
          const std::vector<double> *vec =
              window.Boundary(o) ? nullptr : embeddings->Find(LookupKey(window.At(o).surface));
          for (size_t d = 0; d < embeddings->dimension; ++d) {
            features.push_back({"e" + Offset(o) + ":" + std::to_string(d), vec ? (*vec)[d] : 0.0});
          }
        }
        break;
      }
      case TemplateKind::kCharNgramCurrent: {
        std::vector<std::string> chars = utf8::Characters(utf8::AsciiLower(current.surface));
        for (size_t len = 2; len <= 4; ++len) {
          for (size_t i = 0; i + len <= chars.size(); ++i) {
            std::string gram;
            for (size_t k = i; k < i + len; ++k) gram += chars[k];
            features.push_back({"c" + std::to_string(len) + "=" + gram});
          }
        }
        break;
      }
    }
  }
  return features;
}

void CheckTemplateInputs(const std::vector<Sentence> &sentences,
                         std::span<const FeatureTemplate> templates,
                         const EmbeddingTable *embeddings) {
  for (const FeatureTemplate &t : templates) {
    if (t.NeedsEmbeddings() && !embeddings) {
      throw ConfigError("template " + t.ToString() + " needs word embeddings");
    }
    for (const Sentence &s : sentences) {
      for (const Token &token : s.tokens) {
        if (t.NeedsPos() && !token.pos) {
          throw ConfigError("template " + t.ToString() + " needs a POS column");
        }
        if (t.NeedsLemma() && !token.lemma) {
          throw ConfigError("template " + t.ToString() + " needs a lemma column");
        }
      }
    }
  }
}

}  // namespace conceptag::crf
