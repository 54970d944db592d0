#include "conceptag/bench/recipe.h"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "conceptag/errors.h"

namespace conceptag::bench {
namespace {

const std::set<std::string> kCommonKeys = {"model", "train",  "test",         "embeddings",
                                           "columns", "seeds", "reference_f1", "citation"};
const std::set<std::string> kWfstKeys = {"order", "discount"};
const std::set<std::string> kCrfKeys = {"templates", "l2", "max_iterations", "tolerance",
                                        "min_feature_count"};
const std::set<std::string> kNeuralRequired = {"hidden", "epochs", "batch_size",
                                               "lr",     "drop_rate", "emb_norm"};
const std::set<std::string> kNeuralOptional = {"bidirectional", "freeze_embeddings",
                                               "embedding_dim"};
const std::set<std::string> kOutOfScope = {"svm", "yamcha", "structured-svm"};

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

template <typename T>
T ParseNumber(const std::string &recipe, const std::string &key, const std::string &text) {
  T value{};
  const char *end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ValidationError((recipe.empty() ? "" : "recipe " + recipe + ": ") + key + " = '" +
                          text + "' is not a number");
  }
  return value;
}

bool ParseBool(const std::string &recipe, const std::string &key, const std::string &text) {
  const std::string v = Lower(text);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("recipe " + recipe + ": " + key + " = '" + text + "' is not a boolean");
}

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

ModelFamily Recipe::Family() const {
  const std::string m = Lower(model);
  if (m == "wfst") return ModelFamily::kWfst;
  if (m == "crf") return ModelFamily::kCrf;
  if (m == "crf+emb") return ModelFamily::kCrfEmb;
  if (kOutOfScope.count(m)) {
    throw ValidationError("recipe " + name + ": model '" + model +
                          "' is out of scope; structured SVM baselines are not implemented");
  }
  try {
    nn::ParseArch(model);
  } catch (const ConfigError &) {
    throw ValidationError("recipe " + name + ": unknown model '" + model + "'");
  }
  return ModelFamily::kNeural;
}

void Recipe::Validate() const {
  if (name.empty()) throw ValidationError("recipe without a name");
  if (model.empty()) throw ValidationError("recipe " + name + ": missing key 'model'");
  const ModelFamily family = Family();
  if (train_path.empty()) throw ValidationError("recipe " + name + ": missing key 'train'");
  if (test_path.empty()) throw ValidationError("recipe " + name + ": missing key 'test'");
  try {
    Columns();
  } catch (const Error &e) {
    throw ValidationError("recipe " + name + ": " + e.what());
  }

  std::set<std::string> allowed, required;
  switch (family) {
    case ModelFamily::kWfst:
      allowed = kWfstKeys;
      required = {"order"};
      break;
    case ModelFamily::kCrf:
    case ModelFamily::kCrfEmb:
      allowed = kCrfKeys;
      required = {"templates"};
      break;
    case ModelFamily::kNeural:
      allowed = kNeuralRequired;
      allowed.insert(kNeuralOptional.begin(), kNeuralOptional.end());
      required = kNeuralRequired;
      break;
  }
  for (const auto &[key, value] : hyperparameters) {
    if (!allowed.count(key)) {
      throw ValidationError("recipe " + name + ": key '" + key + "' does not apply to model " +
                            model);
    }
  }
  for (const auto &key : required) {
    if (!hyperparameters.count(key)) {
      throw ValidationError("recipe " + name + ": missing key '" + key + "' for model " + model);
    }
  }

  if (family == ModelFamily::kNeural) {
    if (seeds.empty()) throw ValidationError("recipe " + name + ": neural models need seeds");
    try {
      NeuralSettings(seeds.front()).Validate();
    } catch (const ConfigError &e) {
      throw ValidationError("recipe " + name + ": " + e.what());
    }
  } else {
    if (seeds.size() != 1) {
      throw ValidationError("recipe " + name + ": deterministic model " + model +
                            " takes a single (ignored) seed");
    }
  }
  if (family == ModelFamily::kWfst) {
    const wfst::WfstOptions o = WfstSettings();
    if (o.order < 1) throw ValidationError("recipe " + name + ": order must be >= 1");
    if (!(o.discount > 0.0 && o.discount < 1.0)) {
      throw ValidationError("recipe " + name + ": discount must lie in (0, 1)");
    }
  }
  if (family == ModelFamily::kCrf || family == ModelFamily::kCrfEmb) {
    std::vector<crf::FeatureTemplate> templates;
    try {
      templates = CrfTemplates();
    } catch (const Error &e) {
      throw ValidationError("recipe " + name + ": " + e.what());
    }
    const crf::CrfTrainOptions o = CrfSettings();
    if (o.l2 < 0.0 || o.max_iterations < 0 || o.tolerance <= 0.0 || o.min_feature_count < 1) {
      throw ValidationError("recipe " + name + ": crf settings out of range");
    }
    const bool uses_emb = std::any_of(templates.begin(), templates.end(),
                                      [](const auto &t) { return t.NeedsEmbeddings(); });
    if (family == ModelFamily::kCrfEmb && (!uses_emb || embeddings_path.empty())) {
      throw ValidationError("recipe " + name + ": crf+emb needs an emb template and embeddings");
    }
    if (family == ModelFamily::kCrf && uses_emb) {
      throw ValidationError("recipe " + name + ": emb templates require model crf+emb");
    }
    const ColumnSpec cols = Columns();
    for (const auto &t : templates) {
      if ((t.NeedsPos() && !cols.pos) || (t.NeedsLemma() && !cols.lemma)) {
        throw ValidationError("recipe " + name + ": template " + t.ToString() +
                              " needs a column missing from '" + columns + "'");
      }
    }
  }
  if (reference_f1 && !(*reference_f1 >= 0.0 && *reference_f1 <= 100.0)) {
    throw ValidationError("recipe " + name + ": reference_f1 must lie in [0, 100]");
  }
}

wfst::WfstOptions Recipe::WfstSettings() const {
  wfst::WfstOptions o;
  if (auto it = hyperparameters.find("order"); it != hyperparameters.end()) {
    o.order = ParseNumber<int>(name, "order", it->second);
  }
  if (auto it = hyperparameters.find("discount"); it != hyperparameters.end()) {
    o.discount = ParseNumber<double>(name, "discount", it->second);
  }
  return o;
}

crf::CrfTrainOptions Recipe::CrfSettings() const {
  crf::CrfTrainOptions o;
  for (const auto &[key, value] : hyperparameters) {
    if (key == "l2") o.l2 = ParseNumber<double>(name, key, value);
    if (key == "max_iterations") o.max_iterations = ParseNumber<int>(name, key, value);
    if (key == "tolerance") o.tolerance = ParseNumber<double>(name, key, value);
    if (key == "min_feature_count") o.min_feature_count = ParseNumber<int64_t>(name, key, value);
  }
  return o;
}

std::vector<crf::FeatureTemplate> Recipe::CrfTemplates() const {
  auto it = hyperparameters.find("templates");
  if (it == hyperparameters.end()) return {};
  return crf::ParseTemplates(it->second);
}

nn::ArchitectureConfig Recipe::NeuralSettings(uint64_t seed) const {
  nn::ArchitectureConfig c;
  c.kind = nn::ParseArch(model);
  c.seed = seed;
  for (const auto &[key, value] : hyperparameters) {
    if (key == "hidden") c.hidden = ParseNumber<int>(name, key, value);
    if (key == "epochs") c.epochs = ParseNumber<int>(name, key, value);
    if (key == "batch_size") c.batch_size = ParseNumber<int>(name, key, value);
    if (key == "lr") c.lr = ParseNumber<double>(name, key, value);
    if (key == "drop_rate") c.drop_rate = ParseNumber<double>(name, key, value);
    if (key == "emb_norm") c.emb_norm = ParseNumber<double>(name, key, value);
    if (key == "embedding_dim") c.embedding_dim = ParseNumber<int>(name, key, value);
    if (key == "bidirectional") c.bidirectional = ParseBool(name, key, value);
    if (key == "freeze_embeddings") c.freeze_embeddings = ParseBool(name, key, value);
  }
  return c;
}

std::vector<uint64_t> ParseSeeds(const std::string &text) {
  const std::string t = Trim(text);
  std::vector<uint64_t> seeds;
  if (const auto dots = t.find(".."); dots != std::string::npos) {
    const auto lo = ParseNumber<uint64_t>("", "seeds", Trim(t.substr(0, dots)));
    const auto hi = ParseNumber<uint64_t>("", "seeds", Trim(t.substr(dots + 2)));
    if (hi < lo) throw ValidationError("seeds: empty range '" + text + "'");
    for (uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  size_t start = 0;
  while (start <= t.size()) {
    const size_t comma = std::min(t.find(',', start), t.size());
    seeds.push_back(ParseNumber<uint64_t>("", "seeds", Trim(t.substr(start, comma - start))));
    start = comma + 1;
  }
  std::vector<uint64_t> sorted = seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ValidationError("seeds: duplicate seed in '" + text + "'");
  }
  return seeds;
}

std::vector<Recipe> LoadRecipes(std::istream &in, const std::string &base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw ParseError(e.line(), e.message());
  }
  auto resolve = [&](const std::string &path) {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return p.lexically_normal().string();
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
  };
  std::vector<Recipe> recipes;
  for (const auto &[section, body] : tree) {
    if (body.empty()) throw ValidationError("recipe file: '" + section + "' is not a section");
    Recipe r;
    r.name = section;
    std::optional<std::string> seeds;
    for (const auto &[key, node] : body) {
      const std::string value = Trim(node.data());
      if (!kCommonKeys.count(key)) {
        r.hyperparameters[key] = value;
      } else if (key == "model") {
        r.model = value;
      } else if (key == "train") {
        r.train_path = resolve(value);
      } else if (key == "test") {
        r.test_path = resolve(value);
      } else if (key == "embeddings") {
        r.embeddings_path = resolve(value);
      } else if (key == "columns") {
        r.columns = value;
      } else if (key == "seeds") {
        seeds = value;
      } else if (key == "reference_f1") {
        r.reference_f1 = ParseNumber<double>(section, key, value);
      } else if (key == "citation") {
        r.citation = value;
      }
    }
    if (seeds) {
      try {
        r.seeds = ParseSeeds(*seeds);
      } catch (const ValidationError &e) {
        throw ValidationError("recipe " + section + ": " + e.what());
      }
    } else if (!r.model.empty() && r.Family() != ModelFamily::kNeural) {
      r.seeds = {0};
    }
    r.Validate();
    recipes.push_back(std::move(r));
  }
  return recipes;
}

std::vector<Recipe> LoadRecipesFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open recipe file " + path);
  try {
    return LoadRecipes(in, std::filesystem::path(path).parent_path().string());
  } catch (const ParseError &e) {
    throw ParseError(path + ": ", e);
  }
}

}  // namespace conceptag::bench
