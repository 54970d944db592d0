// conceptag: train, tag, score and benchmark concept taggers.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "conceptag/bench/bench.h"
#include "conceptag/bench/recipe.h"
#include "conceptag/corpus/corpus.h"
#include "conceptag/corpus/embeddings.h"
#include "conceptag/crf/crf_model.h"
#include "conceptag/errors.h"
#include "conceptag/eval/scorer.h"
#include "conceptag/nn/trainer.h"
#include "conceptag/wfst/wfst_tagger.h"

namespace {

using namespace conceptag;
namespace fs = std::filesystem;

struct Globals {
  std::string out_dir = "conceptag-out";
  int threads = 1;
  std::optional<uint64_t> seed;
};

// Unlabeled sentences: the token is the first column; POS and lemma follow
// when `columns` names them. A trailing tag column, if present, is ignored.
std::vector<Sentence> ReadUnlabeled(const std::string &path, ColumnSpec columns) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<Sentence> sentences;
  Sentence current;
  std::string line;
  size_t line_no = 0;
  const size_t needed = columns.FieldCount() - 1;
  auto flush = [&] {
    if (!current.tokens.empty()) sentences.push_back(std::move(current));
    current = Sentence();
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> f;
    for (std::string w; fields >> w;) f.push_back(w);
    if (f.empty()) {
      flush();
      continue;
    }
    if (f.size() != needed && f.size() != needed + 1) {
      throw ParseError(line_no, "expected " + std::to_string(needed) + " columns, found " +
                                    std::to_string(f.size()));
    }
    Token t{f[0], std::nullopt, std::nullopt};
    size_t next = 1;
    if (columns.pos) t.pos = f[next++];
    if (columns.lemma) t.lemma = f[next++];
    current.tokens.push_back(std::move(t));
    current.tags.push_back("O");
  }
  flush();
  return sentences;
}

std::set<std::string> LookupKeys(const std::vector<Sentence> &sentences) {
  std::set<std::string> keys;
  for (const Sentence &s : sentences) {
    for (const Token &t : s.tokens) keys.insert(LookupKey(t.surface));
  }
  return keys;
}

int RunTrain(const Globals &g, const std::string &recipe_file, const std::string &recipe_name,
             bench::Recipe flags, const std::vector<std::string> &settings,
             const std::string &output) {
  bench::Recipe recipe;
  if (!recipe_file.empty()) {
    bool found = false;
    for (bench::Recipe &r : bench::LoadRecipesFile(recipe_file)) {
      if (r.name == recipe_name) {
        recipe = std::move(r);
        found = true;
      }
    }
    if (!found) throw ValidationError("no recipe named '" + recipe_name + "' in " + recipe_file);
  } else {
    recipe = std::move(flags);
    recipe.name = recipe_name.empty() ? "train" : recipe_name;
    for (const std::string &kv : settings) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects key=value, got " + kv);
      recipe.hyperparameters[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (recipe.Family() == bench::ModelFamily::kNeural) {
      recipe.seeds = {g.seed.value_or(1)};
    } else {
      recipe.seeds = {0};
    }
  }
  const uint64_t seed = recipe.Family() == bench::ModelFamily::kNeural
                            ? g.seed.value_or(recipe.seeds.front())
                            : recipe.seeds.front();
  const bench::SeedResult r = bench::RunSeed(recipe, seed, g.out_dir);
  const fs::path dir = fs::path(g.out_dir) / recipe.name / std::to_string(seed);
  if (!output.empty()) fs::copy_file(dir / "model.txt", output, fs::copy_options::overwrite_existing);
  std::cout << recipe.name << " seed " << seed << " test F1 " << eval::FormatPercent(r.f1 / 100.0)
            << "\nmodel " << (output.empty() ? (dir / "model.txt").string() : output) << "\n";
  return 0;
}

int RunTag(const std::string &model_path, const std::string &input, const std::string &columns,
           const std::string &embeddings_path, const std::string &output) {
  const std::vector<Sentence> sentences = ReadUnlabeled(input, ColumnSpec::Parse(columns + ",tag"));
  std::ifstream in(model_path);
  if (!in) throw Error("cannot open " + model_path);
  std::string magic;
  in >> magic;
  in.seekg(0);
  std::vector<std::vector<std::string>> tags;
  if (magic == "conceptag-wfst") {
    const wfst::WfstTagger tagger = wfst::WfstTagger::Load(in);
    for (const Sentence &s : sentences) tags.push_back(tagger.Decode(s));
  } else if (magic == "conceptag-crf") {
    const crf::CrfModel model = crf::CrfModel::Load(in);
    std::optional<EmbeddingTable> table;
    for (const auto &t : model.templates()) {
      if (!t.NeedsEmbeddings() || table) continue;
      if (embeddings_path.empty()) throw ConfigError("model uses embedding features; pass --embeddings");
      table = LoadEmbeddingsFile(embeddings_path, LookupKeys(sentences));
    }
    for (const Sentence &s : sentences) tags.push_back(model.Decode(s, table ? &*table : nullptr));
  } else if (magic == "conceptag-nn") {
    const nn::NeuralTagger tagger = nn::NeuralTagger::Load(in);
    tags = tagger.PredictAll(sentences);
  } else {
    throw FormatError(model_path + ": unrecognized model file");
  }
  if (output.empty()) {
    WritePredictions(std::cout, sentences, tags);
  } else {
    std::ofstream out(output);
    WritePredictions(out, sentences, tags);
    if (!out) throw Error("cannot write " + output);
  }
  return 0;
}

int RunEval(const std::string &gold_path, const std::string &pred_path,
            const std::string &columns) {
  const std::vector<Sentence> gold = LoadConllFile(gold_path, ColumnSpec::Parse(columns));
  const std::vector<Sentence> pred = LoadConllFile(pred_path, ColumnSpec{});
  std::vector<eval::TagSequence> g, p;
  for (const Sentence &s : gold) g.push_back(s.tags);
  for (const Sentence &s : pred) p.push_back(s.tags);
  std::cout << eval::FormatConlleval(eval::Score(g, p));
  return 0;
}

int RunBench(const Globals &g, const std::vector<std::string> &files,
             const std::vector<std::string> &only, bool list) {
  std::vector<bench::Recipe> recipes;
  for (const std::string &f : files) {
    for (bench::Recipe &r : bench::LoadRecipesFile(f)) {
      if (only.empty() || std::find(only.begin(), only.end(), r.name) != only.end()) {
        recipes.push_back(std::move(r));
      }
    }
  }
  if (list) {
    for (const bench::Recipe &r : recipes) {
      std::cout << r.name << "\t" << r.model << "\t" << r.seeds.size() << " seed(s)\n";
    }
    return 0;
  }
  bench::BenchOptions options;
  options.out_dir = g.out_dir;
  options.threads = g.threads;
  options.seed_override = g.seed;
  options.log = [](const std::string &line) { std::cerr << line << "\n"; };
  const bench::BenchReport report = bench::RunRecipes(std::move(recipes), options);
  fs::create_directories(g.out_dir);
  const std::string text = bench::FormatReportText(report);
  std::ofstream(fs::path(g.out_dir) / "report.txt", std::ios::binary) << text;
  std::ofstream(fs::path(g.out_dir) / "report.csv", std::ios::binary)
      << bench::FormatReportCsv(report);
  std::cout << text;
  return 0;
}

int RunGradCheck(const Globals &g, const std::string &arch, const std::string &train_path,
                 const std::string &columns, int sentences, int points, double step,
                 double tolerance, int hidden, int embedding_dim) {
  std::vector<Sentence> train = LoadConllFile(train_path, ColumnSpec::Parse(columns));
  nn::ArchitectureConfig config;
  config.kind = nn::ParseArch(arch);
  config.hidden = hidden;
  config.embedding_dim = embedding_dim;
  config.seed = g.seed.value_or(1);
  config.Validate();
  std::set<std::string> tag_set;
  for (const Sentence &s : train) tag_set.insert(s.tags.begin(), s.tags.end());
  nn::NeuralTagger tagger = nn::NeuralTagger::Build(
      config, train, std::vector<std::string>(tag_set.begin(), tag_set.end()), nullptr);
  if (sentences < 1) throw ParameterError("--sentences must be positive");
  train.resize(std::min<size_t>(train.size(), static_cast<size_t>(sentences)));
  auto loss = [&](nn::Graph &graph) {
    std::mt19937_64 rng(config.seed);
    std::vector<nn::Var> terms;
    for (const Sentence &s : train) {
      const Sentence *batch[] = {&s};
      terms.push_back(tagger.Loss(graph, batch, rng));
    }
    return nn::AddN(terms);
  };
  const nn::GradCheckResult r =
      nn::GradCheck(loss, tagger.params().All(), points, step, config.seed);
  const bool pass = r.max_relative_error < tolerance;
  std::printf("%s %s: %zu coordinates, max relative error %.3e (tolerance %.1e)\n",
              pass ? "PASS" : "FAIL", nn::ArchName(config.kind).c_str(), r.checked,
              r.max_relative_error, tolerance);
  return pass ? 0 : 1;
}

int RunStats(const std::string &train_path, const std::string &test_path,
             const std::string &columns, const std::string &embeddings_path) {
  const ColumnSpec spec = ColumnSpec::Parse(columns);
  const Corpus corpus = Corpus::Build(LoadConllFile(train_path, spec), LoadConllFile(test_path, spec));
  const CorpusStats stats = ComputeStats(corpus);
  auto split = [](const char *name, const SplitStats &s) {
    std::printf("%-6s sentences %zu tokens %zu types %zu average length %.2f\n", name,
                s.sentences, s.tokens, s.types, s.average_length);
  };
  split("train", stats.train);
  split("test", stats.test);
  std::printf("tags %zu concepts %zu oov rate %.4f\n", stats.tags, stats.concepts, stats.oov_rate);
  if (!embeddings_path.empty()) {
    const std::set<std::string> train_keys = corpus.TrainKeys();
    const std::set<std::string> test_keys = LookupKeys(corpus.test);
    std::set<std::string> all = train_keys;
    all.insert(test_keys.begin(), test_keys.end());
    const EmbeddingTable table = LoadEmbeddingsFile(embeddings_path, all);
    std::printf("types without a vector: train %zu test %zu\n", CountMissing(table, train_keys),
                CountMissing(table, test_keys));
  }
  for (const std::string &w : corpus.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Concept tagging toolkit: WFST, CRF and neural taggers with a benchmark runner"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  uint64_t seed = 0;
  app.add_option("--out-dir", g.out_dir, "Directory for models, predictions and reports");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  auto *seed_opt = app.add_option("--seed", seed, "Seed for neural models (overrides recipes)");

  auto *train = app.add_subcommand("train", "Train one model and score it on the test split");
  std::string recipe_file, recipe_name, model_out;
  bench::Recipe flags;
  std::vector<std::string> settings;
  train->add_option("--recipe", recipe_file, "Recipe file; trains the section named by --name");
  train->add_option("--name", recipe_name, "Recipe section, or the output name without --recipe");
  train->add_option("--model", flags.model, "wfst, crf, crf+emb or a neural architecture");
  train->add_option("--train", flags.train_path, "Training data");
  train->add_option("--test", flags.test_path, "Test data");
  train->add_option("--embeddings", flags.embeddings_path, "Word vectors");
  train->add_option("--columns", flags.columns, "Column layout, e.g. token,pos,lemma,tag");
  train->add_option("--set", settings, "Hyperparameter key=value (repeatable)");
  train->add_option("-o,--output", model_out, "Copy the trained model here");

  auto *tag = app.add_subcommand("tag", "Tag sentences with a trained model");
  std::string model_path, input, tag_columns = "token", tag_embeddings, tag_output;
  tag->add_option("--model", model_path, "Model file")->required();
  tag->add_option("--input", input, "One token per line, blank line between sentences")->required();
  tag->add_option("--columns", tag_columns, "Input layout without the tag, e.g. token,pos,lemma");
  tag->add_option("--embeddings", tag_embeddings, "Word vectors (CRF models with emb features)");
  tag->add_option("-o,--output", tag_output, "Prediction file (default stdout)");

  auto *ev = app.add_subcommand("eval", "Score a prediction file against gold data");
  std::string gold, pred, eval_columns = "token,tag";
  ev->add_option("--gold", gold, "Gold data")->required();
  ev->add_option("--pred", pred, "Predictions: token and tag per line")->required();
  ev->add_option("--columns", eval_columns, "Gold column layout");

  auto *bench_cmd = app.add_subcommand("bench", "Run recipe files and write report.txt/report.csv");
  std::vector<std::string> recipe_files, only;
  bool list = false;
  bench_cmd->add_option("recipes", recipe_files, "Recipe files")->required();
  bench_cmd->add_option("--only", only, "Run only these recipe names");
  bench_cmd->add_flag("--list", list, "Validate and list recipes without running them");

  auto *gc = app.add_subcommand("gradcheck", "Check backprop against central differences");
  std::string gc_arch = "LSTM-CRF", gc_train, gc_columns = "token,tag";
  int gc_sentences = 2, gc_points = 200, gc_hidden = 8, gc_dim = 6;
  double gc_step = 1e-5, gc_tolerance = 1e-4;
  gc->add_option("--arch", gc_arch, "Architecture name");
  gc->add_option("--train", gc_train, "Data supplying vocabulary and sentences")->required();
  gc->add_option("--columns", gc_columns, "Column layout");
  gc->add_option("--sentences", gc_sentences, "Sentences in the checked loss");
  gc->add_option("--points", gc_points, "Coordinates to check (-1 for all)");
  gc->add_option("--step", gc_step, "Central-difference step");
  gc->add_option("--tolerance", gc_tolerance, "Maximum relative error");
  gc->add_option("--hidden", gc_hidden, "Hidden size");
  gc->add_option("--embedding-dim", gc_dim, "Word vector size");

  auto *st = app.add_subcommand("stats", "Corpus statistics");
  std::string st_train, st_test, st_columns = "token,tag", st_embeddings;
  st->add_option("--train", st_train, "Training data")->required();
  st->add_option("--test", st_test, "Test data")->required();
  st->add_option("--columns", st_columns, "Column layout");
  st->add_option("--embeddings", st_embeddings, "Word vectors");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;
  try {
    if (*train) return RunTrain(g, recipe_file, recipe_name, flags, settings, model_out);
    if (*tag) return RunTag(model_path, input, tag_columns, tag_embeddings, tag_output);
    if (*ev) return RunEval(gold, pred, eval_columns);
    if (*bench_cmd) return RunBench(g, recipe_files, only, list);
    if (*gc) {
      return RunGradCheck(g, gc_arch, gc_train, gc_columns, gc_sentences, gc_points, gc_step,
                          gc_tolerance, gc_hidden, gc_dim);
    }
    if (*st) return RunStats(st_train, st_test, st_columns, st_embeddings);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
