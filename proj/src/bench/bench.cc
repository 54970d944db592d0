#include "conceptag/bench/bench.h"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "conceptag/errors.h"
#include "conceptag/eval/scorer.h"
#include "conceptag/nn/trainer.h"

namespace conceptag::bench {
namespace {

namespace fs = std::filesystem;

struct Dataset {
  std::vector<Sentence> train;
  std::vector<Sentence> test;
  std::optional<EmbeddingTable> embeddings;
};

template <typename E>
[[noreturn]] void RethrowAs(const std::string &context, const E &e) {
  throw E(context + e.what());
}

Dataset LoadDataset(const Recipe &recipe, bool need_embeddings) {
  const std::string context = "recipe " + recipe.name + ": ";
  try {
    Dataset d;
    const ColumnSpec columns = recipe.Columns();
    d.train = LoadConllFile(recipe.train_path, columns);
    d.test = LoadConllFile(recipe.test_path, columns);
    if (need_embeddings && !recipe.embeddings_path.empty()) {
      std::set<std::string> keys;
      for (const auto *split : {&d.train, &d.test}) {
        for (const Sentence &s : *split) {
          for (const Token &t : s.tokens) keys.insert(LookupKey(t.surface));
        }
      }
      d.embeddings = LoadEmbeddingsFile(recipe.embeddings_path, keys);
    }
    return d;
  } catch (const ParseError &e) {
    throw ParseError(context, e);
  } catch (const EncodingError &e) {
    RethrowAs(context, e);
  } catch (const FormatError &e) {
    RethrowAs(context, e);
  } catch (const Error &e) {
    RethrowAs(context, e);
  }
}

std::vector<eval::TagSequence> GoldTags(const std::vector<Sentence> &sentences) {
  std::vector<eval::TagSequence> gold;
  gold.reserve(sentences.size());
  for (const Sentence &s : sentences) gold.push_back(s.tags);
  return gold;
}

void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

std::string Fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Pad(const std::string &text, size_t width) {
  return text.size() >= width ? text + " " : text + std::string(width - text.size(), ' ');
}

std::string UtcNow() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Runs `work(i)` for i in [0, n) on up to `threads` workers. The exception
// of the lowest failing index is rethrown after all workers finish.
void ParallelFor(size_t n, int threads, const std::function<void(size_t)> &work) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const size_t count = std::min<size_t>(n, static_cast<size_t>(std::max(1, threads)));
  {
    std::vector<std::jthread> pool;
    for (size_t t = 1; t < count; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

SeedResult RunSeedImpl(const Recipe &recipe, uint64_t seed, const std::string &out_dir,
                       int threads) {
  const ModelFamily family = recipe.Family();
  const bool need_embeddings = family != ModelFamily::kWfst && family != ModelFamily::kCrf;
  const Dataset data = LoadDataset(recipe, need_embeddings);
  const EmbeddingTable *embeddings = data.embeddings ? &*data.embeddings : nullptr;
  const fs::path dir = fs::path(out_dir) / recipe.name / std::to_string(seed);
  fs::create_directories(dir);

  std::vector<std::vector<std::string>> predicted;
  std::ofstream model(dir / "model.txt", std::ios::binary);
  switch (family) {
    case ModelFamily::kWfst: {
      const wfst::WfstTagger tagger = wfst::WfstTagger::Train(data.train, recipe.WfstSettings());
      for (const Sentence &s : data.test) predicted.push_back(tagger.Decode(s));
      tagger.Save(model);
      break;
    }
    case ModelFamily::kCrf:
    case ModelFamily::kCrfEmb: {
      crf::CrfTrainOptions options = recipe.CrfSettings();
      options.threads = threads;
      crf::CrfTrainReport report;
      const crf::CrfModel crf =
          crf::TrainCrf(data.train, recipe.CrfTemplates(), options, embeddings, &report);
      for (const Sentence &s : data.test) predicted.push_back(crf.Decode(s, embeddings));
      crf.Save(model);
      std::ostringstream log;
      log << "iterations " << report.iterations << "\ninitial " << Fixed2(report.initial_objective)
          << "\nfinal " << Fixed2(report.final_objective) << "\ntermination "
          << report.termination << "\n";
      WriteText(dir / "optimizer.txt", log.str());
      break;
    }
    case ModelFamily::kNeural: {
      nn::TrainTrace trace;
      const nn::NeuralTagger tagger =
          nn::TrainNeural(recipe.NeuralSettings(seed), data.train, data.test, embeddings, &trace);
      predicted = tagger.PredictAll(data.test);
      std::ostringstream csv;
      csv << "epoch,loss,f1\n";
      char line[128];
      for (size_t e = 0; e < trace.epoch_f1.size(); ++e) {
        std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g\n", e + 1, trace.epoch_loss[e],
                      trace.epoch_f1[e]);
        csv << line;
      }
      WriteText(dir / "trace.csv", csv.str());
      const double f1 = eval::Score(GoldTags(data.test), predicted).F1Percent();
      tagger.Save(model, f1);
      break;
    }
  }
  model.close();
  if (!model) throw Error("cannot write model under " + dir.string());

  const double f1 = eval::Score(GoldTags(data.test), predicted).F1Percent();
  std::ofstream pred(dir / "predictions.txt", std::ios::binary);
  WritePredictions(pred, data.test, predicted);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g\n", f1);
  WriteText(dir / "f1.txt", buf);
  return {seed, f1};
}

std::vector<uint64_t> SeedsFor(const Recipe &recipe, const BenchOptions &options) {
  if (options.seed_override && recipe.Family() == ModelFamily::kNeural) {
    return {*options.seed_override};
  }
  return recipe.seeds;
}

BenchRow MakeRow(const Recipe &recipe, std::vector<SeedResult> runs) {
  std::sort(runs.begin(), runs.end(),
            [](const SeedResult &a, const SeedResult &b) { return a.seed < b.seed; });
  BenchRow row;
  row.recipe = recipe.name;
  std::vector<double> f1;
  for (const SeedResult &r : runs) f1.push_back(r.f1);
  row.stats = eval::AggregateRuns(f1);
  row.runs = std::move(runs);
  row.reference_f1 = recipe.reference_f1;
  row.citation = recipe.citation;
  return row;
}

}  // namespace

std::optional<double> BenchRow::Delta() const {
  if (!reference_f1) return std::nullopt;
  return stats.avg_f1 - *reference_f1;
}

std::string Sha256File(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest initialization failed");
  }
  std::vector<char> buffer(1 << 16);
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &length);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(byte, sizeof(byte), "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

SeedResult RunSeed(const Recipe &recipe, uint64_t seed, const std::string &out_dir) {
  recipe.Validate();
  return RunSeedImpl(recipe, seed, out_dir, 1);
}

BenchReport RunRecipes(std::vector<Recipe> recipes, const BenchOptions &options) {
  if (recipes.empty()) throw ValidationError("bench: no recipes to run");
  std::set<std::string> names;
  for (const Recipe &r : recipes) {
    r.Validate();
    if (!names.insert(r.name).second) throw ValidationError("bench: duplicate recipe " + r.name);
  }
  std::sort(recipes.begin(), recipes.end(),
            [](const Recipe &a, const Recipe &b) { return a.name < b.name; });

  BenchReport report;
  report.environment.timestamp = UtcNow();
  for (const Recipe &r : recipes) {
    for (const std::string *path : {&r.train_path, &r.test_path, &r.embeddings_path}) {
      if (path->empty() || report.environment.checksums.count(*path)) continue;
      try {
        report.environment.checksums[*path] = Sha256File(*path);
      } catch (const Error &e) {
        throw Error("recipe " + r.name + ": " + e.what());
      }
    }
  }

  struct Unit {
    size_t recipe;
    uint64_t seed;
  };
  std::vector<Unit> units;
  for (size_t i = 0; i < recipes.size(); ++i) {
    for (uint64_t seed : SeedsFor(recipes[i], options)) units.push_back({i, seed});
  }
  // A lone unit gets every thread; the CRF objective is thread-count
  // invariant, so this never changes results.
  const int inner = units.size() == 1 ? std::max(1, options.threads) : 1;
  std::vector<SeedResult> results(units.size());
  std::mutex log_mutex;
  ParallelFor(units.size(), options.threads, [&](size_t i) {
    const Recipe &recipe = recipes[units[i].recipe];
    results[i] = RunSeedImpl(recipe, units[i].seed, options.out_dir, inner);
    if (options.log) {
      std::lock_guard<std::mutex> lock(log_mutex);
      options.log(recipe.name + " seed " + std::to_string(units[i].seed) + " f1 " +
                  Fixed2(results[i].f1));
    }
  });

  for (size_t r = 0; r < recipes.size(); ++r) {
    std::vector<SeedResult> runs;
    for (size_t i = 0; i < units.size(); ++i) {
      if (units[i].recipe == r) runs.push_back(results[i]);
    }
    report.rows.push_back(MakeRow(recipes[r], std::move(runs)));
  }
  return report;
}

BenchRow RunRecipe(const Recipe &recipe, const BenchOptions &options) {
  return RunRecipes({recipe}, options).rows.front();
}

std::string FormatReportText(const BenchReport &report) {
  size_t width = 20;
  for (const BenchRow &row : report.rows) width = std::max(width, row.recipe.size() + 2);
  char cols[96];
  std::ostringstream out;
  std::snprintf(cols, sizeof(cols), " %10s %8s %5s", "reference", "delta", "runs");
  out << eval::FormatRunStatsHeader(width) << cols << "\n";
  for (const BenchRow &row : report.rows) {
    const std::optional<double> delta = row.Delta();
    std::snprintf(cols, sizeof(cols), " %10s %8s %5zu",
                  row.reference_f1 ? Fixed2(*row.reference_f1).c_str() : "-",
                  delta ? Fixed2(*delta).c_str() : "-", row.stats.n_runs);
    out << eval::FormatRunStatsRow(row.recipe, row.stats, width) << cols << "\n";
  }
  out << "\n# toolkit " << report.environment.toolkit << "\n";
  out << "# generated " << report.environment.timestamp << "\n";
  for (const auto &[path, digest] : report.environment.checksums) {
    out << "# sha256 " << digest << " " << path << "\n";
  }
  bool any_citation = false;
  for (const BenchRow &row : report.rows) {
    if (row.citation.empty()) continue;
    if (!any_citation) out << "# references\n";
    any_citation = true;
    out << "#   " << Pad(row.recipe, width) << row.citation << "\n";
  }
  return out.str();
}

std::string FormatReportCsv(const BenchReport &report) {
  std::ostringstream out;
  out << "recipe,seed,f1,min,avg,best,reference,delta\n";
  for (const BenchRow &row : report.rows) {
    for (const SeedResult &run : row.runs) {
      out << row.recipe << "," << run.seed << "," << Fixed2(run.f1) << ",,,,,\n";
    }
    const std::optional<double> delta = row.Delta();
    out << row.recipe << ",all,," << Fixed2(row.stats.min_f1) << ","
        << Fixed2(row.stats.avg_f1) << "," << Fixed2(row.stats.best_f1) << ","
        << (row.reference_f1 ? Fixed2(*row.reference_f1) : "") << ","
        << (delta ? Fixed2(*delta) : "") << "\n";
  }
  return out.str();
}

}  // namespace conceptag::bench
