#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "conceptag/bench/bench.h"
#include "conceptag/bench/recipe.h"
#include "conceptag/corpus/corpus.h"
#include "conceptag/crf/crf_model.h"
#include "conceptag/errors.h"
#include "conceptag/eval/chunks.h"
#include "conceptag/eval/run_stats.h"
#include "conceptag/eval/scorer.h"
#include "conceptag/nn/trainer.h"
#include "conceptag/wfst/wfst_tagger.h"

namespace py = pybind11;
using namespace conceptag;

namespace {

Sentence MakeSentence(const std::vector<std::string> &tokens, std::vector<std::string> tags) {
  Sentence s;
  for (const auto &t : tokens) s.tokens.push_back({t, std::nullopt, std::nullopt});
  s.tags = tags.empty() ? std::vector<std::string>(tokens.size(), "O") : std::move(tags);
  if (s.tags.size() != s.tokens.size()) throw ShapeError("tokens and tags differ in length");
  return s;
}

template <typename T>
std::string Dump(const T &model) {
  std::ostringstream out;
  model.Save(out);
  return out.str();
}

py::dict ScoresDict(const eval::ChunkScores &s) {
  py::dict d;
  d["correct"] = s.correct;
  d["predicted"] = s.predicted;
  d["gold"] = s.gold;
  d["precision"] = s.precision;
  d["recall"] = s.recall;
  d["f1"] = s.f1;
  return d;
}

}  // namespace

PYBIND11_MODULE(_conceptag, m) {
  m.doc() = "Concept tagging with WFST, CRF and neural sequence taggers";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError &e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ShapeError &e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const Error &e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  py::class_<Token>(m, "Token")
      .def(py::init([](std::string surface, std::optional<std::string> pos,
                       std::optional<std::string> lemma) {
             return Token{std::move(surface), std::move(pos), std::move(lemma)};
           }),
           py::arg("surface"), py::arg("pos") = py::none(), py::arg("lemma") = py::none())
      .def_readwrite("surface", &Token::surface)
      .def_readwrite("pos", &Token::pos)
      .def_readwrite("lemma", &Token::lemma)
      .def("__repr__", [](const Token &t) { return "Token('" + t.surface + "')"; });

  py::class_<Sentence>(m, "Sentence")
      .def(py::init(&MakeSentence), py::arg("tokens"), py::arg("tags") = std::vector<std::string>{})
      .def_readwrite("tokens", &Sentence::tokens)
      .def_readwrite("tags", &Sentence::tags)
      .def_property_readonly("surfaces", &Sentence::Surfaces)
      .def("__len__", &Sentence::size);

  m.def("load_conll",
        [](const std::string &path, const std::string &columns) {
          return LoadConllFile(path, ColumnSpec::Parse(columns));
        },
        py::arg("path"), py::arg("columns") = "token,tag");
  m.def("normalize_numbers", [](const std::string &t) { return NormalizeNumbers(t); });
  m.def("lookup_key", [](const std::string &t) { return LookupKey(t); });

  m.def("extract_chunks", [](const std::vector<std::string> &tags) {
    std::vector<std::tuple<std::string, size_t, size_t>> out;
    for (const auto &c : eval::ExtractChunks(tags)) out.emplace_back(c.concept_name, c.start, c.end);
    return out;
  });
  m.def("score",
        [](const std::vector<eval::TagSequence> &gold, const std::vector<eval::TagSequence> &pred) {
          const eval::EvalReport r = eval::Score(gold, pred);
          py::dict d = ScoresDict(r.overall);
          py::dict per;
          for (const auto &[name, s] : r.per_concept) per[py::str(name)] = ScoresDict(s);
          d["per_concept"] = per;
          d["token_accuracy"] = r.token_accuracy;
          d["report"] = eval::FormatConlleval(r);
          return d;
        },
        py::arg("gold"), py::arg("pred"));

  py::class_<eval::RunStats>(m, "RunStats")
      .def_readonly("n_runs", &eval::RunStats::n_runs)
      .def_readonly("min_f1", &eval::RunStats::min_f1)
      .def_readonly("avg_f1", &eval::RunStats::avg_f1)
      .def_readonly("best_f1", &eval::RunStats::best_f1)
      .def_readonly("per_run", &eval::RunStats::per_run);
  m.def("aggregate_runs", &eval::AggregateRuns, py::arg("per_run_f1"));

  py::class_<wfst::WfstTagger>(m, "WfstTagger")
      .def_static(
          "train",
          [](const std::vector<Sentence> &train, int order, double discount) {
            return wfst::WfstTagger::Train(train, {order, discount});
          },
          py::arg("train"), py::arg("order") = 4, py::arg("discount") = 0.75,
          py::call_guard<py::gil_scoped_release>())
      .def("decode", &wfst::WfstTagger::Decode)
      .def("dumps", &Dump<wfst::WfstTagger>)
      .def_static("loads", [](const std::string &text) {
        std::istringstream in(text);
        return wfst::WfstTagger::Load(in);
      });

  py::class_<crf::CrfModel>(m, "CrfModel")
      .def_property_readonly("labels", &crf::CrfModel::labels)
      .def_property_readonly("num_features", &crf::CrfModel::NumFeatures)
      .def("decode", [](const crf::CrfModel &model, const Sentence &s) { return model.Decode(s); })
      .def("dumps", &Dump<crf::CrfModel>)
      .def_static("loads", [](const std::string &text) {
        std::istringstream in(text);
        return crf::CrfModel::Load(in);
      });
  m.def(
      "train_crf",
      [](const std::vector<Sentence> &train, const std::string &templates, double l2,
         int max_iterations, double tolerance, int threads) {
        crf::CrfTrainOptions o;
        o.l2 = l2;
        o.max_iterations = max_iterations;
        o.tolerance = tolerance;
        o.threads = threads;
        return crf::TrainCrf(train, crf::ParseTemplates(templates), o);
      },
      py::arg("train"), py::arg("templates"), py::arg("l2") = 1.0, py::arg("max_iterations") = 100,
      py::arg("tolerance") = 1e-5, py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

  m.def("architectures", &nn::ArchNames);
  py::class_<nn::NeuralTagger>(m, "NeuralTagger")
      .def_property_readonly("parameter_count", &nn::NeuralTagger::ParameterCount)
      .def("predict", &nn::NeuralTagger::Predict)
      .def("predict_all", &nn::NeuralTagger::PredictAll, py::arg("sentences"),
           py::arg("batch_size") = 32)
      .def("dumps", [](const nn::NeuralTagger &t) {
        std::ostringstream out;
        t.Save(out);
        return out.str();
      })
      .def_static("loads", [](const std::string &text) {
        std::istringstream in(text);
        return nn::NeuralTagger::Load(in);
      });
  m.def(
      "train_neural",
      [](const std::string &arch, const std::vector<Sentence> &train,
         const std::vector<Sentence> &test, int hidden, int epochs, int batch_size, double lr,
         double drop_rate, double emb_norm, int embedding_dim, uint64_t seed) {
        nn::ArchitectureConfig c;
        c.kind = nn::ParseArch(arch);
        c.hidden = hidden;
        c.epochs = epochs;
        c.batch_size = batch_size;
        c.lr = lr;
        c.drop_rate = drop_rate;
        c.emb_norm = emb_norm;
        c.embedding_dim = embedding_dim;
        c.seed = seed;
        nn::TrainTrace trace;
        nn::NeuralTagger tagger = nn::TrainNeural(c, train, test, nullptr, &trace);
        return std::make_pair(std::move(tagger), trace.epoch_f1);
      },
      py::arg("arch"), py::arg("train"), py::arg("test"), py::arg("hidden") = 100,
      py::arg("epochs") = 10, py::arg("batch_size") = 10, py::arg("lr") = 0.001,
      py::arg("drop_rate") = 0.0, py::arg("emb_norm") = 6.0, py::arg("embedding_dim") = 50,
      py::arg("seed") = 1, py::call_guard<py::gil_scoped_release>());

  py::class_<bench::Recipe>(m, "Recipe")
      .def_readonly("name", &bench::Recipe::name)
      .def_readonly("model", &bench::Recipe::model)
      .def_readonly("seeds", &bench::Recipe::seeds)
      .def_readonly("reference_f1", &bench::Recipe::reference_f1)
      .def_readonly("hyperparameters", &bench::Recipe::hyperparameters);
  m.def("load_recipes", &bench::LoadRecipesFile, py::arg("path"));
  m.def(
      "run_bench",
      [](const std::vector<std::string> &files, const std::string &out_dir, int threads) {
        std::vector<bench::Recipe> recipes;
        for (const auto &f : files) {
          for (auto &r : bench::LoadRecipesFile(f)) recipes.push_back(std::move(r));
        }
        bench::BenchOptions o;
        o.out_dir = out_dir;
        o.threads = threads;
        const bench::BenchReport report = bench::RunRecipes(std::move(recipes), o);
        return std::make_pair(bench::FormatReportText(report), bench::FormatReportCsv(report));
      },
      py::arg("recipe_files"), py::arg("out_dir"), py::arg("threads") = 1,
      py::call_guard<py::gil_scoped_release>());

  m.attr("__version__") = "0.1.0";
}
