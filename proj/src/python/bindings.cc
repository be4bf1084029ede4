#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "genreforge/classifier.h"
#include "genreforge/corpus.h"
#include "genreforge/error.h"
#include "genreforge/evaluation.h"
#include "genreforge/metaphor.h"
#include "genreforge/metre.h"
#include "genreforge/pipeline.h"
#include "genreforge/syntax.h"

namespace py = pybind11;
using namespace genreforge;

namespace {

Language lang_arg(const std::string& s) {
  auto l = parse_language(s);
  if (!l) throw Error(ErrorCode::kInvalidArgument, "unknown language '" + s + "'");
  return *l;
}

py::dict pca_dict(const PcaResult& r) {
  auto rows = [](const Matrix& m) {
    std::vector<std::vector<double>> out(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
    return out;
  };
  py::dict d;
  d["coords"] = rows(r.coords);
  d["components"] = rows(r.components);
  d["explained_variance"] = r.explained_variance;
  d["means"] = r.means;
  d["total_variance"] = r.total_variance;
  d["degenerate"] = r.degenerate;
  d["warning"] = r.warning;
  return d;
}

}  // namespace

PYBIND11_MODULE(_genreforge, m) {
  m.doc() = "Genre classification with explicit linguistic features";

  py::register_exception<Error>(m, "GenreforgeError", PyExc_RuntimeError);

  py::class_<F1Pair>(m, "F1Pair")
      .def_readonly("x", &F1Pair::x)
      .def_readonly("y", &F1Pair::y)
      .def_readonly("support_x", &F1Pair::support_x)
      .def_readonly("support_y", &F1Pair::support_y)
      .def("__repr__", [](const F1Pair& f) {
        return "F1Pair(x=" + std::to_string(f.x) + ", y=" + std::to_string(f.y) + ")";
      });

  m.def("f1_pair", [](const std::vector<int>& predicted, const std::vector<int>& labels) {
    return f1_pair(predicted, labels);
  }, py::arg("predicted"), py::arg("labels"));

  m.def("macro_average", [](const std::map<std::string, GenrePair>& pairs) {
    const auto s = macro_average(pairs);
    return py::make_tuple(s.genre_means.first, s.genre_means.second, s.macro);
  }, py::arg("pairs"), "Per-genre means and the macro F1 over languages.");

  m.def("delta_points", &delta_points, py::arg("baseline"), py::arg("augmented"));

  m.def("tree_depths", [](const std::string& conllu) {
    std::vector<std::pair<std::string, int>> out;
    for (const auto& s : parse_conllu(conllu)) out.emplace_back(s.sentence_id, tree_depth(s));
    return out;
  }, py::arg("conllu_text"));

  m.def("depth_ratio", &depth_ratio, py::arg("depth"), py::arg("length"));

  m.def("metre_pattern", [](const std::string& text, const std::string& lexicon_tsv,
                            const std::string& language) {
    const Language lang = lang_arg(language);
    const auto lex = parse_stress_lexicon(lexicon_tsv, lang);
    const auto p = metre_pattern(text, lex, lang);
    return std::vector<int>(p.bits.begin(), p.bits.end());
  }, py::arg("text"), py::arg("lexicon_tsv"), py::arg("language") = "EN");

  m.def("proxy_metaphor_count", [](const std::string& text, const std::set<std::string>& lemmas) {
    return proxy_count(text, MetaphorLexicon{lemmas});
  }, py::arg("text"), py::arg("lemmas"));

  m.def("encode_sentence", [](const std::string& text, std::size_t dim, int ngram_min,
                              int ngram_max, std::uint64_t hash_seed) {
    EncoderConfig c;
    c.dim = dim;
    c.ngram_min = ngram_min;
    c.ngram_max = ngram_max;
    c.hash_seed = hash_seed;
    return encode_sentence(text, c);
  }, py::arg("text"), py::arg("dim") = 4096, py::arg("ngram_min") = 2,
     py::arg("ngram_max") = 4, py::arg("hash_seed") = 0);

  m.def("pca_project", [](const std::vector<std::vector<double>>& rows, std::size_t k) {
    Matrix x(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != x.cols) throw Error(ErrorCode::kShapeMismatch, "ragged rows");
      std::copy(rows[i].begin(), rows[i].end(), x.row(i).begin());
    }
    return pca_dict(pca_project(x, k));
  }, py::arg("rows"), py::arg("k") = 2);

  m.def("train_count", [](std::size_t n) { return train_count(n, SplitRatio{}); }, py::arg("n"));

  m.def("validate_config", [](const std::filesystem::path& path) {
    std::vector<std::string> out;
    for (const auto& d : validate_config(path)) out.push_back(d.str());
    return out;
  }, py::arg("path"));

  m.def("run_pipeline", [](const std::filesystem::path& config, std::size_t workers) {
    const auto cfg = load_config(config);
    PipelineResult r;
    {
      py::gil_scoped_release release;
      r = run_pipeline(cfg, workers ? workers : configured_workers());
    }
    py::dict d;
    d["ok"] = r.ok;
    d["output"] = r.output.string();
    d["models_trained"] = r.models_trained;
    d["models_cached"] = r.models_cached;
    d["failed_stage"] = r.failed_stage;
    d["error"] = r.error;
    std::map<std::string, std::string> arts;
    for (const auto& a : r.artifacts) arts[a.path] = a.sha256;
    d["artifacts"] = arts;
    return d;
  }, py::arg("config"), py::arg("workers") = 0);
}
