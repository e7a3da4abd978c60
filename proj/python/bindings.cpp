#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ttmr/dsp.hpp"
#include "ttmr/eval.hpp"
#include "ttmr/model.hpp"
#include "ttmr/pipeline.hpp"
#include "ttmr/retrieval.hpp"
#include "ttmr/textgen.hpp"
#include "ttmr/train.hpp"
#include "ttmr/util.hpp"

namespace py = pybind11;

namespace {

ttmr::Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ttmr::DataError("empty embedding list");
  ttmr::Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols) throw ttmr::DataError("ragged embedding list");
    for (std::size_t j = 0; j < m.cols; ++j) m.at(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_ttmr, m) {
  m.doc() = "text-to-music retrieval core (dual encoder, mel frontend, metrics)";

  m.def("info_nce",
        [](const std::vector<std::vector<double>>& zt, const std::vector<std::vector<double>>& za,
           double tau) { return ttmr::info_nce(to_matrix(zt), to_matrix(za), tau); },
        py::arg("z_text"), py::arg("z_audio"), py::arg("tau"));

  m.def("log_mel",
        [](const std::vector<double>& signal) {
          ttmr::MelConfig cfg;
          auto mel = ttmr::log_mel(signal, cfg);
          std::vector<std::vector<double>> out(mel.values.rows,
                                               std::vector<double>(mel.values.cols));
          for (std::size_t f = 0; f < mel.values.rows; ++f)
            for (std::size_t c = 0; c < mel.values.cols; ++c) out[f][c] = mel.values.at(f, c);
          return out;
        },
        py::arg("signal"), "log-mel spectrogram at the default 22.05 kHz / 128-bin config");

  m.def("lr_at_step",
        [](double base_lr, std::size_t warmup, std::size_t total, std::size_t step) {
          ttmr::TrainConfig cfg;
          cfg.base_lr = base_lr;
          cfg.warmup_steps = warmup;
          cfg.total_steps = total;
          return ttmr::lr_at_step(cfg, step);
        },
        py::arg("base_lr"), py::arg("warmup_steps"), py::arg("total_steps"), py::arg("step"));

  m.def("render_metadata_text",
        [](const std::optional<std::string>& title, const std::optional<std::string>& artist,
           const std::optional<std::string>& album) {
          return ttmr::render_metadata_text(title, artist, album);
        },
        py::arg("title"), py::arg("artist"), py::arg("album") = std::nullopt);
  m.def("render_similarity_text", &ttmr::render_similarity_text, py::arg("artist"));
  m.def("default_caption", &ttmr::default_caption, py::arg("tags"));

  m.def("search_topk",
        [](const std::vector<std::string>& ids, const std::vector<std::vector<double>>& vectors,
           const std::vector<double>& query, std::size_t k) {
          ttmr::EmbeddingIndex index;
          index.dim = query.size();
          index.ids = ids;
          index.vectors = to_matrix(vectors);
          auto hits = ttmr::search_topk(index, query, k);
          std::vector<std::pair<std::string, double>> out;
          for (const auto& h : hits) out.emplace_back(h.track_id, h.score);
          return out;
        },
        py::arg("ids"), py::arg("vectors"), py::arg("query"), py::arg("k"));

  m.def("binary_auc", &ttmr::binary_auc, py::arg("scores"), py::arg("labels"));

  m.def("ndcg_at_k",
        [](const std::vector<std::string>& ranking, const std::string& query,
           const std::vector<std::string>& relevant, std::size_t k) {
          ttmr::ArtistRelevance rel;
          rel.query_artist = query;
          rel.relevant = {relevant.begin(), relevant.end()};
          return ttmr::ndcg_at_k(ranking, rel, k);
        },
        py::arg("ranking"), py::arg("query"), py::arg("relevant"), py::arg("k") = 200);

  m.def("run_pipeline",
        [](const std::string& config_json, const std::string& out_dir) {
          return ttmr::run_pipeline(ttmr::pipeline_config_from_json(config_json), out_dir);
        },
        py::arg("config_json"), py::arg("out_dir"));
}
