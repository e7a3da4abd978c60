#include "ttmr/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ttmr/retrieval.hpp"
#include "ttmr/textgen.hpp"
#include "ttmr/util.hpp"

namespace ttmr {

using nlohmann::json;

PipelineConfig pipeline_config_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  PipelineConfig c;
  c.seed = j.value("seed", c.seed);
  c.n_tracks = j.value("n_tracks", c.n_tracks);
  c.n_artists = j.value("n_artists", c.n_artists);
  c.dataset_id = j.value("dataset_id", c.dataset_id);
  c.n_triplets = j.value("n_triplets", c.n_triplets);
  c.recall_k = j.value("recall_k", c.recall_k);
  c.ndcg_k = j.value("ndcg_k", c.ndcg_k);
  c.tag_min_count = j.value("tag_min_count", c.tag_min_count);
  if (j.contains("train")) c.train = train_config_from_json(j.at("train").dump());
  return c;
}

void write_mixture_config(const std::vector<DatasetSpec>& specs, const std::string& path) {
  json j;
  j["datasets"] = json::array();
  for (const auto& s : specs) {
    j["datasets"].push_back({{"dataset_id", s.dataset_id},
                             {"sample_prob", s.sample_prob},
                             {"has_content", s.has_content},
                             {"has_metadata", s.has_metadata},
                             {"has_similarity", s.has_similarity}});
  }
  write_text_file(path, j.dump(2) + "\n");
}

EvalBundlePaths write_synthetic_eval_bundle(const CorpusMixture& corpus,
                                            const SimilarityGraph& graph, std::uint64_t seed,
                                            std::size_t n_triplets, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  EvalBundlePaths paths;
  paths.captions_path = out_dir + "/captions_eval.jsonl";
  paths.tags_path = out_dir + "/tags_eval.jsonl";
  paths.triplets_path = out_dir + "/triplets.jsonl";
  paths.artist_eval_path = out_dir + "/artist_eval.jsonl";

  std::ostringstream captions, tags, triplets, artist_eval;
  std::vector<std::string> ids;
  for (const auto& [id, track] : corpus.tracks) ids.push_back(id);

  for (const auto& [id, track] : corpus.tracks) {
    if (!track.tags.empty()) {
      json cj;
      cj["track_id"] = id;
      cj["caption"] = default_caption(track.tags);
      captions << cj.dump() << "\n";
      json tj;
      tj["track_id"] = id;
      tj["tags"] = track.tags;
      tags << tj.dump() << "\n";
    }
  }

  // Same-artist candidate preferred as the human choice; fall back to a
  // random pair when the anchor's artist has a single track.
  std::map<std::string, std::vector<std::string>> by_artist;
  for (const auto& [id, track] : corpus.tracks)
    if (track.artist_id) by_artist[*track.artist_id].push_back(id);

  Rng rng(seed ^ 0x5eedba5eULL);
  std::size_t made = 0, attempts = 0;
  while (made < n_triplets && attempts < n_triplets * 50) {
    ++attempts;
    const std::string& anchor = ids[rng.index(ids.size())];
    const TrackRecord& a = corpus.track(anchor);
    if (!a.title || !a.artist_name || !a.artist_id) continue;
    const auto& siblings = by_artist[*a.artist_id];
    std::string cand_a;
    if (siblings.size() > 1) {
      do {
        cand_a = siblings[rng.index(siblings.size())];
      } while (cand_a == anchor);
    } else {
      cand_a = ids[rng.index(ids.size())];
      if (cand_a == anchor) continue;
    }
    std::string cand_b = ids[rng.index(ids.size())];
    if (cand_b == anchor || cand_b == cand_a) continue;
    json j;
    j["anchor_id"] = anchor;
    j["cand_a"] = cand_a;
    j["cand_b"] = cand_b;
    j["choice"] = "a";
    triplets << j.dump() << "\n";
    ++made;
  }

  for (const auto& artist : graph.artists) {
    const auto* nbrs = graph.neighbors(artist);
    if (!nbrs) continue;
    json j;
    j["query_artist"] = artist;
    j["relevant"] = *nbrs;
    artist_eval << j.dump() << "\n";
  }

  write_text_file(paths.captions_path, captions.str());
  write_text_file(paths.tags_path, tags.str());
  write_text_file(paths.triplets_path, triplets.str());
  write_text_file(paths.artist_eval_path, artist_eval.str());
  return paths;
}

FeatureTable featurize_corpus(const CorpusMixture& corpus, const MelConfig& mel, bool allow_synth,
                              const std::string& audio_root) {
  FeatureTable features;
  for (const auto& [id, track] : corpus.tracks) {
    std::vector<double> signal;
    if (track.audio_ref) {
      std::string path = *track.audio_ref;
      if (!audio_root.empty() && !path.empty() && path[0] != '/')
        path = audio_root + "/" + path;
      signal = load_audio(path, mel.sample_rate);
    } else if (allow_synth) {
      signal = synth_signal(id, mel);
    } else {
      throw DataError("track " + id + " has no audio_ref (pass --synth to synthesize)");
    }
    features[id] = pooled_feature(log_mel(signal, mel));
  }
  return features;
}

std::string run_pipeline(const PipelineConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  // 1. synthetic corpus + mixture config
  SyntheticCorpusConfig scfg;
  scfg.seed = cfg.seed;
  scfg.n_tracks = cfg.n_tracks;
  scfg.n_artists = cfg.n_artists;
  scfg.dataset_id = cfg.dataset_id;
  SyntheticCorpusFiles files = generate_synthetic_corpus(scfg, out_dir);

  std::vector<DatasetSpec> specs = {{cfg.dataset_id, 1.0, true, true, true}};
  const std::string mixture_path = out_dir + "/mixture.json";
  write_mixture_config(specs, mixture_path);

  CorpusMixture corpus = load_corpus(files.tracks_path, specs);
  ArtistTable artists = load_artists(files.artists_path);
  SimilarityGraph graph = build_graph(files.similarity_path, corpus);

  // 2. eval bundle
  EvalBundlePaths bundle_paths =
      write_synthetic_eval_bundle(corpus, graph, cfg.seed, cfg.n_triplets, out_dir);

  // 3. features
  MelConfig mel;
  FeatureTable features = featurize_corpus(corpus, mel, /*allow_synth=*/true);
  const std::string features_path = out_dir + "/features.jsonl";
  save_features(features, features_path);

  // 4. train
  TrainConfig tcfg = cfg.train;
  tcfg.seed = cfg.seed;
  TrainInputs inputs;
  inputs.corpus = &corpus;
  inputs.graph = &graph;
  inputs.artists = &artists;
  inputs.features = &features;
  Trainer trainer(tcfg, inputs);
  std::ostringstream metrics_out;
  trainer.run([&](const StepMetrics& m) {
    json j;
    j["step"] = m.step;
    j["loss"] = m.loss;
    j["lr"] = m.lr;
    j["tau"] = m.tau;
    metrics_out << j.dump() << "\n";
  });
  const std::string metrics_path = out_dir + "/metrics.jsonl";
  write_text_file(metrics_path, metrics_out.str());
  const std::string checkpoint_path = out_dir + "/checkpoint.json";
  trainer.save_checkpoint(checkpoint_path);

  // 5. index
  EmbeddingIndex index = build_index(trainer.model(), corpus, features);
  const std::string index_path = out_dir + "/index.bin";
  save_index(index, index_path);

  // 6. eval
  EvalBundle bundle;
  bundle.captions_path = bundle_paths.captions_path;
  bundle.tags_path = bundle_paths.tags_path;
  bundle.triplets_path = bundle_paths.triplets_path;
  bundle.artist_eval_path = bundle_paths.artist_eval_path;
  bundle.recall_k = cfg.recall_k;
  bundle.ndcg_k = cfg.ndcg_k;
  bundle.tag_min_count = cfg.tag_min_count;
  const std::string report_path = out_dir + "/report.json";
  write_text_file(report_path,
                  run_eval_suite(trainer.model(), index, corpus, artists, bundle) + "\n");

  // 7. manifest
  json manifest;
  manifest["tool_version"] = "ttmr 0.1.0";
  manifest["seed"] = cfg.seed;
  json cfg_json;
  cfg_json["seed"] = cfg.seed;
  cfg_json["n_tracks"] = cfg.n_tracks;
  cfg_json["n_artists"] = cfg.n_artists;
  cfg_json["dataset_id"] = cfg.dataset_id;
  cfg_json["n_triplets"] = cfg.n_triplets;
  cfg_json["recall_k"] = cfg.recall_k;
  cfg_json["ndcg_k"] = cfg.ndcg_k;
  cfg_json["tag_min_count"] = cfg.tag_min_count;
  cfg_json["train"] = json::parse(train_config_to_json(tcfg));
  manifest["config_hash"] = to_hex(fnv1a64(cfg_json.dump()));
  json artifacts = json::object();
  for (const std::string& p :
       {files.tracks_path, files.artists_path, files.similarity_path, mixture_path,
        bundle_paths.captions_path, bundle_paths.tags_path, bundle_paths.triplets_path,
        bundle_paths.artist_eval_path, features_path, metrics_path, checkpoint_path, index_path,
        report_path}) {
    artifacts[fs::path(p).filename().string()] = file_digest(p);
  }
  manifest["artifacts"] = std::move(artifacts);
  const std::string manifest_path = out_dir + "/manifest.json";
  write_text_file(manifest_path, manifest.dump(2) + "\n");
  return manifest_path;
}

}  // namespace ttmr
