#pragma once

#include <string>

#include "ttmr/corpus.hpp"
#include "ttmr/eval.hpp"
#include "ttmr/kgraph.hpp"
#include "ttmr/train.hpp"

namespace ttmr {

// End-to-end demo configuration: synthetic corpus -> features -> training
// -> index -> eval report, all derived from one seed.
struct PipelineConfig {
  std::uint64_t seed = 7;
  std::size_t n_tracks = 120;
  std::size_t n_artists = 12;
  std::string dataset_id = "synth";
  TrainConfig train;
  std::size_t n_triplets = 200;
  std::size_t recall_k = 10;
  std::size_t ndcg_k = 200;
  std::size_t tag_min_count = 10;
};

PipelineConfig pipeline_config_from_json(const std::string& json_text);

struct EvalBundlePaths {
  std::string captions_path;
  std::string tags_path;
  std::string triplets_path;
  std::string artist_eval_path;
};

// Deterministic eval judgments derived from the corpus and graph:
// captions from the default provider, tags verbatim, triplets preferring
// a same-artist candidate, artist relevance = graph neighbors.
EvalBundlePaths write_synthetic_eval_bundle(const CorpusMixture& corpus,
                                            const SimilarityGraph& graph, std::uint64_t seed,
                                            std::size_t n_triplets, const std::string& out_dir);

void write_mixture_config(const std::vector<DatasetSpec>& specs, const std::string& path);

// Runs the whole pipeline under out_dir and returns the manifest path.
// The manifest lists the seed, config hash, and a digest per artifact.
std::string run_pipeline(const PipelineConfig& cfg, const std::string& out_dir);

// Pooled log-mel features for every track; tracks without audio_ref get
// a deterministic synthetic signal when allow_synth is set.
FeatureTable featurize_corpus(const CorpusMixture& corpus, const MelConfig& mel,
                              bool allow_synth, const std::string& audio_root = "");

}  // namespace ttmr
