#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ttmr/rng.hpp"

namespace ttmr {

struct TrackRecord {
  std::string track_id;
  std::string dataset_id;
  std::optional<std::string> title;
  std::optional<std::string> artist_id;
  std::optional<std::string> artist_name;
  std::optional<std::string> album;
  std::vector<std::string> tags;
  std::vector<std::string> captions;
  std::optional<std::string> features_ref;
  std::optional<std::string> audio_ref;
};

// One row of the mixture table: which dataset, how often it is drawn,
// and which text facets its annotations support (content / metadata /
// similarity).
struct DatasetSpec {
  std::string dataset_id;
  double sample_prob = 0.0;
  bool has_content = false;
  bool has_metadata = false;
  bool has_similarity = false;
};

struct CorpusMixture {
  std::vector<DatasetSpec> specs;
  // track_id -> record, ordered for deterministic iteration
  std::map<std::string, TrackRecord> tracks;
  // dataset_id -> sorted track ids
  std::map<std::string, std::vector<std::string>> pools;

  const TrackRecord& track(const std::string& id) const;
  const DatasetSpec& spec_for(const std::string& dataset_id) const;
};

// artist_id -> display name, from artists.jsonl
using ArtistTable = std::map<std::string, std::string>;

TrackRecord parse_track_record(const std::string& json_line, std::size_t line_no);

CorpusMixture load_corpus(const std::string& tracks_path, const std::vector<DatasetSpec>& specs);

ArtistTable load_artists(const std::string& artists_path);

std::vector<DatasetSpec> load_mixture_config(const std::string& config_path);
void validate_specs(const std::vector<DatasetSpec>& specs);

// Dataset-first sampling: each slot draws a dataset by sample_prob, then a
// track uniformly within that dataset's pool.
std::vector<std::string> sample_batch_sources(const CorpusMixture& mixture,
                                              std::size_t batch_size, Rng& rng);

struct SyntheticCorpusConfig {
  std::uint64_t seed = 0;
  std::size_t n_tracks = 0;
  std::size_t n_artists = 0;
  std::vector<std::string> vocab;  // tag vocabulary; defaults applied if empty
  std::string dataset_id = "synth";
  std::size_t tracks_per_eval_artist = 0;  // reserved
};

struct SyntheticCorpusFiles {
  std::string tracks_path;
  std::string artists_path;
  std::string similarity_path;
};

// Deterministic in all arguments. Every track gets tags, a title, and an
// artist; every artist gets at least one similarity edge.
SyntheticCorpusFiles generate_synthetic_corpus(const SyntheticCorpusConfig& cfg,
                                               const std::string& out_dir);

}  // namespace ttmr
