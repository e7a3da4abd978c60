#pragma once

#include <map>
#include <string>
#include <vector>

#include "ttmr/corpus.hpp"
#include "ttmr/model.hpp"
#include "ttmr/train.hpp"

namespace ttmr {

// Ordered (track_id, unit vector) pairs; exact cosine search.
struct EmbeddingIndex {
  std::size_t dim = 0;
  std::string checkpoint_hash;
  std::vector<std::string> ids;
  Matrix vectors;  // count x dim

  std::size_t size() const { return ids.size(); }
  std::vector<double> vector_of(std::size_t i) const;
};

struct SearchHit {
  std::string track_id;
  double score = 0.0;
};

struct BuildIndexOptions {
  bool skip_missing = false;
};

EmbeddingIndex build_index(const Model& model, const CorpusMixture& corpus,
                           const FeatureTable& features, const BuildIndexOptions& opts = {});

// Exact cosine top-k, descending score, ties broken by ascending id.
std::vector<SearchHit> search_topk(const EmbeddingIndex& index,
                                   const std::vector<double>& query_vector, std::size_t k);

struct ArtistPrototype {
  std::string artist_id;
  std::vector<double> vector;  // mean of track vectors; not re-normalized
  std::size_t track_count = 0;
};

struct PrototypeResult {
  std::map<std::string, ArtistPrototype> prototypes;
  std::size_t skipped_trackless = 0;   // tracks without artist_id
  std::vector<std::string> degenerate;  // artists whose mean vanished
};

PrototypeResult artist_prototypes(const EmbeddingIndex& index, const CorpusMixture& corpus);

void save_index(const EmbeddingIndex& index, const std::string& path);
EmbeddingIndex load_index(const std::string& path);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ttmr
