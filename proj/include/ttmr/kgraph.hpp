#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ttmr/corpus.hpp"
#include "ttmr/rng.hpp"

namespace ttmr {

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t undirected_edge_count = 0;
  std::size_t skipped_unknown_artist = 0;
  std::size_t dropped_self_edges = 0;
};

// Artist-artist similarity adjacency plus artist-track ownership.
// Symmetric, no self-edges, neighbors sorted by id.
struct SimilarityGraph {
  std::set<std::string> artists;
  std::map<std::string, std::vector<std::string>> sim_edges;
  std::map<std::string, std::string> track_edges;  // track_id -> owning artist
  GraphStats stats;

  const std::vector<std::string>* neighbors(const std::string& artist_id) const;
};

struct TrackArtistSimilarity {
  std::string track_id;
  std::vector<std::string> similar_artists;  // sorted by artist_id
};

// sim_file: JSONL of {src, dst} artist pairs. Unknown-artist edges are
// skipped and counted, self-edges dropped and counted.
SimilarityGraph build_graph(const std::string& sim_file, const CorpusMixture& corpus);

// Variant used by tests and the synthetic pipeline: explicit inputs.
SimilarityGraph build_graph_from(const std::vector<std::pair<std::string, std::string>>& edges,
                                 const std::set<std::string>& artists,
                                 const std::map<std::string, std::string>& track_owners);

// Each track inherits its owning artist's neighbor set. Tracks whose
// artist has no neighbors are omitted.
std::map<std::string, TrackArtistSimilarity> inherit_track_artist_similarity(
    const SimilarityGraph& graph);

std::string sample_similar_artist(const TrackArtistSimilarity& entry, Rng& rng);

}  // namespace ttmr
