#include "ttmr/kgraph.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "ttmr/util.hpp"

namespace ttmr {

using nlohmann::json;

const std::vector<std::string>* SimilarityGraph::neighbors(const std::string& artist_id) const {
  auto it = sim_edges.find(artist_id);
  if (it == sim_edges.end() || it->second.empty()) return nullptr;
  return &it->second;
}

SimilarityGraph build_graph_from(
    const std::vector<std::pair<std::string, std::string>>& edges,
    const std::set<std::string>& artists,
    const std::map<std::string, std::string>& track_owners) {
  SimilarityGraph g;
  g.artists = artists;
  std::set<std::pair<std::string, std::string>> undirected;
  for (const auto& [src, dst] : edges) {
    if (!artists.count(src) || !artists.count(dst)) {
      ++g.stats.skipped_unknown_artist;
      continue;
    }
    if (src == dst) {
      ++g.stats.dropped_self_edges;
      continue;
    }
    auto key = std::minmax(src, dst);
    undirected.insert({key.first, key.second});
  }
  for (const auto& [a, b] : undirected) {
    g.sim_edges[a].push_back(b);
    g.sim_edges[b].push_back(a);
  }
  for (auto& [id, nbrs] : g.sim_edges) std::sort(nbrs.begin(), nbrs.end());
  for (const auto& [track_id, artist_id] : track_owners) {
    if (!artists.count(artist_id))
      throw DataError("track " + track_id + " owned by unknown artist " + artist_id);
    g.track_edges.emplace(track_id, artist_id);
  }
  g.stats.node_count = g.artists.size();
  g.stats.undirected_edge_count = undirected.size();
  return g;
}

SimilarityGraph build_graph(const std::string& sim_file, const CorpusMixture& corpus) {
  std::set<std::string> artists;
  std::map<std::string, std::string> owners;
  for (const auto& [id, track] : corpus.tracks) {
    if (track.artist_id) {
      artists.insert(*track.artist_id);
      owners.emplace(id, *track.artist_id);
    }
  }

  std::ifstream in(sim_file);
  if (!in) throw DataError("cannot open similarity file: " + sim_file);
  std::vector<std::pair<std::string, std::string>> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("malformed similarity edge at line " + std::to_string(line_no) + ": " +
                      e.what());
    }
    edges.emplace_back(j.at("src").get<std::string>(), j.at("dst").get<std::string>());
  }
  return build_graph_from(edges, artists, owners);
}

std::map<std::string, TrackArtistSimilarity> inherit_track_artist_similarity(
    const SimilarityGraph& graph) {
  std::map<std::string, TrackArtistSimilarity> out;
  for (const auto& [track_id, artist_id] : graph.track_edges) {
    const auto* nbrs = graph.neighbors(artist_id);
    if (!nbrs) continue;
    TrackArtistSimilarity entry;
    entry.track_id = track_id;
    entry.similar_artists = *nbrs;  // already sorted, excludes the owner (no self-edges)
    out.emplace(track_id, std::move(entry));
  }
  return out;
}

std::string sample_similar_artist(const TrackArtistSimilarity& entry, Rng& rng) {
  if (entry.similar_artists.empty())
    throw DataError("no similar artists for track " + entry.track_id);
  return entry.similar_artists[rng.index(entry.similar_artists.size())];
}

}  // namespace ttmr
