#include "ttmr/textgen.hpp"

#include <fstream>
#include <numeric>

#include "json.hpp"
#include "ttmr/util.hpp"

namespace ttmr {

using nlohmann::json;

std::string default_caption(const std::vector<std::string>& tags) {
  if (tags.empty()) throw DataError("default_caption: empty tag list");
  std::string joined;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (i) joined += ", ";
    joined += tags[i];
  }
  return "a music track characterized by " + joined;
}

CaptionTable load_captions(const std::string& captions_path) {
  std::ifstream in(captions_path);
  if (!in) throw DataError("cannot open captions file: " + captions_path);
  CaptionTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("malformed caption record at line " + std::to_string(line_no) + ": " +
                      e.what());
    }
    t[j.at("track_id").get<std::string>()] = j.at("caption").get<std::string>();
  }
  return t;
}

std::string render_metadata_text(const std::optional<std::string>& title,
                                 const std::optional<std::string>& artist_name,
                                 const std::optional<std::string>& album) {
  if (!title && !artist_name)
    throw DataError("metadata text requires at least a title or an artist name");
  std::string out = "music track";
  if (title) out += " " + *title;
  if (artist_name) out += " by " + *artist_name;
  if (album) out += " from " + *album;
  return out;
}

std::string render_similarity_text(const std::string& artist_name) {
  if (artist_name.empty()) throw DataError("similarity text requires a nonempty artist name");
  return "similar with artist " + artist_name;
}

std::string render_query(QueryKind kind, const QueryFields& fields) {
  switch (kind) {
    case QueryKind::TrackSim: {
      if (!fields.title || !fields.artist_name)
        throw DataError("TrackSim query requires title and artist name");
      std::string out = "similar music track with " + *fields.title + " by " + *fields.artist_name;
      if (fields.album) out += " from " + *fields.album;
      return out;
    }
    case QueryKind::ArtistSim:
      if (!fields.artist_name || fields.artist_name->empty())
        throw DataError("ArtistSim query requires an artist name");
      return "similar artist with " + *fields.artist_name;
    case QueryKind::Caption:
    case QueryKind::Tag:
      if (!fields.raw_text || fields.raw_text->empty())
        throw DataError("Caption/Tag query requires raw text");
      return *fields.raw_text;
  }
  throw UsageError("unknown query kind");
}

std::string dropout_concat(const TextCandidateSet& set, Rng& rng) {
  const std::size_t total = set.candidates.size();
  if (total == 0) throw DataError("dropout_concat: empty candidate set for track " + set.track_id);
  std::size_t k = 1 + rng.index(total);
  // A full shuffle gives a uniform K-subset and a uniform order at once.
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::string out;
  for (std::size_t i = 0; i < k; ++i) {
    if (i) out += ". ";
    out += set.candidates[order[i]].text;
  }
  return out;
}

TextCandidateSet build_candidates(const TrackRecord& track, const DatasetSpec& spec,
                                  const SimilarityGraph& graph, const ArtistTable& artists,
                                  const CaptionProvider& provider, Rng& rng) {
  TextCandidateSet set;
  set.track_id = track.track_id;

  if (spec.has_content) {
    for (const auto& cap : track.captions) {
      std::string c = trim(cap);
      if (!c.empty()) set.candidates.push_back({TextFacet::Content, c});
    }
    if (!track.tags.empty())
      set.candidates.push_back({TextFacet::Content, provider(track.tags)});
  }

  if (spec.has_metadata && (track.title || track.artist_name)) {
    set.candidates.push_back(
        {TextFacet::Metadata, render_metadata_text(track.title, track.artist_name, track.album)});
  }

  if (spec.has_similarity && track.artist_id) {
    auto it = graph.track_edges.find(track.track_id);
    if (it != graph.track_edges.end()) {
      const auto* nbrs = graph.neighbors(it->second);
      if (nbrs) {
        TrackArtistSimilarity entry{track.track_id, *nbrs};
        std::string similar_id = sample_similar_artist(entry, rng);
        auto name_it = artists.find(similar_id);
        const std::string& name = name_it != artists.end() ? name_it->second : similar_id;
        set.candidates.push_back({TextFacet::Similarity, render_similarity_text(name)});
      }
    }
  }

  return set;
}

}  // namespace ttmr
