#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ttmr/corpus.hpp"
#include "ttmr/kgraph.hpp"
#include "ttmr/rng.hpp"

namespace ttmr {

enum class TextFacet { Content, Metadata, Similarity };

struct TextCandidate {
  TextFacet facet;
  std::string text;
};

struct TextCandidateSet {
  std::string track_id;
  std::vector<TextCandidate> candidates;
};

// (tags) -> caption. Deterministic for the default provider; an external
// captions.jsonl can override per track via CaptionTable.
using CaptionProvider = std::function<std::string(const std::vector<std::string>&)>;
using CaptionTable = std::map<std::string, std::string>;

std::string default_caption(const std::vector<std::string>& tags);

CaptionTable load_captions(const std::string& captions_path);

// "music track {title} by {artist}[ from {album}]"
std::string render_metadata_text(const std::optional<std::string>& title,
                                 const std::optional<std::string>& artist_name,
                                 const std::optional<std::string>& album);

// "similar with artist {artist}"
std::string render_similarity_text(const std::string& artist_name);

enum class QueryKind { TrackSim, ArtistSim, Caption, Tag };

struct QueryFields {
  std::optional<std::string> title;
  std::optional<std::string> artist_name;
  std::optional<std::string> album;
  std::optional<std::string> raw_text;  // Caption / Tag payload
};

std::string render_query(QueryKind kind, const QueryFields& fields);

// Samples K uniformly from 1..L, picks K distinct candidates, joins them
// in random order with ". ".
std::string dropout_concat(const TextCandidateSet& set, Rng& rng);

// Assembles the per-track pool. Content: explicit captions (or override)
// plus a provider caption from tags. Metadata/Similarity only when the
// owning dataset's flags allow and the fields exist. The similarity
// candidate is drawn fresh from the graph on every call.
TextCandidateSet build_candidates(const TrackRecord& track, const DatasetSpec& spec,
                                  const SimilarityGraph& graph, const ArtistTable& artists,
                                  const CaptionProvider& provider, Rng& rng);

}  // namespace ttmr
