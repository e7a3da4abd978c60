#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ttmr/model.hpp"
#include "ttmr/retrieval.hpp"

namespace ttmr {

// Binary tag relevance over tracks. Retained tags annotate >= min_count
// tracks and have both classes present.
struct TagMatrix {
  std::vector<std::string> tags;
  std::vector<std::string> tracks;
  std::vector<std::vector<std::uint8_t>> relevance;  // tags x tracks
};

struct TripletJudgment {
  std::string anchor_id;
  std::string cand_a;
  std::string cand_b;
  char human_choice = 'a';  // 'a' or 'b'
};

struct ArtistRelevance {
  std::string query_artist;
  std::set<std::string> relevant;
};

// Fraction of queries whose single true item is within the top k. Every
// ground-truth id must exist in the candidate set.
double recall_at_k(const std::vector<std::vector<std::string>>& topk_ids,
                   const std::vector<std::string>& truths,
                   const std::set<std::string>& candidate_ids, std::size_t k);

// Single-link grouping over tag pairs with cosine similarity above
// threshold; canonical tag = lexicographically smallest group member.
std::map<std::string, std::string> consolidate_tags(
    const std::vector<std::string>& tags,
    const std::map<std::string, std::vector<double>>& tag_embeddings, double threshold = 0.9);

// Per-tag Mann-Whitney AUC (ties credited 0.5), macro-averaged.
double macro_tag_auc(const std::vector<std::vector<double>>& scores, const TagMatrix& matrix);
double binary_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

// Anchor is embedded as text via the track-similarity template; a triplet
// is correct iff the chosen candidate's audio is closer; exact ties 0.5.
double triplet_accuracy(const Model& model, const EmbeddingIndex& index,
                        const CorpusMixture& corpus, const std::vector<TripletJudgment>& triplets);

// Binary-relevance nDCG over one ranked candidate list.
double ndcg_at_k(const std::vector<std::string>& ranking, const ArtistRelevance& relevance,
                 std::size_t k = 200);

struct EvalBundle {
  std::optional<std::string> captions_path;        // {track_id, caption}
  std::optional<std::string> tags_path;            // {track_id, tags[]}
  std::optional<std::string> tag_embeddings_path;  // {tag, vector[]}
  std::optional<std::string> triplets_path;        // {anchor_id, cand_a, cand_b, choice}
  std::optional<std::string> artist_eval_path;     // {query_artist, relevant[]}
  std::size_t recall_k = 10;
  std::size_t ndcg_k = 200;
  std::size_t tag_min_count = 10;
};

// JSON report, one section per protocol present in the bundle. Per-protocol
// failures are reported in that section; the others still run.
std::string run_eval_suite(const Model& model, const EmbeddingIndex& index,
                           const CorpusMixture& corpus, const ArtistTable& artists,
                           const EvalBundle& bundle);

std::vector<TripletJudgment> load_triplets(const std::string& path);
std::vector<ArtistRelevance> load_artist_relevance(const std::string& path);
std::map<std::string, std::vector<double>> load_tag_embeddings(const std::string& path);

}  // namespace ttmr
