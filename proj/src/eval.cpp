#include "ttmr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "ttmr/textgen.hpp"
#include "ttmr/util.hpp"

namespace ttmr {

using nlohmann::json;

double recall_at_k(const std::vector<std::vector<std::string>>& topk_ids,
                   const std::vector<std::string>& truths,
                   const std::set<std::string>& candidate_ids, std::size_t k) {
  if (topk_ids.size() != truths.size()) throw DataError("recall_at_k: query count mismatch");
  if (truths.empty()) throw DataError("recall_at_k: no queries");
  std::size_t hits = 0;
  for (std::size_t q = 0; q < truths.size(); ++q) {
    if (!candidate_ids.count(truths[q]))
      throw DataError("ground-truth id absent from index: " + truths[q]);
    const auto& list = topk_ids[q];
    const std::size_t upto = std::min(k, list.size());
    for (std::size_t r = 0; r < upto; ++r) {
      if (list[r] == truths[q]) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(truths.size());
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::map<std::string, std::string> consolidate_tags(
    const std::vector<std::string>& tags,
    const std::map<std::string, std::vector<double>>& tag_embeddings, double threshold) {
  for (const auto& t : tags)
    if (!tag_embeddings.count(t)) throw DataError("missing embedding for tag: " + t);

  UnionFind uf(tags.size());
  for (std::size_t i = 0; i < tags.size(); ++i)
    for (std::size_t j = i + 1; j < tags.size(); ++j)
      if (cosine(tag_embeddings.at(tags[i]), tag_embeddings.at(tags[j])) > threshold)
        uf.unite(i, j);

  std::map<std::size_t, std::string> canonical;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    std::size_t root = uf.find(i);
    auto it = canonical.find(root);
    if (it == canonical.end() || tags[i] < it->second) canonical[root] = tags[i];
  }
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < tags.size(); ++i) out[tags[i]] = canonical[uf.find(i)];
  return out;
}

double binary_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  if (scores.size() != labels.size()) throw DataError("binary_auc: size mismatch");
  std::size_t n_pos = 0;
  for (auto l : labels) n_pos += l ? 1 : 0;
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("binary_auc: single-class column");

  // midrank statistic: AUC = (R_pos - n_pos(n_pos+1)/2) / (n_pos * n_neg)
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(scores.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
    i = j + 1;
  }
  double rank_sum_pos = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t)
    if (labels[t]) rank_sum_pos += rank[t];
  return (rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double macro_tag_auc(const std::vector<std::vector<double>>& scores, const TagMatrix& matrix) {
  if (scores.size() != matrix.tags.size()) throw DataError("macro_tag_auc: tag count mismatch");
  if (matrix.tags.empty()) throw DataError("macro_tag_auc: empty tag matrix");
  double acc = 0.0;
  for (std::size_t t = 0; t < matrix.tags.size(); ++t) {
    if (scores[t].size() != matrix.tracks.size())
      throw DataError("macro_tag_auc: track count mismatch for tag " + matrix.tags[t]);
    acc += binary_auc(scores[t], matrix.relevance[t]);
  }
  return acc / static_cast<double>(matrix.tags.size());
}

double triplet_accuracy(const Model& model, const EmbeddingIndex& index,
                        const CorpusMixture& corpus,
                        const std::vector<TripletJudgment>& triplets) {
  if (triplets.empty()) throw DataError("no triplets");
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < index.size(); ++i) pos[index.ids[i]] = i;

  double credit = 0.0;
  for (const auto& t : triplets) {
    const TrackRecord& anchor = corpus.track(t.anchor_id);
    QueryFields f;
    f.title = anchor.title;
    f.artist_name = anchor.artist_name;
    f.album = anchor.album;
    const std::string query = render_query(QueryKind::TrackSim, f);
    const auto zq = model.encode_text(query);

    auto ia = pos.find(t.cand_a);
    auto ib = pos.find(t.cand_b);
    if (ia == pos.end()) throw DataError("missing candidate embedding: " + t.cand_a);
    if (ib == pos.end()) throw DataError("missing candidate embedding: " + t.cand_b);
    const double sa = cosine(zq, index.vector_of(ia->second));
    const double sb = cosine(zq, index.vector_of(ib->second));
    const double chosen = t.human_choice == 'a' ? sa : sb;
    const double other = t.human_choice == 'a' ? sb : sa;
    if (chosen > other)
      credit += 1.0;
    else if (chosen == other)
      credit += 0.5;
  }
  return credit / static_cast<double>(triplets.size());
}

double ndcg_at_k(const std::vector<std::string>& ranking, const ArtistRelevance& relevance,
                 std::size_t k) {
  if (relevance.relevant.empty())
    throw DataError("query " + relevance.query_artist + " has no relevant artists");
  if (relevance.relevant.count(relevance.query_artist))
    throw DataError("query artist appears in its own relevant set: " + relevance.query_artist);
  double dcg = 0.0;
  const std::size_t upto = std::min(k, ranking.size());
  for (std::size_t r = 0; r < upto; ++r) {
    if (relevance.relevant.count(ranking[r]))
      dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  const std::size_t ideal_n = std::min(relevance.relevant.size(), k);
  double idcg = 0.0;
  for (std::size_t r = 0; r < ideal_n; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return dcg / idcg;
}

std::vector<TripletJudgment> load_triplets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open triplets file: " + path);
  std::vector<TripletJudgment> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = json::parse(line);
    TripletJudgment t;
    t.anchor_id = j.at("anchor_id").get<std::string>();
    t.cand_a = j.at("cand_a").get<std::string>();
    t.cand_b = j.at("cand_b").get<std::string>();
    const std::string choice = j.at("choice").get<std::string>();
    if (choice != "a" && choice != "b")
      throw DataError("triplet choice must be 'a' or 'b' (line " + std::to_string(line_no) + ")");
    t.human_choice = choice[0];
    if (t.anchor_id == t.cand_a || t.anchor_id == t.cand_b || t.cand_a == t.cand_b)
      throw DataError("triplet ids must be distinct (line " + std::to_string(line_no) + ")");
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<ArtistRelevance> load_artist_relevance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open artist eval file: " + path);
  std::vector<ArtistRelevance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line);
    ArtistRelevance r;
    r.query_artist = j.at("query_artist").get<std::string>();
    for (const auto& a : j.at("relevant")) r.relevant.insert(a.get<std::string>());
    out.push_back(std::move(r));
  }
  return out;
}

std::map<std::string, std::vector<double>> load_tag_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tag embeddings file: " + path);
  std::map<std::string, std::vector<double>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line);
    out[j.at("tag").get<std::string>()] = j.at("vector").get<std::vector<double>>();
  }
  return out;
}

namespace {

json eval_captions(const Model& model, const EmbeddingIndex& index, const std::string& path,
                   std::size_t k) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open captions eval file: " + path);
  std::vector<std::vector<std::string>> topk;
  std::vector<std::string> truths;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line);
    const std::string caption = j.at("caption").get<std::string>();
    auto hits = search_topk(index, model.encode_text(caption), k);
    std::vector<std::string> ids;
    for (const auto& h : hits) ids.push_back(h.track_id);
    topk.push_back(std::move(ids));
    truths.push_back(j.at("track_id").get<std::string>());
  }
  std::set<std::string> candidates(index.ids.begin(), index.ids.end());
  json out;
  out["queries"] = truths.size();
  out["recall_at_k"] = recall_at_k(topk, truths, candidates, k);
  out["k"] = k;
  return out;
}

json eval_tags(const Model& model, const EmbeddingIndex& index, const EvalBundle& bundle) {
  std::ifstream in(*bundle.tags_path);
  if (!in) throw DataError("cannot open tags eval file: " + *bundle.tags_path);
  std::map<std::string, std::set<std::string>> track_tags;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line);
    auto& set = track_tags[j.at("track_id").get<std::string>()];
    for (const auto& t : j.at("tags")) set.insert(t.get<std::string>());
  }

  std::map<std::string, std::string> canon;  // raw tag -> canonical
  {
    std::set<std::string> all;
    for (const auto& [id, tags] : track_tags) all.insert(tags.begin(), tags.end());
    std::vector<std::string> tag_list(all.begin(), all.end());
    if (bundle.tag_embeddings_path) {
      canon = consolidate_tags(tag_list, load_tag_embeddings(*bundle.tag_embeddings_path));
    } else {
      for (const auto& t : tag_list) canon[t] = t;
    }
  }

  // Tracks restricted to those present in the index, deterministic order.
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < index.size(); ++i) pos[index.ids[i]] = i;
  std::vector<std::string> tracks;
  for (const auto& [id, tags] : track_tags)
    if (pos.count(id)) tracks.push_back(id);
  if (tracks.empty()) throw DataError("no tagged tracks present in the index");

  std::map<std::string, std::set<std::string>> tag_to_tracks;
  for (const auto& id : tracks)
    for (const auto& t : track_tags[id]) tag_to_tracks[canon.at(t)].insert(id);

  TagMatrix matrix;
  matrix.tracks = tracks;
  for (const auto& [tag, members] : tag_to_tracks) {
    if (members.size() < bundle.tag_min_count) continue;
    if (members.size() == tracks.size()) continue;  // single class
    matrix.tags.push_back(tag);
    std::vector<std::uint8_t> row;
    row.reserve(tracks.size());
    for (const auto& id : tracks) row.push_back(members.count(id) ? 1 : 0);
    matrix.relevance.push_back(std::move(row));
  }
  if (matrix.tags.empty()) throw DataError("no tags retained after consolidation/min-count filter");

  std::vector<std::vector<double>> scores;
  for (const auto& tag : matrix.tags) {
    QueryFields f;
    f.raw_text = tag;
    const auto zq = model.encode_text(render_query(QueryKind::Tag, f));
    std::vector<double> row;
    row.reserve(tracks.size());
    for (const auto& id : tracks) row.push_back(cosine(zq, index.vector_of(pos.at(id))));
    scores.push_back(std::move(row));
  }

  json out;
  out["tags"] = matrix.tags.size();
  out["tracks"] = tracks.size();
  out["rocauc"] = macro_tag_auc(scores, matrix);
  return out;
}

json eval_triplets(const Model& model, const EmbeddingIndex& index, const CorpusMixture& corpus,
                   const std::string& path) {
  auto triplets = load_triplets(path);
  json out;
  out["triplets"] = triplets.size();
  out["accuracy"] = triplet_accuracy(model, index, corpus, triplets);
  return out;
}

json eval_artists(const Model& model, const EmbeddingIndex& index, const CorpusMixture& corpus,
                  const ArtistTable& artists, const std::string& path, std::size_t k) {
  auto queries = load_artist_relevance(path);
  auto protos = artist_prototypes(index, corpus);
  if (protos.prototypes.empty()) throw DataError("no artist prototypes available");

  double acc = 0.0;
  std::size_t used = 0, skipped_empty = 0;
  for (const auto& q : queries) {
    if (q.relevant.empty()) {
      ++skipped_empty;
      continue;
    }
    auto name_it = artists.find(q.query_artist);
    if (name_it == artists.end()) throw DataError("unknown query artist: " + q.query_artist);
    QueryFields f;
    f.artist_name = name_it->second;
    const auto zq = model.encode_text(render_query(QueryKind::ArtistSim, f));

    std::vector<std::pair<double, std::string>> scored;
    for (const auto& [artist_id, proto] : protos.prototypes) {
      if (artist_id == q.query_artist) continue;
      scored.emplace_back(cosine(zq, proto.vector), artist_id);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::vector<std::string> ranking;
    ranking.reserve(scored.size());
    for (const auto& [s, id] : scored) ranking.push_back(id);
    acc += ndcg_at_k(ranking, q, k);
    ++used;
  }
  if (used == 0) throw DataError("no usable artist queries");
  json out;
  out["queries"] = used;
  out["skipped_no_relevant"] = skipped_empty;
  out["k"] = k;
  out["ndcg"] = acc / static_cast<double>(used);
  return out;
}

}  // namespace

std::string run_eval_suite(const Model& model, const EmbeddingIndex& index,
                           const CorpusMixture& corpus, const ArtistTable& artists,
                           const EvalBundle& bundle) {
  if (!bundle.captions_path && !bundle.tags_path && !bundle.triplets_path &&
      !bundle.artist_eval_path)
    throw UsageError("empty eval bundle: no protocol inputs given");

  json report = json::object();
  auto section = [&](const char* name, auto&& fn) {
    try {
      report[name] = fn();
    } catch (const std::exception& e) {
      report[name] = {{"error", e.what()}};
    }
  };
  if (bundle.captions_path)
    section("caption", [&] { return eval_captions(model, index, *bundle.captions_path,
                                                  bundle.recall_k); });
  if (bundle.tags_path) section("tag", [&] { return eval_tags(model, index, bundle); });
  if (bundle.triplets_path)
    section("track", [&] { return eval_triplets(model, index, corpus, *bundle.triplets_path); });
  if (bundle.artist_eval_path)
    section("artist", [&] {
      return eval_artists(model, index, corpus, artists, *bundle.artist_eval_path, bundle.ndcg_k);
    });
  return report.dump(2);
}

}  // namespace ttmr
