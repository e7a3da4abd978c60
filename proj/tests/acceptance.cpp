// Acceptance gate: one pass/fail line per criterion, exit 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "ttmr/dsp.hpp"
#include "ttmr/eval.hpp"
#include "ttmr/kgraph.hpp"
#include "ttmr/model.hpp"
#include "ttmr/pipeline.hpp"
#include "ttmr/retrieval.hpp"
#include "ttmr/textgen.hpp"
#include "ttmr/train.hpp"
#include "ttmr/util.hpp"

using namespace ttmr;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void criterion(int n, const std::string& name, const std::function<std::string()>& body) {
  Timer t;
  try {
    const std::string detail = body();
    std::printf("[PASS] criterion %d: %s (%s, %.1fs)\n", n, name.c_str(), detail.c_str(),
                t.seconds());
  } catch (const std::exception& e) {
    ++g_failures;
    std::printf("[FAIL] criterion %d: %s (%s)\n", n, name.c_str(), e.what());
  }
  std::fflush(stdout);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::runtime_error(msg);
}

std::string scratch(const std::string& leaf) {
  auto d = std::filesystem::temp_directory_path() / "ttmr_acceptance" / leaf;
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d.string();
}

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[0].size(); ++j) m.at(i, j) = rows[i][j];
  return m;
}

std::vector<double> random_unit(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  double n2 = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    n2 += x * x;
  }
  const double n = std::sqrt(n2);
  for (auto& x : v) x /= n;
  return v;
}

// ---------------------------------------------------------------- 1
std::string check_info_nce_values() {
  std::vector<double> e0(128, 0.0), e1(128, 0.0);
  e0[0] = 1.0;
  e1[1] = 1.0;

  const double l1 = info_nce(rows_to_matrix({e0}), rows_to_matrix({e0}), 0.1);
  require(std::abs(l1) < 1e-12, "N=1 loss not zero: " + std::to_string(l1));

  const auto ortho = rows_to_matrix({e0, e1});
  const double l2 = info_nce(ortho, ortho, 0.1);
  const double expected2 = std::log(1.0 + std::exp(-10.0));
  require(std::abs(l2 - expected2) < 1e-9,
          "orthogonal N=2 loss off: " + std::to_string(l2 - expected2));

  const auto uniform = rows_to_matrix({e0, e0});
  const double l3 = info_nce(uniform, uniform, 0.1);
  require(std::abs(l3 - std::log(2.0)) < 1e-12,
          "uniform-logit loss off: " + std::to_string(l3 - std::log(2.0)));
  return "N=1 zero, orthogonal log(1+e^-10), uniform log 2";
}

// ---------------------------------------------------------------- 2
std::string check_gradients() {
  ModelConfig cfg;
  cfg.feat_dim = 12;
  cfg.hidden_dim = 12;
  cfg.embed_dim = 24;
  cfg.vocab = {"bass", "calm", "drums", "guitar", "jazz", "piano", "rock", "slow"};
  Rng rng(271828);
  Model model = Model::init(cfg, rng);

  const double eps = 1e-5;
  double worst = 0.0;
  std::string worst_tensor;
  for (int b = 0; b < 5; ++b) {
    BatchPair batch;
    for (int i = 0; i < 4; ++i) {
      std::vector<double> feat(cfg.feat_dim);
      for (auto& v : feat) v = rng.normal();
      batch.audio.push_back(feat);
      std::string text;
      const std::size_t words = 1 + rng.index(4);
      for (std::size_t w = 0; w < words; ++w) {
        if (w) text += " ";
        text += cfg.vocab[rng.index(cfg.vocab.size())];
      }
      batch.texts.push_back(text);
    }

    Params grads;
    model.backward(batch, grads);
    auto ps = model.params().tensors();
    auto gs = grads.tensors();
    for (std::size_t t = 0; t < ps.size(); ++t) {
      Tensor& p = *ps[t];
      for (std::size_t i = 0; i < p.data.size(); ++i) {
        const double orig = p.data[i];
        p.data[i] = orig + eps;
        const double lp = model.loss(batch);
        p.data[i] = orig - eps;
        const double lm = model.loss(batch);
        p.data[i] = orig;
        const double fd = (lp - lm) / (2.0 * eps);
        const double g = gs[t]->data[i];
        const double rel = std::abs(g - fd) / std::max(std::abs(g) + std::abs(fd), 1e-3);
        if (rel > worst) {
          worst = rel;
          worst_tensor = p.name;
        }
      }
    }
  }
  require(worst < 1e-4, "worst relative error " + std::to_string(worst) + " in " + worst_tensor);
  std::ostringstream os;
  os << "every component of all 8 groups over 5 batches, worst rel err " << worst;
  return os.str();
}

// ---------------------------------------------------------------- 3
std::string check_overfit() {
  // 32 pairs with unique single-candidate texts; content facet only.
  CorpusMixture corpus;
  corpus.specs = {{"ds", 1.0, true, false, false}};
  std::vector<std::string> words;
  for (int i = 0; i < 64; ++i) words.push_back("tag" + std::to_string(i));
  for (int i = 0; i < 32; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "tr%03d", i);
    TrackRecord r;
    r.track_id = id;
    r.dataset_id = "ds";
    r.tags = {words[2 * i], words[2 * i + 1]};
    corpus.tracks.emplace(id, r);
    corpus.pools["ds"].push_back(id);
  }
  MelConfig mel;
  FeatureTable features = featurize_corpus(corpus, mel, /*allow_synth=*/true);

  // each step trains on all 32 distinct pairs
  BatchPair batch;
  for (const auto& [id, track] : corpus.tracks) {
    batch.audio.push_back(features.at(id));
    batch.texts.push_back(default_caption(track.tags));
  }

  ModelConfig mcfg;
  mcfg.feat_dim = batch.audio[0].size();
  mcfg.vocab = build_vocab_tokens(batch.texts);
  Rng rng(11);
  Model model = Model::init(mcfg, rng);

  TrainConfig cfg;
  cfg.base_lr = 3e-3;
  cfg.warmup_steps = 100;
  cfg.total_steps = 2000;
  cfg.batch_size = 32;
  cfg.weight_decay = 0.0;
  cfg.seed = 11;

  auto opt = OptimizerState::zeros_like(model.params());
  double final_loss = 0.0;
  for (std::size_t step = 1; step <= cfg.total_steps; ++step) {
    Params grads;
    final_loss = model.backward(batch, grads);
    adamw_step(opt, model.params(), grads, lr_at_step(cfg, step), cfg);
  }

  require(final_loss < 0.01, "final loss " + std::to_string(final_loss));
  require(std::abs(model.tau() - 0.1) > 1e-6, "tau did not move from 0.1");

  auto index = build_index(model, corpus, features);
  std::size_t hits = 0;
  for (const auto& [id, track] : corpus.tracks) {
    auto top = search_topk(index, model.encode_text(default_caption(track.tags)), 1);
    if (top[0].track_id == id) ++hits;
  }
  require(hits == corpus.tracks.size(),
          "text->audio R@1 = " + std::to_string(hits) + "/32");
  std::ostringstream os;
  os << "R@1 32/32, final loss " << final_loss << ", tau " << model.tau();
  return os.str();
}

// ---------------------------------------------------------------- 4
std::string check_random_baselines() {
  // R@10 over 2000 random candidates.
  Rng rng(424242);
  const std::size_t n_cand = 2000, dim = 16, n_queries = 20000;
  EmbeddingIndex index;
  index.dim = dim;
  index.vectors = Matrix(n_cand, dim);
  for (std::size_t i = 0; i < n_cand; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "c%05zu", i);
    index.ids.emplace_back(id);
    auto v = random_unit(dim, rng);
    for (std::size_t d = 0; d < dim; ++d) index.vectors.at(i, d) = v[d];
  }
  std::set<std::string> cand_set(index.ids.begin(), index.ids.end());
  std::vector<std::vector<std::string>> topk;
  std::vector<std::string> truths;
  for (std::size_t q = 0; q < n_queries; ++q) {
    auto hits = search_topk(index, random_unit(dim, rng), 10);
    std::vector<std::string> ids;
    for (const auto& h : hits) ids.push_back(h.track_id);
    topk.push_back(std::move(ids));
    truths.push_back(index.ids[rng.index(n_cand)]);
  }
  const double r10 = recall_at_k(topk, truths, cand_set, 10);
  require(r10 >= 0.003 && r10 <= 0.007, "random R@10 " + std::to_string(r10));

  // Tag ROCAUC with random scores.
  TagMatrix matrix;
  std::vector<std::vector<double>> scores;
  const std::size_t n_tags = 50, n_tracks = 400;
  for (std::size_t t = 0; t < n_tracks; ++t) matrix.tracks.push_back("t" + std::to_string(t));
  for (std::size_t g = 0; g < n_tags; ++g) {
    matrix.tags.push_back("tag" + std::to_string(g));
    std::vector<std::uint8_t> row(n_tracks);
    bool pos = false, neg = false;
    do {
      pos = neg = false;
      for (auto& v : row) {
        v = rng.uniform() < 0.3 ? 1 : 0;
        (v ? pos : neg) = true;
      }
    } while (!pos || !neg);
    matrix.relevance.push_back(row);
    std::vector<double> s(n_tracks);
    for (auto& v : s) v = rng.uniform();
    scores.push_back(std::move(s));
  }
  const double auc = macro_tag_auc(scores, matrix);
  require(std::abs(auc - 0.5) <= 0.02, "random tag ROCAUC " + std::to_string(auc));

  // Triplet accuracy: random query model, random audio index, random choices.
  ModelConfig mcfg;
  mcfg.feat_dim = 8;
  mcfg.hidden_dim = 8;
  mcfg.embed_dim = 16;
  mcfg.vocab = {"similar", "music", "track", "with", "by", "artist"};
  Model tmodel = Model::init(mcfg, rng);
  CorpusMixture tcorpus;
  tcorpus.specs = {{"d", 1.0, true, true, false}};
  EmbeddingIndex tindex;
  tindex.dim = mcfg.embed_dim;
  const std::size_t n_tracks2 = 300;
  tindex.vectors = Matrix(n_tracks2, tindex.dim);
  for (std::size_t i = 0; i < n_tracks2; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "tr%04zu", i);
    TrackRecord r;
    r.track_id = id;
    r.dataset_id = "d";
    r.title = "Track " + std::to_string(i);
    r.artist_name = "Artist " + std::to_string(i % 20);
    tcorpus.tracks.emplace(id, r);
    tcorpus.pools["d"].push_back(id);
    tindex.ids.emplace_back(id);
    auto v = random_unit(tindex.dim, rng);
    for (std::size_t d = 0; d < tindex.dim; ++d) tindex.vectors.at(i, d) = v[d];
  }
  std::vector<TripletJudgment> triplets;
  while (triplets.size() < 1000) {
    const std::size_t a = rng.index(n_tracks2), b = rng.index(n_tracks2),
                      c = rng.index(n_tracks2);
    if (a == b || a == c || b == c) continue;
    triplets.push_back({tindex.ids[a], tindex.ids[b], tindex.ids[c],
                        rng.uniform() < 0.5 ? 'a' : 'b'});
  }
  const double tri = triplet_accuracy(tmodel, tindex, tcorpus, triplets);
  require(std::abs(tri - 0.5) <= 0.03, "random triplet accuracy " + std::to_string(tri));

  // nDCG of random rankings vs a 10k-trial Monte Carlo oracle.
  const std::size_t n_items = 50, n_rel = 5, k = 200;
  std::vector<std::string> items;
  ArtistRelevance rel{"query", {}};
  for (std::size_t i = 0; i < n_items; ++i) {
    items.push_back("a" + std::to_string(i));
    if (i < n_rel) rel.relevant.insert(items.back());
  }
  double measured = 0.0;
  const std::size_t n_meas = 5000;
  for (std::size_t trial = 0; trial < n_meas; ++trial) {
    std::vector<std::pair<double, std::string>> scored;
    for (const auto& id : items) scored.emplace_back(rng.uniform(), id);
    std::sort(scored.begin(), scored.end(), std::greater<>());
    std::vector<std::string> ranking;
    for (const auto& [s, id] : scored) ranking.push_back(id);
    measured += ndcg_at_k(ranking, rel, k);
  }
  measured /= static_cast<double>(n_meas);

  double idcg = 0.0;
  for (std::size_t r = 0; r < n_rel; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  double mc = 0.0;
  std::vector<std::size_t> perm(n_items);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t trial = 0; trial < 10000; ++trial) {
    rng.shuffle(perm);
    double dcg = 0.0;
    for (std::size_t r = 0; r < n_items && r < k; ++r)
      if (perm[r] < n_rel) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    mc += dcg / idcg;
  }
  mc /= 10000.0;
  require(std::abs(measured - mc) <= 0.01,
          "nDCG " + std::to_string(measured) + " vs MC " + std::to_string(mc));

  std::ostringstream os;
  os << "R@10 " << r10 << ", AUC " << auc << ", triplet " << tri << ", nDCG " << measured
     << " vs MC " << mc;
  return os.str();
}

// ---------------------------------------------------------------- 5
std::string check_kgraph() {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n_artists = 2 + rng.index(49);  // <= 50
    const std::size_t n_tracks = 1 + rng.index(500);  // <= 500
    std::set<std::string> artists;
    std::vector<std::string> artist_list;
    for (std::size_t i = 0; i < n_artists; ++i) {
      artist_list.push_back("a" + std::to_string(i));
      artists.insert(artist_list.back());
    }
    std::vector<std::pair<std::string, std::string>> edges;
    const std::size_t n_edges = rng.index(3 * n_artists + 1);
    for (std::size_t e = 0; e < n_edges; ++e)
      edges.emplace_back(artist_list[rng.index(n_artists)], artist_list[rng.index(n_artists)]);
    std::map<std::string, std::string> owners;
    for (std::size_t t = 0; t < n_tracks; ++t)
      owners["t" + std::to_string(t)] = artist_list[rng.index(n_artists)];

    auto graph = build_graph_from(edges, artists, owners);
    auto inherited = inherit_track_artist_similarity(graph);

    // brute-force oracle: symmetrize edges, drop self-loops, compose with
    // ownership
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& [s, d] : edges) {
      if (s == d) continue;
      adj[s].insert(d);
      adj[d].insert(s);
    }
    for (const auto& [track, owner] : owners) {
      const auto it = adj.find(owner);
      const bool expect = it != adj.end() && !it->second.empty();
      const auto got = inherited.find(track);
      require((got != inherited.end()) == expect, "presence mismatch for " + track);
      if (!expect) continue;
      std::vector<std::string> want(it->second.begin(), it->second.end());
      require(got->second.similar_artists == want, "neighbor set mismatch for " + track);
    }
  }

  // circulant: 10 artists, 3 neighbors each, 5 tracks each -> 150
  std::set<std::string> artists;
  std::vector<std::pair<std::string, std::string>> edges;
  std::map<std::string, std::string> owners;
  for (int i = 0; i < 10; ++i) {
    const std::string a = "a" + std::to_string(i);
    artists.insert(a);
    edges.emplace_back(a, "a" + std::to_string((i + 1) % 10));
    if (i < 5) edges.emplace_back(a, "a" + std::to_string(i + 5));
    for (int t = 0; t < 5; ++t) owners["t" + std::to_string(i) + "_" + std::to_string(t)] = a;
  }
  auto graph = build_graph_from(edges, artists, owners);
  auto inherited = inherit_track_artist_similarity(graph);
  std::size_t connections = 0;
  for (const auto& [track, e] : inherited) {
    require(e.similar_artists.size() == 3, "degree != 3 for " + track);
    connections += e.similar_artists.size();
  }
  require(connections == 150, "connections " + std::to_string(connections));
  return "100 random graphs vs brute force; circulant 10x3x5 = 150";
}

// ---------------------------------------------------------------- 6
std::string check_mixture() {
  const std::vector<double> probs = {0.40, 0.25, 0.25, 0.09, 0.01};
  CorpusMixture mixture;
  for (std::size_t d = 0; d < probs.size(); ++d) {
    const std::string ds = "d" + std::to_string(d);
    mixture.specs.push_back({ds, probs[d], true, false, false});
    for (int t = 0; t < 3; ++t) {
      const std::string id = ds + "_t" + std::to_string(t);
      TrackRecord r;
      r.track_id = id;
      r.dataset_id = ds;
      r.tags = {"x"};
      mixture.tracks.emplace(id, r);
      mixture.pools[ds].push_back(id);
    }
  }
  Rng rng(31337);
  const std::size_t draws = 100000;
  auto ids = sample_batch_sources(mixture, draws, rng);
  std::vector<std::size_t> counts(probs.size(), 0);
  for (const auto& id : ids) {
    const auto& ds = mixture.track(id).dataset_id;
    counts[static_cast<std::size_t>(ds[1] - '0')]++;
  }
  for (std::size_t d = 0; d < probs.size(); ++d) {
    const double frac = static_cast<double>(counts[d]) / draws;
    require(std::abs(frac - probs[d]) <= 0.01,
            "dataset " + std::to_string(d) + " fraction " + std::to_string(frac));
  }
  const double stat = ttmr_test::chi_square_statistic(counts, probs);
  const double p = ttmr_test::chi_square_pvalue(stat, static_cast<double>(probs.size() - 1));
  require(p > 0.001, "chi-square p " + std::to_string(p));
  std::ostringstream os;
  os << "100k draws within ±0.01, chi-square p = " << p;
  return os.str();
}

// ---------------------------------------------------------------- 7
std::string check_dropout() {
  TextCandidateSet set{"t",
                       {{TextFacet::Content, "aa"},
                        {TextFacet::Content, "bb"},
                        {TextFacet::Metadata, "cc"},
                        {TextFacet::Similarity, "dd"}}};
  Rng rng(2024);
  const std::size_t draws = 40000;
  std::vector<std::size_t> k_counts(4, 0);
  for (std::size_t i = 0; i < draws; ++i) {
    const std::string s = dropout_concat(set, rng);
    std::size_t k = 1, pos = 0;
    while ((pos = s.find(". ", pos)) != std::string::npos) {
      ++k;
      pos += 2;
    }
    k_counts[k - 1]++;
  }
  const double stat = ttmr_test::chi_square_statistic(k_counts, {0.25, 0.25, 0.25, 0.25});
  const double p = ttmr_test::chi_square_pvalue(stat, 3.0);
  require(p > 0.001, "K chi-square p " + std::to_string(p));

  TextCandidateSet three{"t",
                         {{TextFacet::Content, "x"},
                          {TextFacet::Content, "y"},
                          {TextFacet::Content, "z"}}};
  std::set<std::string> orders;
  for (int i = 0; i < 10000 && orders.size() < 6; ++i) {
    const std::string s = dropout_concat(three, rng);
    if (s.size() == 7) orders.insert(s);  // "x. y. z" style, all three present
  }
  require(orders.size() == 6, "saw only " + std::to_string(orders.size()) + " of 3! orders");
  std::ostringstream os;
  os << "K uniform over 1..4 (p = " << p << "), all 6 orders for L=K=3";
  return os.str();
}

// ---------------------------------------------------------------- 8
std::string check_metric_oracles() {
  Rng rng(555);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(49);  // <= 50
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n);
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.index(8));  // coarse grid forces ties
      labels[i] = rng.uniform() < 0.5 ? 1 : 0;
      (labels[i] ? pos : neg) = true;
    }
    if (!pos || !neg) continue;
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (!labels[i] || labels[j]) continue;
        ++pairs;
        if (scores[i] > scores[j])
          wins += 1.0;
        else if (scores[i] == scores[j])
          wins += 0.5;
      }
    const double want = wins / static_cast<double>(pairs);
    const double got = binary_auc(scores, labels);
    require(std::abs(got - want) < 1e-12, "AUC mismatch " + std::to_string(got - want));
  }

  // search_topk vs full-scan argsort on a 10k-vector index
  const std::size_t n_vec = 10000, dim = 32;
  EmbeddingIndex index;
  index.dim = dim;
  index.vectors = Matrix(n_vec, dim);
  for (std::size_t i = 0; i < n_vec; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "v%05zu", i);
    index.ids.emplace_back(id);
    auto v = random_unit(dim, rng);
    for (std::size_t d = 0; d < dim; ++d) index.vectors.at(i, d) = v[d];
  }
  for (int q = 0; q < 5; ++q) {
    auto query = random_unit(dim, rng);
    auto got = search_topk(index, query, 25);
    std::vector<std::pair<double, std::string>> all;
    for (std::size_t i = 0; i < n_vec; ++i)
      all.emplace_back(cosine(query, index.vector_of(i)), index.ids[i]);
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (std::size_t r = 0; r < got.size(); ++r) {
      require(got[r].track_id == all[r].second, "argsort mismatch at rank " + std::to_string(r));
      require(std::abs(got[r].score - all[r].first) < 1e-12, "score mismatch");
    }
  }

  const double hand = ndcg_at_k({"b", "a", "c"}, ArtistRelevance{"q", {"a"}}, 200);
  require(std::abs(hand - 1.0 / std::log2(3.0)) < 1e-9, "nDCG hand case " + std::to_string(hand));
  return "AUC pair counting x200, argsort on 10k vectors x5, nDCG 0.6309";
}

// ---------------------------------------------------------------- 9
std::string check_dsp() {
  MelConfig cfg;
  std::vector<double> sig(static_cast<std::size_t>(cfg.sample_rate));
  for (std::size_t i = 0; i < sig.size(); ++i)
    sig[i] = std::sin(2.0 * 3.14159265358979323846 * 1000.0 * i / cfg.sample_rate);
  auto power = stft_power(sig, cfg);
  for (std::size_t f = 0; f < power.rows; ++f) {
    std::size_t argmax = 0;
    for (std::size_t b = 1; b < power.cols; ++b)
      if (power.at(f, b) > power.at(f, argmax)) argmax = b;
    require(argmax == 46, "frame " + std::to_string(f) + " argmax bin " + std::to_string(argmax));
  }

  Rng rng(7);
  std::vector<double> noise(static_cast<std::size_t>(cfg.sample_rate));
  for (auto& v : noise) v = rng.normal();
  std::vector<double> loud = noise;
  for (auto& v : loud) v *= 10.0;
  auto m1 = log_mel(noise, cfg);
  auto m2 = log_mel(loud, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < m1.values.data.size(); ++i)
    worst = std::max(worst, std::abs(m2.values.data[i] - m1.values.data[i] - 2.0));
  require(worst <= 0.05, "log-mel gain deviation " + std::to_string(worst));

  for (std::size_t n : {cfg.n_fft, cfg.n_fft + 1, cfg.n_fft + cfg.hop_samples,
                        cfg.n_fft + 7 * cfg.hop_samples + 3, std::size_t(220500)}) {
    std::vector<double> s(n, 0.25);
    auto p = stft_power(s, cfg);
    require(p.rows == (n - cfg.n_fft) / cfg.hop_samples + 1,
            "frame count wrong for n = " + std::to_string(n));
  }
  std::ostringstream os;
  os << "bin 46 every frame, 10x gain = +2.0 (worst dev " << worst << "), frame formula exact";
  return os.str();
}

// ---------------------------------------------------------------- 10
std::string check_schedule() {
  TrainConfig cfg;  // paper defaults: 5e-5, warmup 5000, total 32768
  require(std::abs(lr_at_step(cfg, 0)) < 1e-12, "lr(0) != 0");
  require(std::abs(lr_at_step(cfg, 5000) - 5e-5) < 1e-12, "lr(5000) != 5e-5");
  require(std::abs(lr_at_step(cfg, cfg.total_steps)) < 1e-12, "lr(total) != 0");
  const double gap1 = std::abs(lr_at_step(cfg, cfg.warmup_steps) -
                               lr_at_step(cfg, cfg.warmup_steps - 1));
  const double gap2 = std::abs(lr_at_step(cfg, cfg.warmup_steps + 1) -
                               lr_at_step(cfg, cfg.warmup_steps));
  require(gap1 < cfg.base_lr * 1e-3 && gap2 < cfg.base_lr * 1e-3,
          "discontinuity at warmup boundary");
  return "lr(0)=0, lr(5000)=5e-5, lr(total)=0 within 1e-12; continuous at warmup";
}

// ---------------------------------------------------------------- 11
std::string check_determinism() {
  PipelineConfig cfg;
  cfg.seed = 7;
  cfg.n_tracks = 24;
  cfg.n_artists = 5;
  cfg.n_triplets = 30;
  cfg.tag_min_count = 2;
  cfg.train.base_lr = 1e-3;
  cfg.train.warmup_steps = 5;
  cfg.train.total_steps = 30;
  cfg.train.batch_size = 8;
  cfg.train.seed = 3;

  const std::string dir_a = scratch("pipe_a"), dir_b = scratch("pipe_b");
  run_pipeline(cfg, dir_a);
  run_pipeline(cfg, dir_b);
  require(read_text_file(dir_a + "/manifest.json") == read_text_file(dir_b + "/manifest.json"),
          "manifests differ between identical runs");
  require(read_text_file(dir_a + "/report.json") == read_text_file(dir_b + "/report.json"),
          "eval reports differ between identical runs");

  // checkpoint resume vs uninterrupted training
  const std::string dir = scratch("resume");
  SyntheticCorpusConfig scfg;
  scfg.seed = 19;
  scfg.n_tracks = 24;
  scfg.n_artists = 4;
  auto files = generate_synthetic_corpus(scfg, dir);
  std::vector<DatasetSpec> specs = {{"synth", 1.0, true, true, true}};
  auto corpus = load_corpus(files.tracks_path, specs);
  auto artists = load_artists(files.artists_path);
  auto graph = build_graph(files.similarity_path, corpus);
  MelConfig mel;
  auto features = featurize_corpus(corpus, mel, /*allow_synth=*/true);
  TrainInputs inputs;
  inputs.corpus = &corpus;
  inputs.graph = &graph;
  inputs.artists = &artists;
  inputs.features = &features;

  TrainConfig tcfg;
  tcfg.base_lr = 1e-3;
  tcfg.warmup_steps = 5;
  tcfg.total_steps = 40;
  tcfg.batch_size = 8;
  tcfg.seed = 13;

  std::vector<double> full_losses;
  Trainer full(tcfg, inputs);
  full.run([&](const StepMetrics& m) { full_losses.push_back(m.loss); });
  const std::string full_ckpt = dir + "/full.json";
  full.save_checkpoint(full_ckpt);

  const std::string mid_ckpt = dir + "/mid.json";
  Trainer interrupted(tcfg, inputs);
  interrupted.run([&](const StepMetrics& m) {
    if (m.step == 20) interrupted.save_checkpoint(mid_ckpt);
  });
  Trainer resumed = Trainer::resume(mid_ckpt, inputs);
  std::vector<double> tail_losses;
  resumed.run([&](const StepMetrics& m) { tail_losses.push_back(m.loss); });
  const std::string resumed_ckpt = dir + "/resumed.json";
  resumed.save_checkpoint(resumed_ckpt);

  require(tail_losses.size() == 20, "resumed run length wrong");
  for (std::size_t i = 0; i < tail_losses.size(); ++i)
    require(tail_losses[i] == full_losses[20 + i],
            "loss diverges at resumed step " + std::to_string(21 + i));
  require(read_text_file(full_ckpt) == read_text_file(resumed_ckpt),
          "final checkpoints not bitwise-identical");
  return "identical manifests + reports across runs; resume bitwise-equal";
}

}  // namespace

int main() {
  criterion(1, "InfoNCE closed-form values", check_info_nce_values);
  criterion(2, "gradients vs central finite differences", check_gradients);
  criterion(3, "overfit oracle (32 pairs, 2000 steps)", check_overfit);
  criterion(4, "random retrieval baselines", check_random_baselines);
  criterion(5, "knowledge-graph inheritance oracle", check_kgraph);
  criterion(6, "dataset mixture sampling proportions", check_mixture);
  criterion(7, "text dropout uniformity and orderings", check_dropout);
  criterion(8, "metric oracles (AUC, top-k, nDCG)", check_metric_oracles);
  criterion(9, "DSP frontend properties", check_dsp);
  criterion(10, "learning-rate schedule endpoints", check_schedule);
  criterion(11, "end-to-end determinism and resume", check_determinism);

  if (g_failures) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all 11 criteria passed\n");
  return 0;
}
