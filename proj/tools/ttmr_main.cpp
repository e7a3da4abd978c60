#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ttmr/eval.hpp"
#include "ttmr/pipeline.hpp"
#include "ttmr/retrieval.hpp"
#include "ttmr/textgen.hpp"
#include "ttmr/util.hpp"

using nlohmann::json;

namespace {

ttmr::CorpusMixture load_corpus_cli(const std::string& tracks, const std::string& mixture) {
  return ttmr::load_corpus(tracks, ttmr::load_mixture_config(mixture));
}

std::string facet_name(ttmr::TextFacet f) {
  switch (f) {
    case ttmr::TextFacet::Content: return "content";
    case ttmr::TextFacet::Metadata: return "metadata";
    case ttmr::TextFacet::Similarity: return "similarity";
  }
  return "?";
}

int run(int argc, char** argv) {
  CLI::App app{"ttmr: desk-scale text-to-music retrieval"};
  app.require_subcommand(1);

  // --- synth-corpus ---
  auto* synth = app.add_subcommand("synth-corpus", "generate a synthetic corpus + eval bundle");
  std::uint64_t seed = 7;
  std::size_t n_tracks = 120, n_artists = 12, n_triplets = 200;
  std::string out_dir = "out", dataset_id = "synth";
  bool with_eval = true;
  synth->add_option("--seed", seed);
  synth->add_option("--n-tracks", n_tracks);
  synth->add_option("--n-artists", n_artists);
  synth->add_option("--n-triplets", n_triplets);
  synth->add_option("--dataset-id", dataset_id);
  synth->add_option("--out", out_dir)->required();
  synth->add_flag("--eval,!--no-eval", with_eval, "also write the eval bundle");
  synth->callback([&] {
    ttmr::SyntheticCorpusConfig cfg;
    cfg.seed = seed;
    cfg.n_tracks = n_tracks;
    cfg.n_artists = n_artists;
    cfg.dataset_id = dataset_id;
    auto files = ttmr::generate_synthetic_corpus(cfg, out_dir);
    std::vector<ttmr::DatasetSpec> specs = {{dataset_id, 1.0, true, true, true}};
    ttmr::write_mixture_config(specs, out_dir + "/mixture.json");
    if (with_eval) {
      auto corpus = ttmr::load_corpus(files.tracks_path, specs);
      auto graph = ttmr::build_graph(files.similarity_path, corpus);
      ttmr::write_synthetic_eval_bundle(corpus, graph, seed, n_triplets, out_dir);
    }
    std::cerr << "wrote corpus to " << out_dir << "\n";
  });

  // --- featurize ---
  auto* feat = app.add_subcommand("featurize", "pooled log-mel features per track");
  std::string tracks_path, mixture_path, features_out, audio_root;
  bool allow_synth = false;
  feat->add_option("--tracks", tracks_path)->required();
  feat->add_option("--mixture", mixture_path)->required();
  feat->add_option("--out", features_out)->required();
  feat->add_option("--audio-root", audio_root, "base dir for relative audio_ref paths");
  feat->add_flag("--synth", allow_synth, "synthesize audio for tracks without audio_ref");
  feat->callback([&] {
    auto corpus = load_corpus_cli(tracks_path, mixture_path);
    ttmr::MelConfig mel;
    auto features = ttmr::featurize_corpus(corpus, mel, allow_synth, audio_root);
    ttmr::save_features(features, features_out);
    std::cerr << "featurized " << features.size() << " tracks -> " << features_out << "\n";
  });

  // --- build-graph ---
  auto* bg = app.add_subcommand("build-graph", "build the artist similarity graph, print stats");
  std::string sim_path, stats_out;
  bg->add_option("--tracks", tracks_path)->required();
  bg->add_option("--mixture", mixture_path)->required();
  bg->add_option("--sim", sim_path)->required();
  bg->add_option("--out", stats_out, "optional stats JSON file");
  bg->callback([&] {
    auto corpus = load_corpus_cli(tracks_path, mixture_path);
    auto graph = ttmr::build_graph(sim_path, corpus);
    auto inherited = ttmr::inherit_track_artist_similarity(graph);
    std::size_t connections = 0;
    for (const auto& [id, e] : inherited) connections += e.similar_artists.size();
    json j;
    j["nodes"] = graph.stats.node_count;
    j["undirected_edges"] = graph.stats.undirected_edge_count;
    j["skipped_unknown_artist_edges"] = graph.stats.skipped_unknown_artist;
    j["dropped_self_edges"] = graph.stats.dropped_self_edges;
    j["tracks_with_inherited_similarity"] = inherited.size();
    j["track_artist_connections"] = connections;
    std::cout << j.dump(2) << "\n";
    if (!stats_out.empty()) ttmr::write_text_file(stats_out, j.dump(2) + "\n");
  });

  // --- gen-text ---
  auto* gt = app.add_subcommand("gen-text", "render per-track text candidates");
  std::string artists_path, captions_path, texts_out;
  gt->add_option("--tracks", tracks_path)->required();
  gt->add_option("--mixture", mixture_path)->required();
  gt->add_option("--artists", artists_path)->required();
  gt->add_option("--sim", sim_path)->required();
  gt->add_option("--captions", captions_path, "optional captions.jsonl override");
  gt->add_option("--seed", seed);
  gt->add_option("--out", texts_out)->required();
  gt->callback([&] {
    auto corpus = load_corpus_cli(tracks_path, mixture_path);
    auto artists = ttmr::load_artists(artists_path);
    auto graph = ttmr::build_graph(sim_path, corpus);
    ttmr::CaptionTable overrides;
    if (!captions_path.empty()) overrides = ttmr::load_captions(captions_path);
    ttmr::CaptionProvider provider = [&overrides](const std::vector<std::string>& tags) {
      return ttmr::default_caption(tags);
    };
    ttmr::Rng rng(seed);
    std::ostringstream out;
    for (const auto& [id, track] : corpus.tracks) {
      ttmr::CaptionProvider p = provider;
      auto ov = overrides.find(id);
      if (ov != overrides.end()) {
        const std::string cap = ov->second;
        p = [cap](const std::vector<std::string>&) { return cap; };
      }
      auto set = ttmr::build_candidates(track, corpus.spec_for(track.dataset_id), graph, artists,
                                        p, rng);
      json j;
      j["track_id"] = id;
      j["candidates"] = json::array();
      for (const auto& c : set.candidates)
        j["candidates"].push_back({{"facet", facet_name(c.facet)}, {"text", c.text}});
      if (!set.candidates.empty()) j["dropout_sample"] = ttmr::dropout_concat(set, rng);
      out << j.dump() << "\n";
    }
    ttmr::write_text_file(texts_out, out.str());
    std::cerr << "wrote candidates -> " << texts_out << "\n";
  });

  // --- train ---
  auto* tr = app.add_subcommand("train", "train the dual encoder");
  std::string features_path, config_path, checkpoint_out, metrics_out_path, resume_path;
  tr->add_option("--tracks", tracks_path)->required();
  tr->add_option("--mixture", mixture_path)->required();
  tr->add_option("--artists", artists_path)->required();
  tr->add_option("--sim", sim_path)->required();
  tr->add_option("--features", features_path)->required();
  tr->add_option("--config", config_path)->required();
  tr->add_option("--captions", captions_path, "optional captions.jsonl override");
  tr->add_option("--out", checkpoint_out)->required();
  tr->add_option("--metrics", metrics_out_path);
  tr->add_option("--resume", resume_path, "resume from a checkpoint");
  tr->callback([&] {
    auto corpus = load_corpus_cli(tracks_path, mixture_path);
    auto artists = ttmr::load_artists(artists_path);
    auto graph = ttmr::build_graph(sim_path, corpus);
    auto features = ttmr::load_features(features_path);
    ttmr::TrainInputs inputs;
    inputs.corpus = &corpus;
    inputs.graph = &graph;
    inputs.artists = &artists;
    inputs.features = &features;
    if (!captions_path.empty()) {
      // external captions become content candidates alongside the provider's
      for (const auto& [id, cap] : ttmr::load_captions(captions_path)) {
        auto it = corpus.tracks.find(id);
        if (it != corpus.tracks.end()) it->second.captions.push_back(cap);
      }
    }
    auto cfg = ttmr::train_config_from_json(ttmr::read_text_file(config_path));
    std::optional<ttmr::Trainer> trainer;
    if (!resume_path.empty())
      trainer.emplace(ttmr::Trainer::resume(resume_path, inputs));
    else
      trainer.emplace(cfg, inputs);
    std::ostringstream metrics;
    const std::size_t ckpt_every = cfg.checkpoint_every;
    trainer->run([&](const ttmr::StepMetrics& m) {
      json j;
      j["step"] = m.step;
      j["loss"] = m.loss;
      j["lr"] = m.lr;
      j["tau"] = m.tau;
      metrics << j.dump() << "\n";
      if (m.step % 100 == 0)
        std::cerr << "step " << m.step << " loss " << m.loss << " tau " << m.tau << "\n";
      if (ckpt_every > 0 && m.step % ckpt_every == 0) trainer->save_checkpoint(checkpoint_out);
    });
    trainer->save_checkpoint(checkpoint_out);
    if (!metrics_out_path.empty()) ttmr::write_text_file(metrics_out_path, metrics.str());
    std::cerr << "checkpoint -> " << checkpoint_out << "\n";
  });

  // --- build-index ---
  auto* bi = app.add_subcommand("build-index", "embed all tracks into an index file");
  std::string checkpoint_path, index_out;
  bool skip_missing = false;
  bi->add_option("--checkpoint", checkpoint_path)->required();
  bi->add_option("--tracks", tracks_path)->required();
  bi->add_option("--mixture", mixture_path)->required();
  bi->add_option("--features", features_path)->required();
  bi->add_option("--out", index_out)->required();
  bi->add_flag("--skip-missing", skip_missing);
  bi->callback([&] {
    auto model = ttmr::checkpoint_from_json(ttmr::read_text_file(checkpoint_path));
    auto corpus = load_corpus_cli(tracks_path, mixture_path);
    auto features = ttmr::load_features(features_path);
    auto index = ttmr::build_index(model, corpus, features, {skip_missing});
    ttmr::save_index(index, index_out);
    std::cerr << "indexed " << index.size() << " tracks -> " << index_out << "\n";
  });

  // --- search ---
  auto* se = app.add_subcommand("search", "rank tracks for a text query");
  std::string index_path, query;
  std::size_t k = 10;
  se->add_option("--index", index_path)->required();
  se->add_option("--checkpoint", checkpoint_path)->required();
  se->add_option("--query", query)->required();
  se->add_option("--k", k);
  se->callback([&] {
    auto model = ttmr::checkpoint_from_json(ttmr::read_text_file(checkpoint_path));
    auto index = ttmr::load_index(index_path);
    auto hits = ttmr::search_topk(index, model.encode_text(query), k);
    json j = json::array();
    for (const auto& h : hits) j.push_back({{"track_id", h.track_id}, {"score", h.score}});
    std::cout << j.dump(2) << "\n";
  });

  // --- eval ---
  auto* ev = app.add_subcommand("eval", "run the retrieval eval protocols");
  std::string captions_eval, tags_eval, tag_embeddings, triplets_path, artist_eval, report_out;
  std::size_t recall_k = 10, ndcg_k = 200, tag_min_count = 10;
  ev->add_option("--checkpoint", checkpoint_path)->required();
  ev->add_option("--index", index_path)->required();
  ev->add_option("--tracks", tracks_path)->required();
  ev->add_option("--mixture", mixture_path)->required();
  ev->add_option("--artists", artists_path)->required();
  ev->add_option("--captions-eval", captions_eval);
  ev->add_option("--tags-eval", tags_eval);
  ev->add_option("--tag-embeddings", tag_embeddings);
  ev->add_option("--triplets", triplets_path);
  ev->add_option("--artist-eval", artist_eval);
  ev->add_option("--recall-k", recall_k);
  ev->add_option("--ndcg-k", ndcg_k);
  ev->add_option("--tag-min-count", tag_min_count);
  ev->add_option("--out", report_out);
  ev->callback([&] {
    auto model = ttmr::checkpoint_from_json(ttmr::read_text_file(checkpoint_path));
    auto index = ttmr::load_index(index_path);
    auto corpus = load_corpus_cli(tracks_path, mixture_path);
    auto artists = ttmr::load_artists(artists_path);
    ttmr::EvalBundle bundle;
    if (!captions_eval.empty()) bundle.captions_path = captions_eval;
    if (!tags_eval.empty()) bundle.tags_path = tags_eval;
    if (!tag_embeddings.empty()) bundle.tag_embeddings_path = tag_embeddings;
    if (!triplets_path.empty()) bundle.triplets_path = triplets_path;
    if (!artist_eval.empty()) bundle.artist_eval_path = artist_eval;
    bundle.recall_k = recall_k;
    bundle.ndcg_k = ndcg_k;
    bundle.tag_min_count = tag_min_count;
    std::string report = ttmr::run_eval_suite(model, index, corpus, artists, bundle);
    std::cout << report << "\n";
    if (!report_out.empty()) ttmr::write_text_file(report_out, report + "\n");
  });

  // --- pipeline ---
  auto* pl = app.add_subcommand("pipeline", "synthetic corpus -> train -> index -> eval");
  std::string pipe_config;
  bool seed_given = false;
  pl->add_option("--config", pipe_config, "pipeline config JSON")->required();
  pl->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  pl->add_option("--out", out_dir)->required();
  pl->callback([&] {
    auto cfg = ttmr::pipeline_config_from_json(ttmr::read_text_file(pipe_config));
    if (seed_given) cfg.seed = seed;
    std::string manifest = ttmr::run_pipeline(cfg, out_dir);
    std::cerr << "manifest -> " << manifest << "\n";
    std::cout << ttmr::read_text_file(manifest);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ttmr::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ttmr::NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const ttmr::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
