#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "ttmr/util.hpp"

using nlohmann::json;

namespace {

std::string bin() {
  const char* b = std::getenv("TTMR_BIN");
  REQUIRE(b != nullptr);
  return b;
}

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = bin() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string work_dir(const std::string& leaf) {
  auto d = std::filesystem::temp_directory_path() / "ttmr_cli_test" / leaf;
  std::filesystem::create_directories(d);
  return d.string();
}

}  // namespace

TEST_CASE("no subcommand and unknown flags exit 1") {
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("--bogus").exit_code == 1);
  CHECK(run_cli("synth-corpus").exit_code == 1);  // missing required --out
}

TEST_CASE("missing input file exits 2") {
  auto r = run_cli("build-graph --tracks /nonexistent.jsonl --mixture /nonexistent.json"
                   " --sim /nonexistent.jsonl");
  CHECK(r.exit_code == 2);
}

TEST_CASE("end-to-end: synth-corpus, featurize, graph stats, train, index, search, eval") {
  const std::string dir = work_dir("e2e");
  REQUIRE(run_cli("synth-corpus --seed 11 --n-tracks 20 --n-artists 4 --n-triplets 20 --out " +
                  dir).exit_code == 0);
  for (const char* f : {"tracks.jsonl", "artists.jsonl", "artist_sim.jsonl", "mixture.json",
                        "captions_eval.jsonl", "tags_eval.jsonl", "triplets.jsonl",
                        "artist_eval.jsonl"})
    CHECK(std::filesystem::exists(dir + "/" + f));

  const std::string common =
      " --tracks " + dir + "/tracks.jsonl --mixture " + dir + "/mixture.json";

  auto stats = run_cli("build-graph" + common + " --sim " + dir + "/artist_sim.jsonl");
  REQUIRE(stats.exit_code == 0);
  json sj = json::parse(stats.output);
  CHECK(sj.at("nodes").get<int>() == 4);
  CHECK(sj.at("undirected_edges").get<int>() > 0);

  REQUIRE(run_cli("featurize" + common + " --synth --out " + dir + "/features.jsonl").exit_code ==
          0);

  const std::string train_cfg = dir + "/train.json";
  ttmr::write_text_file(train_cfg,
                        "{\"base_lr\":1e-3,\"warmup_steps\":2,\"total_steps\":10,"
                        "\"batch_size\":8,\"seed\":3}");
  REQUIRE(run_cli("train" + common + " --artists " + dir + "/artists.jsonl --sim " + dir +
                  "/artist_sim.jsonl --features " + dir + "/features.jsonl --config " + train_cfg +
                  " --out " + dir + "/ckpt.json").exit_code == 0);
  CHECK(std::filesystem::exists(dir + "/ckpt.json"));

  REQUIRE(run_cli("build-index" + common + " --checkpoint " + dir + "/ckpt.json --features " +
                  dir + "/features.jsonl --out " + dir + "/index.bin").exit_code == 0);

  auto search = run_cli("search --index " + dir + "/index.bin --checkpoint " + dir +
                        "/ckpt.json --query \"a music track characterized by jazz\" --k 5");
  REQUIRE(search.exit_code == 0);
  json hits = json::parse(search.output);
  REQUIRE(hits.is_array());
  CHECK(hits.size() == 5);
  for (std::size_t i = 1; i < hits.size(); ++i)
    CHECK(hits[i - 1].at("score").get<double>() >= hits[i].at("score").get<double>());

  auto eval = run_cli("eval" + common + " --artists " + dir + "/artists.jsonl --index " + dir +
                      "/index.bin --checkpoint " + dir + "/ckpt.json --captions-eval " + dir +
                      "/captions_eval.jsonl --triplets " + dir + "/triplets.jsonl --tag-min-count 2"
                      " --tags-eval " + dir + "/tags_eval.jsonl --artist-eval " + dir +
                      "/artist_eval.jsonl");
  REQUIRE(eval.exit_code == 0);
  json report = json::parse(eval.output);
  CHECK(report.contains("caption"));
  CHECK(report.contains("tag"));
  CHECK(report.contains("track"));
  CHECK(report.contains("artist"));
}

TEST_CASE("gen-text emits candidates for every track") {
  const std::string dir = work_dir("gentext");
  REQUIRE(run_cli("synth-corpus --seed 5 --n-tracks 10 --n-artists 3 --no-eval --out " + dir)
              .exit_code == 0);
  auto r = run_cli("gen-text --tracks " + dir + "/tracks.jsonl --mixture " + dir +
                   "/mixture.json --artists " + dir + "/artists.jsonl --sim " + dir +
                   "/artist_sim.jsonl --seed 1 --out " + dir + "/texts.jsonl");
  REQUIRE(r.exit_code == 0);
  std::size_t lines = 0;
  std::string text = ttmr::read_text_file(dir + "/texts.jsonl");
  for (char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == 10);
}

TEST_CASE("pipeline subcommand writes a manifest") {
  const std::string dir = work_dir("pipeline");
  const std::string cfg = dir + "/cfg.json";
  ttmr::write_text_file(cfg,
                        "{\"seed\":3,\"n_tracks\":16,\"n_artists\":4,\"n_triplets\":20,"
                        "\"tag_min_count\":2,\"train\":{\"base_lr\":1e-3,\"warmup_steps\":2,"
                        "\"total_steps\":8,\"batch_size\":8,\"seed\":3}}");
  auto r = run_cli("pipeline --config " + cfg + " --out " + dir + "/run");
  REQUIRE(r.exit_code == 0);
  REQUIRE(std::filesystem::exists(dir + "/run/manifest.json"));
  json manifest = json::parse(ttmr::read_text_file(dir + "/run/manifest.json"));
  CHECK(manifest.at("artifacts").size() > 0);
  CHECK(manifest.contains("config_hash"));
}
