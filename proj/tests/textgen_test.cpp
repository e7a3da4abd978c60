#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <set>

#include "ttmr/textgen.hpp"
#include "ttmr/util.hpp"

using namespace ttmr;

TEST_CASE("metadata template, full and album-less") {
  CHECK(render_metadata_text(std::string("Superstition"), std::string("Stevie Wonder"),
                             std::string("Talking Book")) ==
        "music track Superstition by Stevie Wonder from Talking Book");
  CHECK(render_metadata_text(std::string("X"), std::string("Y"), std::nullopt) ==
        "music track X by Y");
  CHECK_THROWS_AS(render_metadata_text(std::nullopt, std::nullopt, std::string("Z")), DataError);
}

TEST_CASE("similarity template") {
  CHECK(render_similarity_text("Herbie Hancock") == "similar with artist Herbie Hancock");
  CHECK(render_similarity_text("A B") == "similar with artist A B");
  CHECK_THROWS_AS(render_similarity_text(""), DataError);
}

TEST_CASE("query templates") {
  QueryFields f;
  f.title = "Superstition";
  f.artist_name = "Stevie Wonder";
  f.album = "Talking Book";
  CHECK(render_query(QueryKind::TrackSim, f) ==
        "similar music track with Superstition by Stevie Wonder from Talking Book");
  QueryFields a;
  a.artist_name = "Herbie Hancock";
  CHECK(render_query(QueryKind::ArtistSim, a) == "similar artist with Herbie Hancock");
  QueryFields t;
  t.raw_text = "jazz";
  CHECK(render_query(QueryKind::Tag, t) == "jazz");
  CHECK(render_query(QueryKind::Caption, t) == "jazz");
  QueryFields missing;
  CHECK_THROWS_AS(render_query(QueryKind::TrackSim, missing), DataError);
}

TEST_CASE("default caption") {
  CHECK(default_caption({"jazz", "piano"}) == "a music track characterized by jazz, piano");
  CHECK(default_caption({"rock"}) == "a music track characterized by rock");
  CHECK_THROWS_AS(default_caption({}), DataError);
}

TEST_CASE("dropout: single candidate always returned") {
  TextCandidateSet set{"t", {{TextFacet::Content, "only"}}};
  Rng rng(1);
  for (int i = 0; i < 20; ++i) CHECK(dropout_concat(set, rng) == "only");
}

TEST_CASE("dropout: empty set errors") {
  TextCandidateSet set{"t", {}};
  Rng rng(1);
  CHECK_THROWS_AS(dropout_concat(set, rng), DataError);
}

namespace {

std::size_t count_parts(const std::string& s) {
  std::size_t n = 1, pos = 0;
  while ((pos = s.find(". ", pos)) != std::string::npos) {
    ++n;
    pos += 2;
  }
  return n;
}

}  // namespace

TEST_CASE("dropout: K uniform over 1..L for L=4") {
  TextCandidateSet set{"t",
                       {{TextFacet::Content, "aa"},
                        {TextFacet::Content, "bb"},
                        {TextFacet::Metadata, "cc"},
                        {TextFacet::Similarity, "dd"}}};
  Rng rng(7);
  std::map<std::size_t, std::size_t> k_counts;
  const std::size_t draws = 40000;
  for (std::size_t i = 0; i < draws; ++i) k_counts[count_parts(dropout_concat(set, rng))]++;
  for (std::size_t k = 1; k <= 4; ++k)
    CHECK(static_cast<double>(k_counts[k]) / draws == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("dropout: all 3! orders appear when K=L=3") {
  TextCandidateSet set{"t",
                       {{TextFacet::Content, "x"},
                        {TextFacet::Content, "y"},
                        {TextFacet::Content, "z"}}};
  Rng rng(3);
  std::set<std::string> full_orders;
  for (int i = 0; i < 5000; ++i) {
    std::string s = dropout_concat(set, rng);
    if (count_parts(s) == 3) full_orders.insert(s);
  }
  CHECK(full_orders.size() == 6);
}

TEST_CASE("dropout: inclusion probability for L=2 is 0.75 per candidate") {
  TextCandidateSet set{"t", {{TextFacet::Content, "p"}, {TextFacet::Content, "q"}}};
  Rng rng(11);
  const std::size_t draws = 40000;
  std::size_t with_p = 0, with_q = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    std::string s = dropout_concat(set, rng);
    if (s.find('p') != std::string::npos) ++with_p;
    if (s.find('q') != std::string::npos) ++with_q;
  }
  CHECK(static_cast<double>(with_p) / draws == doctest::Approx(0.75).epsilon(0.03));
  CHECK(static_cast<double>(with_q) / draws == doctest::Approx(0.75).epsilon(0.03));
}

TEST_CASE("facet assembly follows dataset flags") {
  TrackRecord track;
  track.track_id = "t1";
  track.dataset_id = "ds";
  track.title = "Song";
  track.artist_id = "a1";
  track.artist_name = "Artist One";
  track.album = "Album";
  track.tags = {"jazz"};
  track.captions = {"a caption"};

  auto graph = build_graph_from({{"a1", "a2"}}, {"a1", "a2"}, {{"t1", "a1"}});
  ArtistTable artists = {{"a1", "Artist One"}, {"a2", "Artist Two"}};
  CaptionProvider provider = [](const std::vector<std::string>& tags) {
    return default_caption(tags);
  };
  Rng rng(1);

  SUBCASE("all flags: all three facets present") {
    DatasetSpec spec{"ds", 1.0, true, true, true};
    auto set = build_candidates(track, spec, graph, artists, provider, rng);
    std::set<TextFacet> facets;
    for (const auto& c : set.candidates) facets.insert(c.facet);
    CHECK(facets.count(TextFacet::Content));
    CHECK(facets.count(TextFacet::Metadata));
    CHECK(facets.count(TextFacet::Similarity));
  }
  SUBCASE("no metadata flag: no metadata candidates") {
    DatasetSpec spec{"ds", 1.0, true, false, false};
    auto set = build_candidates(track, spec, graph, artists, provider, rng);
    for (const auto& c : set.candidates) CHECK(c.facet == TextFacet::Content);
  }
  SUBCASE("similarity text names the sampled similar artist, not the owner") {
    DatasetSpec spec{"ds", 1.0, false, false, true};
    auto set = build_candidates(track, spec, graph, artists, provider, rng);
    REQUIRE(set.candidates.size() == 1);
    CHECK(set.candidates[0].text == "similar with artist Artist Two");
  }
}
