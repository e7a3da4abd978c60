#include "ttmr/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ttmr/util.hpp"

namespace ttmr {

using nlohmann::json;

const TrackRecord& CorpusMixture::track(const std::string& id) const {
  auto it = tracks.find(id);
  if (it == tracks.end()) throw DataError("unknown track_id: " + id);
  return it->second;
}

const DatasetSpec& CorpusMixture::spec_for(const std::string& dataset_id) const {
  for (const auto& s : specs)
    if (s.dataset_id == dataset_id) return s;
  throw DataError("unknown dataset_id: " + dataset_id);
}

namespace {

std::optional<std::string> opt_str(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

std::vector<std::string> str_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (j.contains(key) && !j.at(key).is_null()) {
    for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

TrackRecord parse_track_record(const std::string& json_line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(json_line);
  } catch (const json::exception& e) {
    throw DataError("malformed record at line " + std::to_string(line_no) + ": " + e.what());
  }
  TrackRecord r;
  try {
    r.track_id = j.at("track_id").get<std::string>();
    r.dataset_id = j.at("dataset_id").get<std::string>();
    r.title = opt_str(j, "title");
    r.artist_id = opt_str(j, "artist_id");
    r.artist_name = opt_str(j, "artist_name");
    r.album = opt_str(j, "album");
    r.tags = str_list(j, "tags");
    r.captions = str_list(j, "captions");
    r.features_ref = opt_str(j, "features_ref");
    r.audio_ref = opt_str(j, "audio_ref");
  } catch (const json::exception& e) {
    throw DataError("malformed record at line " + std::to_string(line_no) + ": " + e.what());
  }
  if (r.track_id.empty())
    throw DataError("empty track_id at line " + std::to_string(line_no));
  if (r.tags.empty() && r.captions.empty() && !r.title.has_value())
    throw DataError("track " + r.track_id +
                    " has no tags, captions, or title (line " + std::to_string(line_no) + ")");
  if (r.artist_id.has_value() && !r.artist_name.has_value())
    throw DataError("track " + r.track_id + " has artist_id without artist_name (line " +
                    std::to_string(line_no) + ")");
  return r;
}

void validate_specs(const std::vector<DatasetSpec>& specs) {
  if (specs.empty()) throw DataError("mixture has no dataset specs");
  double sum = 0.0;
  std::set<std::string> seen;
  for (const auto& s : specs) {
    if (s.sample_prob < 0.0 || s.sample_prob > 1.0)
      throw DataError("dataset " + s.dataset_id + " has sample_prob outside [0,1]");
    if (!seen.insert(s.dataset_id).second)
      throw DataError("duplicate dataset_id in mixture: " + s.dataset_id);
    sum += s.sample_prob;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "probabilities sum to " << sum;
    throw DataError(os.str());
  }
}

CorpusMixture load_corpus(const std::string& tracks_path,
                          const std::vector<DatasetSpec>& specs) {
  validate_specs(specs);
  std::ifstream in(tracks_path);
  if (!in) throw DataError("cannot open tracks file: " + tracks_path);

  CorpusMixture m;
  m.specs = specs;
  std::set<std::string> known;
  for (const auto& s : specs) known.insert(s.dataset_id);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    TrackRecord r = parse_track_record(line, line_no);
    if (!known.count(r.dataset_id))
      throw DataError("track " + r.track_id + " references unknown dataset_id " + r.dataset_id +
                      " (line " + std::to_string(line_no) + ")");
    if (m.tracks.count(r.track_id))
      throw DataError("duplicate track_id: " + r.track_id);
    m.pools[r.dataset_id].push_back(r.track_id);
    m.tracks.emplace(r.track_id, std::move(r));
  }
  for (auto& [ds, pool] : m.pools) std::sort(pool.begin(), pool.end());
  for (const auto& s : specs) {
    if (s.sample_prob > 0.0 &&
        (m.pools.find(s.dataset_id) == m.pools.end() || m.pools[s.dataset_id].empty()))
      throw DataError("dataset " + s.dataset_id + " has sample_prob > 0 but no tracks");
  }
  return m;
}

ArtistTable load_artists(const std::string& artists_path) {
  std::ifstream in(artists_path);
  if (!in) throw DataError("cannot open artists file: " + artists_path);
  ArtistTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("malformed artist record at line " + std::to_string(line_no) + ": " +
                      e.what());
    }
    t[j.at("artist_id").get<std::string>()] = j.at("name").get<std::string>();
  }
  return t;
}

std::vector<DatasetSpec> load_mixture_config(const std::string& config_path) {
  json j = json::parse(read_text_file(config_path));
  std::vector<DatasetSpec> specs;
  for (const auto& d : j.at("datasets")) {
    DatasetSpec s;
    s.dataset_id = d.at("dataset_id").get<std::string>();
    s.sample_prob = d.at("sample_prob").get<double>();
    s.has_content = d.value("has_content", false);
    s.has_metadata = d.value("has_metadata", false);
    s.has_similarity = d.value("has_similarity", false);
    specs.push_back(s);
  }
  validate_specs(specs);
  return specs;
}

std::vector<std::string> sample_batch_sources(const CorpusMixture& mixture,
                                              std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw UsageError("batch_size must be >= 1");
  std::vector<std::string> out;
  out.reserve(batch_size);
  for (std::size_t slot = 0; slot < batch_size; ++slot) {
    double u = rng.uniform();
    double acc = 0.0;
    const DatasetSpec* chosen = nullptr;
    for (const auto& s : mixture.specs) {
      acc += s.sample_prob;
      if (u < acc) {
        chosen = &s;
        break;
      }
    }
    if (!chosen) chosen = &mixture.specs.back();  // u landed on accumulated rounding slack
    auto it = mixture.pools.find(chosen->dataset_id);
    if (it == mixture.pools.end() || it->second.empty())
      throw DataError("empty pool selected for dataset " + chosen->dataset_id);
    const auto& pool = it->second;
    out.push_back(pool[rng.index(pool.size())]);
  }
  return out;
}

namespace {

const std::vector<std::string>& default_tag_vocab() {
  static const std::vector<std::string> v = {
      "jazz",     "rock",      "pop",     "classical", "electronic", "ambient",
      "folk",     "blues",     "funk",    "soul",      "piano",      "guitar",
      "drums",    "synth",     "violin",  "vocal",     "upbeat",     "mellow",
      "dark",     "dreamy",    "energetic", "calm",    "groovy",     "melancholic"};
  return v;
}

const std::vector<std::string>& name_syllables() {
  static const std::vector<std::string> v = {"ran", "vel", "mor", "tia", "kes", "lun",
                                             "dor", "zam", "eli", "pho", "gris", "ona"};
  return v;
}

std::string make_name(Rng& rng, std::size_t syllables) {
  const auto& syl = name_syllables();
  std::string s;
  for (std::size_t i = 0; i < syllables; ++i) s += syl[rng.index(syl.size())];
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

}  // namespace

SyntheticCorpusFiles generate_synthetic_corpus(const SyntheticCorpusConfig& cfg,
                                               const std::string& out_dir) {
  if (cfg.n_artists < 2) throw UsageError("n_artists must be >= 2");
  if (cfg.n_tracks < cfg.n_artists) throw UsageError("n_tracks must be >= n_artists");

  const auto& vocab = cfg.vocab.empty() ? default_tag_vocab() : cfg.vocab;
  Rng rng(cfg.seed);

  std::filesystem::create_directories(out_dir);
  SyntheticCorpusFiles files;
  files.tracks_path = out_dir + "/tracks.jsonl";
  files.artists_path = out_dir + "/artists.jsonl";
  files.similarity_path = out_dir + "/artist_sim.jsonl";

  // Artists with generated display names.
  std::vector<std::string> artist_ids;
  std::map<std::string, std::string> artist_names;
  std::ostringstream artists_out;
  for (std::size_t i = 0; i < cfg.n_artists; ++i) {
    std::ostringstream id;
    id << "ar" << std::setw(4) << std::setfill('0') << i;
    artist_ids.push_back(id.str());
    artist_names[artist_ids.back()] = make_name(rng, 2) + " " + make_name(rng, 2);
    json j;
    j["artist_id"] = artist_ids.back();
    j["name"] = artist_names[artist_ids.back()];
    artists_out << j.dump() << "\n";
  }

  // Similarity: a ring guarantees each artist one edge, plus random chords.
  std::set<std::pair<std::string, std::string>> edges;
  auto add_edge = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    auto key = std::minmax(artist_ids[a], artist_ids[b]);
    edges.insert({key.first, key.second});
  };
  for (std::size_t i = 0; i < cfg.n_artists; ++i) add_edge(i, (i + 1) % cfg.n_artists);
  std::size_t chords = cfg.n_artists / 2;
  for (std::size_t c = 0; c < chords; ++c)
    add_edge(rng.index(cfg.n_artists), rng.index(cfg.n_artists));
  std::ostringstream sim_out;
  for (const auto& [a, b] : edges) {
    json j;
    j["src"] = a;
    j["dst"] = b;
    sim_out << j.dump() << "\n";
  }

  // Tracks: each has title, artist, tags; some albums.
  std::ostringstream tracks_out;
  for (std::size_t i = 0; i < cfg.n_tracks; ++i) {
    std::ostringstream id;
    id << "tr" << std::setw(6) << std::setfill('0') << i;
    std::size_t artist = i < cfg.n_artists ? i : rng.index(cfg.n_artists);
    json j;
    j["track_id"] = id.str();
    j["dataset_id"] = cfg.dataset_id;
    j["title"] = make_name(rng, 3);
    j["artist_id"] = artist_ids[artist];
    j["artist_name"] = artist_names[artist_ids[artist]];
    if (rng.uniform() < 0.7) j["album"] = make_name(rng, 2) + " " + make_name(rng, 1);
    std::size_t n_tags = 2 + rng.index(4);
    std::set<std::string> tags;
    while (tags.size() < n_tags) tags.insert(vocab[rng.index(vocab.size())]);
    j["tags"] = std::vector<std::string>(tags.begin(), tags.end());
    j["captions"] = json::array();
    tracks_out << j.dump() << "\n";
  }

  write_text_file(files.tracks_path, tracks_out.str());
  write_text_file(files.artists_path, artists_out.str());
  write_text_file(files.similarity_path, sim_out.str());
  return files;
}

}  // namespace ttmr
