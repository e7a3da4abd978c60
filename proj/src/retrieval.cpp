#include "ttmr/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ttmr/util.hpp"

namespace ttmr {

std::vector<double> EmbeddingIndex::vector_of(std::size_t i) const {
  std::vector<double> out(dim);
  for (std::size_t k = 0; k < dim; ++k) out[k] = vectors.at(i, k);
  return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DataError("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw NumericError("cosine: zero-norm vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingIndex build_index(const Model& model, const CorpusMixture& corpus,
                           const FeatureTable& features, const BuildIndexOptions& opts) {
  EmbeddingIndex index;
  index.dim = model.config().embed_dim;
  index.checkpoint_hash = to_hex(fnv1a64(checkpoint_to_json(model, {})));

  std::vector<std::string> missing;
  std::vector<const TrackRecord*> usable;
  for (const auto& [id, track] : corpus.tracks) {
    if (features.find(id) == features.end()) {
      missing.push_back(id);
    } else {
      usable.push_back(&track);
    }
  }
  if (!missing.empty() && !opts.skip_missing) {
    std::string list;
    for (const auto& id : missing) list += " " + id;
    throw DataError("missing features for" + list);
  }

  index.vectors = Matrix(usable.size(), index.dim);
  for (std::size_t i = 0; i < usable.size(); ++i) {
    const auto& id = usable[i]->track_id;
    index.ids.push_back(id);
    auto z = model.encode_audio(features.at(id));
    for (std::size_t k = 0; k < index.dim; ++k) index.vectors.at(i, k) = z[k];
  }
  return index;
}

std::vector<SearchHit> search_topk(const EmbeddingIndex& index,
                                   const std::vector<double>& query_vector, std::size_t k) {
  if (k == 0) throw UsageError("k must be >= 1");
  if (index.size() == 0) throw DataError("empty index");
  if (query_vector.size() != index.dim) throw DataError("query dimension mismatch");

  double qn = 0.0;
  for (double v : query_vector) qn += v * v;
  if (qn == 0.0) throw NumericError("zero-norm query");
  qn = std::sqrt(qn);

  std::vector<SearchHit> hits(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    double dot = 0.0, vn = 0.0;
    for (std::size_t d = 0; d < index.dim; ++d) {
      dot += query_vector[d] * index.vectors.at(i, d);
      vn += index.vectors.at(i, d) * index.vectors.at(i, d);
    }
    hits[i] = {index.ids[i], dot / (qn * std::sqrt(vn))};
  }
  const std::size_t kk = std::min(k, hits.size());
  auto better = [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.track_id < b.track_id;
  };
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(kk), hits.end(),
                    better);
  hits.resize(kk);
  return hits;
}

PrototypeResult artist_prototypes(const EmbeddingIndex& index, const CorpusMixture& corpus) {
  PrototypeResult result;
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < index.size(); ++i) pos[index.ids[i]] = i;

  std::map<std::string, std::pair<std::vector<double>, std::size_t>> acc;
  for (const auto& [id, track] : corpus.tracks) {
    auto it = pos.find(id);
    if (it == pos.end()) continue;
    if (!track.artist_id) {
      ++result.skipped_trackless;
      continue;
    }
    auto& [sum, count] = acc[*track.artist_id];
    if (sum.empty()) sum.assign(index.dim, 0.0);
    for (std::size_t d = 0; d < index.dim; ++d) sum[d] += index.vectors.at(it->second, d);
    ++count;
  }

  for (auto& [artist_id, sc] : acc) {
    auto& [sum, count] = sc;
    for (auto& v : sum) v /= static_cast<double>(count);
    double n2 = 0.0;
    for (double v : sum) n2 += v * v;
    if (std::sqrt(n2) < 1e-12) {
      result.degenerate.push_back(artist_id);
      continue;
    }
    result.prototypes[artist_id] = ArtistPrototype{artist_id, sum, count};
  }
  return result;
}

namespace {
constexpr char kIndexMagic[8] = {'T', 'T', 'M', 'R', 'I', 'D', 'X', '1'};
}

void save_index(const EmbeddingIndex& index, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open index file for writing: " + path);
  out.write(kIndexMagic, 8);
  std::uint32_t dim = static_cast<std::uint32_t>(index.dim);
  std::uint64_t count = index.size();
  out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  std::uint32_t hash_len = static_cast<std::uint32_t>(index.checkpoint_hash.size());
  out.write(reinterpret_cast<const char*>(&hash_len), sizeof hash_len);
  out.write(index.checkpoint_hash.data(), hash_len);
  for (std::size_t i = 0; i < index.size(); ++i) {
    std::uint32_t id_len = static_cast<std::uint32_t>(index.ids[i].size());
    out.write(reinterpret_cast<const char*>(&id_len), sizeof id_len);
    out.write(index.ids[i].data(), id_len);
    out.write(reinterpret_cast<const char*>(&index.vectors.data[i * index.dim]),
              static_cast<std::streamsize>(index.dim * sizeof(double)));
  }
  if (!out) throw DataError("index write failed: " + path);
}

EmbeddingIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open index file: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kIndexMagic, 8) != 0)
    throw DataError("not a ttmr index file: " + path);
  EmbeddingIndex index;
  std::uint32_t dim = 0, hash_len = 0;
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&dim), sizeof dim);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  in.read(reinterpret_cast<char*>(&hash_len), sizeof hash_len);
  index.dim = dim;
  index.checkpoint_hash.resize(hash_len);
  in.read(index.checkpoint_hash.data(), hash_len);
  index.vectors = Matrix(count, dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t id_len = 0;
    in.read(reinterpret_cast<char*>(&id_len), sizeof id_len);
    std::string id(id_len, '\0');
    in.read(id.data(), id_len);
    index.ids.push_back(std::move(id));
    in.read(reinterpret_cast<char*>(&index.vectors.data[i * dim]),
            static_cast<std::streamsize>(dim * sizeof(double)));
  }
  if (!in) throw DataError("truncated index file: " + path);
  return index;
}

}  // namespace ttmr
