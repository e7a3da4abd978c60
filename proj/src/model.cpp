#include "ttmr/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "ttmr/util.hpp"

namespace ttmr {

using nlohmann::json;

std::vector<Tensor*> Params::tensors() {
  return {&audio_w1, &audio_b1, &audio_w2, &audio_b2, &tok_embed, &text_w, &text_b, &log_tau};
}

std::vector<const Tensor*> Params::tensors() const {
  return {&audio_w1, &audio_b1, &audio_w2, &audio_b2, &tok_embed, &text_w, &text_b, &log_tau};
}

Params Params::zeros_like(const Params& other) {
  Params p = other;
  for (Tensor* t : p.tensors()) std::fill(t->data.begin(), t->data.end(), 0.0);
  return p;
}

Model::Model(ModelConfig cfg, Params params) : cfg_(std::move(cfg)), params_(std::move(params)) {
  rebuild_token_index();
}

void Model::rebuild_token_index() {
  token_ids_.clear();
  for (std::size_t i = 0; i < cfg_.vocab.size(); ++i) token_ids_[cfg_.vocab[i]] = i + 1;
}

Model Model::init(ModelConfig cfg, Rng& rng) {
  Params p;
  auto randn_tensor = [&](const char* name, std::size_t r, std::size_t c, double scale) {
    Tensor t(name, r, c);
    for (auto& v : t.data) v = rng.normal() * scale;
    return t;
  };
  const std::size_t vocab_rows = cfg.vocab.size() + 1;  // row 0 = UNK
  p.audio_w1 = randn_tensor("audio_w1", cfg.hidden_dim, cfg.feat_dim,
                            1.0 / std::sqrt(static_cast<double>(cfg.feat_dim)));
  p.audio_b1 = Tensor("audio_b1", cfg.hidden_dim, 1);
  p.audio_w2 = randn_tensor("audio_w2", cfg.embed_dim, cfg.hidden_dim,
                            1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim)));
  p.audio_b2 = Tensor("audio_b2", cfg.embed_dim, 1);
  p.tok_embed = randn_tensor("tok_embed", vocab_rows, cfg.embed_dim,
                             1.0 / std::sqrt(static_cast<double>(cfg.embed_dim)));
  p.text_w = randn_tensor("text_w", cfg.embed_dim, cfg.embed_dim,
                          1.0 / std::sqrt(static_cast<double>(cfg.embed_dim)));
  p.text_b = Tensor("text_b", cfg.embed_dim, 1);
  p.log_tau = Tensor("log_tau", 1, 1);
  p.log_tau.data[0] = std::log(0.1);
  return Model(std::move(cfg), std::move(p));
}

double Model::tau() const { return std::exp(params_.log_tau.data[0]); }

namespace {

std::vector<double> normalize(std::vector<double> u, const char* what) {
  double n2 = 0.0;
  for (double v : u) n2 += v * v;
  const double n = std::sqrt(n2);
  if (n == 0.0) throw NumericError(std::string("degenerate embedding in ") + what);
  for (auto& v : u) v /= n;
  return u;
}

// du = (g - (g.z) z) / ||u||
std::vector<double> normalize_backward(const std::vector<double>& g, const std::vector<double>& z,
                                       double norm) {
  double gz = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) gz += g[i] * z[i];
  std::vector<double> du(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) du[i] = (g[i] - gz * z[i]) / norm;
  return du;
}

struct AudioCache {
  std::vector<double> x, h_pre, h, u, z;
  double norm = 0.0;
};

struct TextCache {
  std::vector<std::size_t> ids;
  std::vector<double> e, u, z;
  double norm = 0.0;
};

}  // namespace

std::vector<std::size_t> Model::tokenize(const std::string& text) const {
  auto tokens = split_ws(lowercase(text));
  if (tokens.empty()) throw DataError("cannot encode empty text");
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto it = token_ids_.find(t);
    ids.push_back(it == token_ids_.end() ? 0 : it->second);
  }
  return ids;
}

namespace {

AudioCache audio_forward(const Params& p, const ModelConfig& cfg,
                         const std::vector<double>& feature) {
  if (feature.size() != cfg.feat_dim)
    throw DataError("audio feature dimension mismatch: got " + std::to_string(feature.size()) +
                    ", expected " + std::to_string(cfg.feat_dim));
  AudioCache c;
  c.x = feature;
  c.h_pre.assign(cfg.hidden_dim, 0.0);
  for (std::size_t i = 0; i < cfg.hidden_dim; ++i) {
    double acc = p.audio_b1.data[i];
    for (std::size_t j = 0; j < cfg.feat_dim; ++j) acc += p.audio_w1.at(i, j) * feature[j];
    c.h_pre[i] = acc;
  }
  c.h = c.h_pre;
  for (auto& v : c.h) v = v > 0.0 ? v : 0.0;
  c.u.assign(cfg.embed_dim, 0.0);
  for (std::size_t i = 0; i < cfg.embed_dim; ++i) {
    double acc = p.audio_b2.data[i];
    for (std::size_t j = 0; j < cfg.hidden_dim; ++j) acc += p.audio_w2.at(i, j) * c.h[j];
    c.u[i] = acc;
  }
  double n2 = 0.0;
  for (double v : c.u) n2 += v * v;
  c.norm = std::sqrt(n2);
  c.z = normalize(c.u, "audio encoder");
  return c;
}

TextCache text_forward(const Params& p, const ModelConfig& cfg,
                       const std::vector<std::size_t>& ids) {
  TextCache c;
  c.ids = ids;
  c.e.assign(cfg.embed_dim, 0.0);
  for (std::size_t id : ids)
    for (std::size_t d = 0; d < cfg.embed_dim; ++d) c.e[d] += p.tok_embed.at(id, d);
  for (auto& v : c.e) v /= static_cast<double>(ids.size());
  c.u.assign(cfg.embed_dim, 0.0);
  for (std::size_t i = 0; i < cfg.embed_dim; ++i) {
    double acc = p.text_b.data[i];
    for (std::size_t j = 0; j < cfg.embed_dim; ++j) acc += p.text_w.at(i, j) * c.e[j];
    c.u[i] = acc;
  }
  double n2 = 0.0;
  for (double v : c.u) n2 += v * v;
  c.norm = std::sqrt(n2);
  c.z = normalize(c.u, "text encoder");
  return c;
}

}  // namespace

std::vector<double> Model::encode_audio(const std::vector<double>& feature) const {
  return audio_forward(params_, cfg_, feature).z;
}

std::vector<double> Model::encode_text(const std::string& text) const {
  return text_forward(params_, cfg_, tokenize(text)).z;
}

double info_nce(const Matrix& zt, const Matrix& za, double tau) {
  Matrix dzt, dza;
  double dlog_tau;
  return info_nce_backward(zt, za, tau, dzt, dza, dlog_tau);
}

double info_nce_backward(const Matrix& zt, const Matrix& za, double tau, Matrix& dzt, Matrix& dza,
                         double& dlog_tau) {
  if (tau <= 0.0) throw NumericError("temperature must be positive");
  if (zt.rows != za.rows || zt.cols != za.cols)
    throw DataError("embedding batch shape mismatch");
  const std::size_t n = zt.rows, d = zt.cols;
  if (n == 0) throw DataError("empty batch");

  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += zt.at(i, k) * za.at(j, k);
      s.at(i, j) = dot / tau;
    }

  // dL/dS accumulates both softmax directions; row = t->a, col = a->t.
  Matrix g(n, n);
  double loss = 0.0;
  const double inv = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {  // rows
    double mx = s.at(i, 0);
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, s.at(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) denom += std::exp(s.at(i, j) - mx);
    loss += inv * (std::log(denom) + mx - s.at(i, i));
    for (std::size_t j = 0; j < n; ++j) {
      const double p = std::exp(s.at(i, j) - mx) / denom;
      g.at(i, j) += inv * (p - (i == j ? 1.0 : 0.0));
    }
  }
  for (std::size_t j = 0; j < n; ++j) {  // columns
    double mx = s.at(0, j);
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, s.at(i, j));
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) denom += std::exp(s.at(i, j) - mx);
    loss += inv * (std::log(denom) + mx - s.at(j, j));
    for (std::size_t i = 0; i < n; ++i) {
      const double p = std::exp(s.at(i, j) - mx) / denom;
      g.at(i, j) += inv * (p - (i == j ? 1.0 : 0.0));
    }
  }
  if (!std::isfinite(loss)) throw NumericError("non-finite InfoNCE loss");

  dzt = Matrix(n, d);
  dza = Matrix(n, d);
  dlog_tau = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double gij = g.at(i, j);
      dlog_tau -= gij * s.at(i, j);
      for (std::size_t k = 0; k < d; ++k) {
        dzt.at(i, k) += gij * za.at(j, k) / tau;
        dza.at(j, k) += gij * zt.at(i, k) / tau;
      }
    }
  return loss;
}

double Model::loss(const BatchPair& batch) const {
  Params scratch = Params::zeros_like(params_);
  return backward(batch, scratch);
}

double Model::backward(const BatchPair& batch, Params& grads) const {
  const std::size_t n = batch.audio.size();
  if (n == 0 || batch.texts.size() != n)
    throw DataError("batch must contain equal, nonzero audio and text counts");

  std::vector<AudioCache> ac;
  std::vector<TextCache> tc;
  ac.reserve(n);
  tc.reserve(n);
  Matrix za(n, cfg_.embed_dim), zt(n, cfg_.embed_dim);
  for (std::size_t i = 0; i < n; ++i) {
    ac.push_back(audio_forward(params_, cfg_, batch.audio[i]));
    tc.push_back(text_forward(params_, cfg_, tokenize(batch.texts[i])));
    for (std::size_t k = 0; k < cfg_.embed_dim; ++k) {
      za.at(i, k) = ac[i].z[k];
      zt.at(i, k) = tc[i].z[k];
    }
  }

  Matrix dzt, dza;
  double dlog_tau = 0.0;
  const double loss = info_nce_backward(zt, za, tau(), dzt, dza, dlog_tau);

  grads = Params::zeros_like(params_);
  grads.log_tau.data[0] = dlog_tau;

  for (std::size_t i = 0; i < n; ++i) {
    // audio branch
    {
      const AudioCache& c = ac[i];
      std::vector<double> gz(cfg_.embed_dim);
      for (std::size_t k = 0; k < cfg_.embed_dim; ++k) gz[k] = dza.at(i, k);
      std::vector<double> du = normalize_backward(gz, c.z, c.norm);
      std::vector<double> dh(cfg_.hidden_dim, 0.0);
      for (std::size_t r = 0; r < cfg_.embed_dim; ++r) {
        grads.audio_b2.data[r] += du[r];
        for (std::size_t cidx = 0; cidx < cfg_.hidden_dim; ++cidx) {
          grads.audio_w2.at(r, cidx) += du[r] * c.h[cidx];
          dh[cidx] += params_.audio_w2.at(r, cidx) * du[r];
        }
      }
      for (std::size_t r = 0; r < cfg_.hidden_dim; ++r) {
        const double dpre = c.h_pre[r] > 0.0 ? dh[r] : 0.0;
        grads.audio_b1.data[r] += dpre;
        for (std::size_t cidx = 0; cidx < cfg_.feat_dim; ++cidx)
          grads.audio_w1.at(r, cidx) += dpre * c.x[cidx];
      }
    }
    // text branch
    {
      const TextCache& c = tc[i];
      std::vector<double> gz(cfg_.embed_dim);
      for (std::size_t k = 0; k < cfg_.embed_dim; ++k) gz[k] = dzt.at(i, k);
      std::vector<double> du = normalize_backward(gz, c.z, c.norm);
      std::vector<double> de(cfg_.embed_dim, 0.0);
      for (std::size_t r = 0; r < cfg_.embed_dim; ++r) {
        grads.text_b.data[r] += du[r];
        for (std::size_t cidx = 0; cidx < cfg_.embed_dim; ++cidx) {
          grads.text_w.at(r, cidx) += du[r] * c.e[cidx];
          de[cidx] += params_.text_w.at(r, cidx) * du[r];
        }
      }
      const double scale = 1.0 / static_cast<double>(c.ids.size());
      for (std::size_t id : c.ids)
        for (std::size_t dcol = 0; dcol < cfg_.embed_dim; ++dcol)
          grads.tok_embed.at(id, dcol) += de[dcol] * scale;
    }
  }

  for (const Tensor* t : grads.tensors())
    for (double v : t->data)
      if (!std::isfinite(v)) throw NumericError("non-finite gradient in " + t->name);
  return loss;
}

std::vector<std::string> build_vocab_tokens(const std::vector<std::string>& texts) {
  std::set<std::string> toks;
  for (const auto& text : texts)
    for (const auto& t : split_ws(lowercase(text))) toks.insert(t);
  return {toks.begin(), toks.end()};
}

std::string checkpoint_to_json(const Model& model,
                               const std::map<std::string, std::string>& extra) {
  json j;
  j["version"] = 1;
  j["model"]["feat_dim"] = model.config().feat_dim;
  j["model"]["hidden_dim"] = model.config().hidden_dim;
  j["model"]["embed_dim"] = model.config().embed_dim;
  j["model"]["vocab"] = model.config().vocab;
  json params = json::object();
  for (const Tensor* t : model.params().tensors()) {
    params[t->name] = {{"rows", t->rows}, {"cols", t->cols}, {"data", t->data}};
  }
  j["params"] = std::move(params);
  json ex = json::object();
  for (const auto& [k, v] : extra) ex[k] = json::parse(v);
  j["extra"] = std::move(ex);
  return j.dump();
}

Model checkpoint_from_json(const std::string& json_text,
                           std::map<std::string, std::string>* extra) {
  json j = json::parse(json_text);
  if (j.at("version").get<int>() != 1) throw DataError("unsupported checkpoint version");
  ModelConfig cfg;
  cfg.feat_dim = j.at("model").at("feat_dim").get<std::size_t>();
  cfg.hidden_dim = j.at("model").at("hidden_dim").get<std::size_t>();
  cfg.embed_dim = j.at("model").at("embed_dim").get<std::size_t>();
  cfg.vocab = j.at("model").at("vocab").get<std::vector<std::string>>();
  Params p;
  auto load = [&](Tensor& t, const char* name) {
    const json& tj = j.at("params").at(name);
    t.name = name;
    t.rows = tj.at("rows").get<std::size_t>();
    t.cols = tj.at("cols").get<std::size_t>();
    t.data = tj.at("data").get<std::vector<double>>();
    if (t.data.size() != t.rows * t.cols) throw DataError(std::string("bad tensor shape: ") + name);
  };
  load(p.audio_w1, "audio_w1");
  load(p.audio_b1, "audio_b1");
  load(p.audio_w2, "audio_w2");
  load(p.audio_b2, "audio_b2");
  load(p.tok_embed, "tok_embed");
  load(p.text_w, "text_w");
  load(p.text_b, "text_b");
  load(p.log_tau, "log_tau");
  if (extra) {
    extra->clear();
    for (const auto& [k, v] : j.at("extra").items()) (*extra)[k] = v.dump();
  }
  return Model(std::move(cfg), std::move(p));
}

}  // namespace ttmr
