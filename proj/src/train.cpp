#include "ttmr/train.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "ttmr/util.hpp"

namespace ttmr {

using nlohmann::json;

void TrainConfig::validate() const {
  if (warmup_steps == 0 || warmup_steps >= total_steps)
    throw UsageError("require 0 < warmup_steps < total_steps");
  if (batch_size == 0) throw UsageError("batch_size must be >= 1");
  if (base_lr <= 0.0) throw UsageError("base_lr must be positive");
  if (init_tau <= 0.0) throw UsageError("init_tau must be positive");
}

TrainConfig train_config_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  TrainConfig c;
  c.base_lr = j.value("base_lr", c.base_lr);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
  c.total_steps = j.value("total_steps", c.total_steps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.seed = j.value("seed", c.seed);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.init_tau = j.value("init_tau", c.init_tau);
  c.validate();
  return c;
}

std::string train_config_to_json(const TrainConfig& c) {
  json j;
  j["base_lr"] = c.base_lr;
  j["warmup_steps"] = c.warmup_steps;
  j["total_steps"] = c.total_steps;
  j["batch_size"] = c.batch_size;
  j["weight_decay"] = c.weight_decay;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["eps"] = c.eps;
  j["seed"] = c.seed;
  j["checkpoint_every"] = c.checkpoint_every;
  j["hidden_dim"] = c.hidden_dim;
  j["init_tau"] = c.init_tau;
  return j.dump();
}

double lr_at_step(const TrainConfig& cfg, std::size_t step) {
  if (step > cfg.total_steps) throw UsageError("step beyond total_steps");
  if (step <= cfg.warmup_steps)
    return cfg.base_lr * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
  const double progress = static_cast<double>(step - cfg.warmup_steps) /
                          static_cast<double>(cfg.total_steps - cfg.warmup_steps);
  return cfg.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

OptimizerState OptimizerState::zeros_like(const Params& params) {
  OptimizerState s;
  for (const Tensor* t : params.tensors()) {
    s.m.emplace_back(t->name, t->rows, t->cols);
    s.v.emplace_back(t->name, t->rows, t->cols);
  }
  return s;
}

void adamw_step(OptimizerState& state, Params& params, const Params& grads, double lr,
                const TrainConfig& cfg) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  auto ps = params.tensors();
  auto gs = grads.tensors();
  for (std::size_t t = 0; t < ps.size(); ++t) {
    Tensor& p = *ps[t];
    const Tensor& g = *gs[t];
    Tensor& m = state.m[t];
    Tensor& v = state.v[t];
    if (p.data.size() != g.data.size()) throw DataError("gradient shape mismatch: " + p.name);
    const bool decay = cfg.weight_decay > 0.0 && p.name != "log_tau";
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      if (!std::isfinite(g.data[i])) throw NumericError("non-finite gradient in " + p.name);
      if (decay) p.data[i] -= lr * cfg.weight_decay * p.data[i];
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      p.data[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

FeatureTable load_features(const std::string& features_path) {
  std::ifstream in(features_path);
  if (!in) throw DataError("cannot open features file: " + features_path);
  FeatureTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("malformed feature record at line " + std::to_string(line_no) + ": " +
                      e.what());
    }
    t[j.at("track_id").get<std::string>()] = j.at("feature").get<std::vector<double>>();
  }
  return t;
}

void save_features(const FeatureTable& features, const std::string& features_path) {
  std::ostringstream out;
  for (const auto& [id, vec] : features) {
    json j;
    j["track_id"] = id;
    j["feature"] = vec;
    out << j.dump() << "\n";
  }
  write_text_file(features_path, out.str());
}

Trainer::Trainer(TrainConfig cfg, TrainInputs inputs)
    : cfg_(cfg), inputs_(std::move(inputs)), opt_(), rng_(cfg.seed) {
  cfg_.validate();
  if (!inputs_.corpus || !inputs_.graph || !inputs_.artists || !inputs_.features)
    throw UsageError("trainer requires corpus, graph, artists, and features");
  if (!inputs_.caption_provider)
    inputs_.caption_provider = [](const std::vector<std::string>& tags) {
      return default_caption(tags);
    };
  if (inputs_.features->empty()) throw DataError("empty feature table");

  // Vocab: every token any text facet can produce, in deterministic order.
  std::vector<std::string> texts;
  for (const auto& [id, track] : inputs_.corpus->tracks) {
    for (const auto& c : track.captions) texts.push_back(c);
    if (!track.tags.empty()) texts.push_back(inputs_.caption_provider(track.tags));
    if (track.title || track.artist_name)
      texts.push_back(render_metadata_text(track.title, track.artist_name, track.album));
  }
  for (const auto& [id, name] : *inputs_.artists)
    texts.push_back(render_similarity_text(name));
  texts.push_back("similar music track with by from");  // query template words

  ModelConfig mc;
  mc.feat_dim = inputs_.features->begin()->second.size();
  mc.hidden_dim = cfg_.hidden_dim;
  mc.embed_dim = 128;
  mc.vocab = build_vocab_tokens(texts);

  Rng init_rng(cfg_.seed);
  model_ = Model::init(mc, init_rng);
  model_->params().log_tau.data[0] = std::log(cfg_.init_tau);
  opt_ = OptimizerState::zeros_like(model_->params());
}

Trainer::Trainer(TrainConfig cfg, TrainInputs inputs, Model model, OptimizerState opt, Rng rng)
    : cfg_(cfg), inputs_(std::move(inputs)), model_(std::move(model)), opt_(std::move(opt)),
      rng_(rng) {
  if (!inputs_.caption_provider)
    inputs_.caption_provider = [](const std::vector<std::string>& tags) {
      return default_caption(tags);
    };
}

StepMetrics Trainer::step_once() {
  const std::size_t step = opt_.step + 1;
  auto ids = sample_batch_sources(*inputs_.corpus, cfg_.batch_size, rng_);

  BatchPair batch;
  batch.audio.reserve(ids.size());
  batch.texts.reserve(ids.size());
  for (const auto& id : ids) {
    const TrackRecord& track = inputs_.corpus->track(id);
    auto fit = inputs_.features->find(id);
    if (fit == inputs_.features->end())
      throw DataError("missing features for track " + id + " at step " + std::to_string(step));
    batch.audio.push_back(fit->second);
    TextCandidateSet set = build_candidates(track, inputs_.corpus->spec_for(track.dataset_id),
                                            *inputs_.graph, *inputs_.artists,
                                            inputs_.caption_provider, rng_);
    batch.texts.push_back(dropout_concat(set, rng_));
  }

  Params grads;
  double loss;
  try {
    loss = model_->backward(batch, grads);
  } catch (const std::exception& e) {
    throw NumericError("step " + std::to_string(step) + ": " + e.what());
  }
  const double lr = lr_at_step(cfg_, step);
  adamw_step(opt_, model_->params(), grads, lr, cfg_);

  StepMetrics m;
  m.step = step;
  m.loss = loss;
  m.lr = lr;
  m.tau = model_->tau();
  return m;
}

TrainResult Trainer::run(const std::function<void(const StepMetrics&)>& on_step) {
  std::vector<StepMetrics> all;
  while (opt_.step < cfg_.total_steps) {
    StepMetrics m = step_once();
    if (on_step) on_step(m);
    all.push_back(m);
  }
  return TrainResult{*model_, opt_, std::move(all)};
}

void Trainer::save_checkpoint(const std::string& path) const {
  json opt;
  opt["step"] = opt_.step;
  json moments_m = json::object(), moments_v = json::object();
  for (const auto& t : opt_.m) moments_m[t.name] = t.data;
  for (const auto& t : opt_.v) moments_v[t.name] = t.data;
  opt["m"] = std::move(moments_m);
  opt["v"] = std::move(moments_v);

  std::map<std::string, std::string> extra;
  extra["optimizer"] = opt.dump();
  extra["rng_state"] = json(rng_.save_state()).dump();
  extra["train_config"] = train_config_to_json(cfg_);
  extra["config_hash"] = json(to_hex(fnv1a64(train_config_to_json(cfg_)))).dump();
  write_text_file(path, checkpoint_to_json(*model_, extra));
}

Trainer Trainer::resume(const std::string& checkpoint_path, TrainInputs inputs) {
  std::map<std::string, std::string> extra;
  Model model = checkpoint_from_json(read_text_file(checkpoint_path), &extra);
  TrainConfig cfg = train_config_from_json(extra.at("train_config"));
  OptimizerState opt = OptimizerState::zeros_like(model.params());
  json oj = json::parse(extra.at("optimizer"));
  opt.step = oj.at("step").get<std::size_t>();
  for (auto& t : opt.m) t.data = oj.at("m").at(t.name).get<std::vector<double>>();
  for (auto& t : opt.v) t.data = oj.at("v").at(t.name).get<std::vector<double>>();
  Rng rng(cfg.seed);
  rng.load_state(json::parse(extra.at("rng_state")).get<std::string>());
  return Trainer(cfg, std::move(inputs), std::move(model), std::move(opt), rng);
}

}  // namespace ttmr
