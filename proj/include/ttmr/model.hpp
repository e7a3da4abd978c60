#pragma once

#include <map>
#include <string>
#include <vector>

#include "ttmr/dsp.hpp"
#include "ttmr/rng.hpp"

namespace ttmr {

// Named parameter tensor. Vectors are rows x 1.
struct Tensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::string n, std::size_t r, std::size_t c)
      : name(std::move(n)), rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct ModelConfig {
  std::size_t feat_dim = 128;    // pooled log-mel dimensionality
  std::size_t hidden_dim = 256;  // audio encoder hidden width
  std::size_t embed_dim = 128;   // joint embedding dimensionality
  std::vector<std::string> vocab;  // sorted unique tokens; id 0 is reserved for UNK
};

// All trainable parameters. tau is carried as log_tau so it stays
// positive under unconstrained updates; tau() = exp(log_tau).
struct Params {
  Tensor audio_w1, audio_b1, audio_w2, audio_b2;
  Tensor tok_embed, text_w, text_b;
  Tensor log_tau;  // 1x1

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  static Params zeros_like(const Params& other);
};

struct BatchPair {
  std::vector<std::vector<double>> audio;  // N x feat_dim
  std::vector<std::string> texts;          // N, positionally paired
};

class Model {
public:
  Model(ModelConfig cfg, Params params);

  // Random init: weights ~ N(0, 1/sqrt(fan_in)), biases zero, tau = 0.1.
  static Model init(ModelConfig cfg, Rng& rng);

  const ModelConfig& config() const { return cfg_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }
  double tau() const;

  // Unit-norm joint embeddings.
  std::vector<double> encode_audio(const std::vector<double>& feature) const;
  std::vector<double> encode_text(const std::string& text) const;

  std::vector<std::size_t> tokenize(const std::string& text) const;

  // Symmetric InfoNCE loss and exact gradients for every parameter
  // including log_tau.
  double loss(const BatchPair& batch) const;
  double backward(const BatchPair& batch, Params& grads) const;

private:
  ModelConfig cfg_;
  Params params_;
  std::map<std::string, std::size_t> token_ids_;

  void rebuild_token_index();
};

// Standalone symmetric InfoNCE over precomputed unit-norm embeddings,
// with max-subtraction log-sum-exp stabilization. zt/za are N x d.
double info_nce(const Matrix& zt, const Matrix& za, double tau);

// Optionally fills dzt/dza (N x d) and *dlog_tau with gradients.
double info_nce_backward(const Matrix& zt, const Matrix& za, double tau, Matrix& dzt, Matrix& dza,
                         double& dlog_tau);

std::vector<std::string> build_vocab_tokens(const std::vector<std::string>& texts);

// Checkpoint: model config, vocab, all weights. extra carries
// caller-owned sections (optimizer state, rng, train config).
std::string checkpoint_to_json(const Model& model, const std::map<std::string, std::string>& extra);
Model checkpoint_from_json(const std::string& json_text,
                           std::map<std::string, std::string>* extra = nullptr);

}  // namespace ttmr
