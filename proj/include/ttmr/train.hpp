#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ttmr/corpus.hpp"
#include "ttmr/kgraph.hpp"
#include "ttmr/model.hpp"
#include "ttmr/textgen.hpp"

namespace ttmr {

struct TrainConfig {
  // Paper-scale values; the demo config shrinks them.
  double base_lr = 5e-5;
  std::size_t warmup_steps = 5000;
  std::size_t total_steps = 32768;
  std::size_t batch_size = 768;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;  // 0 = only at the end
  std::size_t hidden_dim = 256;
  double init_tau = 0.1;

  void validate() const;
};

TrainConfig train_config_from_json(const std::string& json_text);
std::string train_config_to_json(const TrainConfig& cfg);

// Linear warmup to base_lr, then cosine decay to zero measured from the
// end of warmup.
double lr_at_step(const TrainConfig& cfg, std::size_t step);

struct OptimizerState {
  std::vector<Tensor> m;  // first moments, same shapes/order as Params::tensors()
  std::vector<Tensor> v;  // second moments
  std::size_t step = 0;

  static OptimizerState zeros_like(const Params& params);
};

// Decoupled weight decay (applied before the Adam update), bias-corrected
// moments. log_tau is exempt from decay.
void adamw_step(OptimizerState& state, Params& params, const Params& grads, double lr,
                const TrainConfig& cfg);

using FeatureTable = std::map<std::string, std::vector<double>>;

FeatureTable load_features(const std::string& features_path);
void save_features(const FeatureTable& features, const std::string& features_path);

struct StepMetrics {
  std::size_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
  double tau = 0.0;
};

struct TrainInputs {
  const CorpusMixture* corpus = nullptr;
  const SimilarityGraph* graph = nullptr;
  const ArtistTable* artists = nullptr;
  const FeatureTable* features = nullptr;
  CaptionProvider caption_provider;  // defaults to the tag-join provider
};

struct TrainResult {
  Model model;
  OptimizerState opt;
  std::vector<StepMetrics> metrics;
};

class Trainer {
public:
  Trainer(TrainConfig cfg, TrainInputs inputs);

  // Runs from the current step to total_steps. on_step may be empty.
  TrainResult run(const std::function<void(const StepMetrics&)>& on_step = {});

  // Resume from a checkpoint produced by save_checkpoint.
  static Trainer resume(const std::string& checkpoint_path, TrainInputs inputs);

  void save_checkpoint(const std::string& path) const;

  const Model& model() const { return *model_; }
  std::size_t current_step() const { return opt_.step; }

private:
  Trainer(TrainConfig cfg, TrainInputs inputs, Model model, OptimizerState opt, Rng rng);

  TrainConfig cfg_;
  TrainInputs inputs_;
  std::optional<Model> model_;
  OptimizerState opt_;
  Rng rng_;

  StepMetrics step_once();
};

}  // namespace ttmr
