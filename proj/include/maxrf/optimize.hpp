#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maxrf/dataset.hpp"
#include "maxrf/network.hpp"
#include "maxrf/transform.hpp"

namespace maxrf {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 256;
  double base_lr = 1e-4;
  int warmup_epochs = 10;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  double mask_ratio = 0.5;

  void validate() const;
};

// Linear warmup to base_lr, then cosine annealing to 0.
double lr_at(long step, long total_steps, long warmup_steps, double base_lr);

// First/second moments per tensor, in visit_tensors order.
struct OptimizerState {
  std::vector<Eigen::VectorXd> m;
  std::vector<Eigen::VectorXd> v;
  long t = 0;
};

OptimizerState make_optimizer_state(const ModelParameters& params);

struct AdamWSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Decoupled weight decay + bias-corrected Adam. Tensors whose group is not
// in `trainable` are left untouched (used to freeze the decoder while
// fine-tuning). Empty `trainable` trains everything.
void adamw_step(ModelParameters& params, const ModelGradients& grads,
                OptimizerState& state, double lr, const AdamWSettings& settings,
                const std::vector<ParamGroup>& trainable = {});

struct MetricRow {
  int epoch = 0;
  std::string split;
  double loss = 0.0;
  double lr = 0.0;
};

void save_metrics_csv(const std::vector<MetricRow>& rows, const std::string& path);

struct Checkpoint {
  int format_version = 1;
  ModelConfig model;
  TrainConfig train;
  TransformKind transform_kind = TransformKind::InstanceNorm;
  std::optional<ChannelStats> channel_stats;
  std::optional<TargetNorm> target_norm;
  std::string task;  // empty for pretrain checkpoints
  int epoch = 0;
  std::uint64_t seed = 0;
  std::vector<MetricRow> metrics;
  ModelParameters params;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct PretrainResult {
  Checkpoint final;
  Checkpoint best;  // lowest validation loss
  std::vector<MetricRow> metrics;
};

PretrainResult pretrain(const std::vector<Spectrum>& train,
                        const std::vector<Spectrum>& val, const ModelConfig& mcfg,
                        const TrainConfig& tcfg,
                        TransformKind kind = TransformKind::InstanceNorm);

struct FinetuneResult {
  Checkpoint final;
  Checkpoint best;
  std::vector<MetricRow> metrics;
};

// Starts from a pretrain checkpoint when given, otherwise from fresh weights
// (the train-from-scratch arm). Optimizes encoder + head; the decoder stays
// frozen. subsample_n < 0 uses the whole training set.
FinetuneResult finetune(const Checkpoint* pretrained,
                        const std::vector<LabeledSpectrum>& train_pairs,
                        const std::vector<LabeledSpectrum>& val_pairs, Task task,
                        const ModelConfig& mcfg, const TrainConfig& tcfg,
                        long subsample_n = -1,
                        TransformKind kind = TransformKind::InstanceNorm,
                        const ChannelStats* stats = nullptr);

// Deterministic subsample used by finetune; exposed for tests.
std::vector<LabeledSpectrum> subsample_pairs(
    const std::vector<LabeledSpectrum>& pairs, long n, std::uint64_t seed);

}  // namespace maxrf
