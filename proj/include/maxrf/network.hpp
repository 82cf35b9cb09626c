#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "maxrf/common.hpp"
#include "maxrf/patch_mask.hpp"

namespace maxrf {

struct ModelConfig {
  int n_channels = 2048;
  int patch_size = 16;
  int embed_dim = 1024;
  int encoder_depth = 12;
  int encoder_heads = 16;
  int decoder_dim = 512;
  int decoder_depth = 8;
  int decoder_heads = 16;
  double mlp_ratio = 4.0;

  int n_patches() const { return n_channels / patch_size; }
  int mlp_hidden(int dim) const { return static_cast<int>(dim * mlp_ratio); }
  PatchGrid grid() const { return PatchGrid{n_channels, patch_size}; }
  void validate() const;
};

struct LayerNormParams {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
};

// y = x W^T + b, applied row-wise to a (tokens, in) matrix; W is (out, in).
struct LinearParams {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

struct BlockParams {
  LayerNormParams ln1;
  LinearParams qkv;   // (3*dim, dim)
  LinearParams proj;  // (dim, dim)
  LayerNormParams ln2;
  LinearParams fc1;   // (hidden, dim)
  LinearParams fc2;   // (dim, hidden)
};

struct ModelParameters {
  LinearParams patch_embed;  // (embed_dim, patch_size)
  Eigen::VectorXd cls_token;   // embed_dim
  Eigen::VectorXd mask_token;  // decoder_dim
  std::vector<BlockParams> encoder_blocks;
  LayerNormParams encoder_norm;
  LinearParams enc_to_dec;  // (decoder_dim, embed_dim)
  std::vector<BlockParams> decoder_blocks;
  LayerNormParams decoder_norm;
  LinearParams dec_out;  // (patch_size, decoder_dim)
  LinearParams head;     // (1, embed_dim)
};

using ModelGradients = ModelParameters;

enum class ParamGroup { Encoder, Decoder, Head };

// Enumerates every tensor in a fixed order shared by the optimizer and the
// checkpoint format. f(name, group, data pointer, element count).
using TensorVisitor =
    std::function<void(const std::string&, ParamGroup, double*, std::size_t)>;
void visit_tensors(ModelParameters& params, const TensorVisitor& f);
void visit_tensors(const ModelParameters& params,
                   const std::function<void(const std::string&, ParamGroup,
                                            const double*, std::size_t)>& f);

std::size_t parameter_count(const ModelParameters& params);
ModelParameters init_parameters(const ModelConfig& cfg, Rng& rng);
ModelParameters zero_parameters(const ModelConfig& cfg);

// ---- forward caches ------------------------------------------------------

struct LayerNormCache {
  Eigen::MatrixXd xhat;
  Eigen::VectorXd rstd;
};

struct AttentionCache {
  Eigen::MatrixXd input;             // block-normed input
  Eigen::MatrixXd q, k, v;           // (tokens, dim) each
  std::vector<Eigen::MatrixXd> probs;  // per head (tokens, tokens)
  Eigen::MatrixXd concat;            // pre-projection head outputs
};

struct BlockCache {
  Eigen::MatrixXd x_in;
  LayerNormCache ln1;
  AttentionCache attn;
  Eigen::MatrixXd resid1;  // after attention residual
  LayerNormCache ln2;
  Eigen::MatrixXd ln2_out;
  Eigen::MatrixXd fc1_pre;  // pre-GELU
  Eigen::MatrixXd act;      // post-GELU
};

struct StackCache {
  std::vector<BlockCache> blocks;
  Eigen::MatrixXd final_in;
  LayerNormCache final_ln;
  Eigen::MatrixXd output;
};

enum class EncoderMode { Pretrain, Finetune };

// ---- core forward/backward ----------------------------------------------

// tokens: embedded patches with positional embeddings already added.
// Pretrain mode expects kept patches only; finetune mode expects cls + all.
Eigen::MatrixXd encoder_forward(const Eigen::MatrixXd& tokens,
                                const ModelParameters& params,
                                const ModelConfig& cfg, StackCache* cache);

// Grad of encoder output -> grads of encoder params and of the input tokens.
Eigen::MatrixXd encoder_backward(const Eigen::MatrixXd& d_output,
                                 const ModelParameters& params,
                                 const ModelConfig& cfg, const StackCache& cache,
                                 ModelGradients& grads);

struct DecoderCache {
  Eigen::MatrixXd latents_in;
  Eigen::MatrixXd tokens;  // decoder input sequence after mask-token fill + pos
  StackCache stack;
  Eigen::MatrixXd reconstruction;  // (n_patches, patch_size)
};

// latents: encoder output for kept patches (pretrain mode).
Eigen::MatrixXd decoder_forward(const Eigen::MatrixXd& latents,
                                const MaskPlan& plan,
                                const ModelParameters& params,
                                const ModelConfig& cfg, DecoderCache* cache);

Eigen::MatrixXd decoder_backward(const Eigen::MatrixXd& d_reconstruction,
                                 const MaskPlan& plan,
                                 const ModelParameters& params,
                                 const ModelConfig& cfg, const DecoderCache& cache,
                                 ModelGradients& grads);

// ---- losses --------------------------------------------------------------

// Mean over masked patches' channels of squared error.
double masked_mse_loss(const Eigen::MatrixXd& reconstruction,
                       const Eigen::MatrixXd& target, const MaskPlan& plan);
Eigen::MatrixXd masked_mse_loss_grad(const Eigen::MatrixXd& reconstruction,
                                     const Eigen::MatrixXd& target,
                                     const MaskPlan& plan);

double regression_loss(std::span<const double> pred, std::span<const double> target);
std::vector<double> regression_loss_grad(std::span<const double> pred,
                                         std::span<const double> target);

// ---- end-to-end passes ---------------------------------------------------

struct PretrainPass {
  Eigen::MatrixXd patches;  // transformed input, (n_patches, patch_size)
  MaskPlan plan;
  StackCache encoder;
  DecoderCache decoder;
  double loss = 0.0;
};

// transformed spectrum -> masked reconstruction loss, with caches kept for
// the backward pass.
PretrainPass pretrain_forward(std::span<const double> x_transformed,
                              const MaskPlan& plan, const ModelParameters& params,
                              const ModelConfig& cfg);
void pretrain_backward(const PretrainPass& pass, const ModelParameters& params,
                       const ModelConfig& cfg, ModelGradients& grads);

struct RegressionPass {
  Eigen::MatrixXd patches;
  StackCache encoder;
  double prediction = 0.0;
};

// Finetune pipeline: patchify -> embed -> +pos -> prepend cls -> encoder ->
// head(cls latent). Prediction is in normalized target units.
RegressionPass regression_forward(std::span<const double> x_transformed,
                                  const ModelParameters& params,
                                  const ModelConfig& cfg);

// d_pred is dLoss/dPrediction. When input_grad is non-null it receives
// dLoss/dx over the transformed input channels.
void regression_backward(const RegressionPass& pass, double d_pred,
                         const ModelParameters& params, const ModelConfig& cfg,
                         ModelGradients& grads,
                         Eigen::VectorXd* input_grad = nullptr);

}  // namespace maxrf
