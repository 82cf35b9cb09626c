#include "maxrf/network.hpp"

#include <cmath>

namespace maxrf {

namespace {

constexpr double kLnEps = 1e-6;

double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
  return cdf + x * pdf;
}

Eigen::MatrixXd linear_forward(const Eigen::MatrixXd& x, const LinearParams& p) {
  Eigen::MatrixXd y = x * p.weight.transpose();
  y.rowwise() += p.bias.transpose();
  return y;
}

// Returns dX; accumulates parameter grads.
Eigen::MatrixXd linear_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& x,
                                const LinearParams& p, LinearParams& grad) {
  grad.weight.noalias() += dy.transpose() * x;
  grad.bias.noalias() += dy.colwise().sum().transpose();
  return dy * p.weight;
}

Eigen::MatrixXd layer_norm_forward(const Eigen::MatrixXd& x,
                                   const LayerNormParams& p, LayerNormCache& cache) {
  const int dim = static_cast<int>(x.cols());
  cache.xhat.resize(x.rows(), x.cols());
  cache.rstd.resize(x.rows());
  Eigen::MatrixXd y(x.rows(), x.cols());
  for (int r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().sum() / dim;
    const double rstd = 1.0 / std::sqrt(var + kLnEps);
    cache.rstd(r) = rstd;
    cache.xhat.row(r) = (x.row(r).array() - mean) * rstd;
    y.row(r) = cache.xhat.row(r).array() * p.gamma.transpose().array() +
               p.beta.transpose().array();
  }
  return y;
}

Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dy,
                                    const LayerNormParams& p,
                                    const LayerNormCache& cache,
                                    LayerNormParams& grad) {
  const int dim = static_cast<int>(dy.cols());
  grad.gamma.noalias() += (dy.array() * cache.xhat.array()).colwise().sum().matrix().transpose();
  grad.beta.noalias() += dy.colwise().sum().transpose();
  Eigen::MatrixXd dx(dy.rows(), dy.cols());
  for (int r = 0; r < dy.rows(); ++r) {
    const Eigen::ArrayXd dxhat = dy.row(r).transpose().array() * p.gamma.array();
    const Eigen::ArrayXd xhat = cache.xhat.row(r).transpose().array();
    const double m1 = dxhat.mean();
    const double m2 = (dxhat * xhat).mean();
    dx.row(r) = (cache.rstd(r) * (dxhat - m1 - xhat * m2)).matrix().transpose();
  }
  return dx;
}

Eigen::MatrixXd attention_forward(const Eigen::MatrixXd& x, const BlockParams& p,
                                  int n_heads, AttentionCache& cache) {
  const int dim = static_cast<int>(x.cols());
  const int hd = dim / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  cache.input = x;
  const Eigen::MatrixXd qkv = linear_forward(x, p.qkv);
  cache.q = qkv.leftCols(dim);
  cache.k = qkv.middleCols(dim, dim);
  cache.v = qkv.rightCols(dim);
  cache.probs.resize(n_heads);
  cache.concat.resize(x.rows(), dim);

  for (int h = 0; h < n_heads; ++h) {
    const auto q = cache.q.middleCols(h * hd, hd);
    const auto k = cache.k.middleCols(h * hd, hd);
    const auto v = cache.v.middleCols(h * hd, hd);
    Eigen::MatrixXd scores = q * k.transpose() * scale;
    // row-wise softmax, max-shifted
    for (int r = 0; r < scores.rows(); ++r) {
      const double mx = scores.row(r).maxCoeff();
      scores.row(r) = (scores.row(r).array() - mx).exp();
      scores.row(r) /= scores.row(r).sum();
    }
    cache.probs[h] = std::move(scores);
    cache.concat.middleCols(h * hd, hd).noalias() = cache.probs[h] * v;
  }
  return linear_forward(cache.concat, p.proj);
}

Eigen::MatrixXd attention_backward(const Eigen::MatrixXd& d_out,
                                   const BlockParams& p, int n_heads,
                                   const AttentionCache& cache, BlockParams& grad) {
  const int dim = static_cast<int>(d_out.cols());
  const int hd = dim / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  const Eigen::MatrixXd d_concat = linear_backward(d_out, cache.concat, p.proj, grad.proj);

  Eigen::MatrixXd d_qkv(d_out.rows(), 3 * dim);
  for (int h = 0; h < n_heads; ++h) {
    const auto q = cache.q.middleCols(h * hd, hd);
    const auto k = cache.k.middleCols(h * hd, hd);
    const auto v = cache.v.middleCols(h * hd, hd);
    const auto d_oh = d_concat.middleCols(h * hd, hd);
    const Eigen::MatrixXd& probs = cache.probs[h];

    Eigen::MatrixXd d_probs = d_oh * v.transpose();
    Eigen::MatrixXd d_scores(probs.rows(), probs.cols());
    for (int r = 0; r < probs.rows(); ++r) {
      const double dot = d_probs.row(r).dot(probs.row(r));
      d_scores.row(r) =
          (probs.row(r).array() * (d_probs.row(r).array() - dot)).matrix();
    }
    d_qkv.middleCols(h * hd, hd).noalias() = d_scores * k * scale;
    d_qkv.middleCols(dim + h * hd, hd).noalias() = d_scores.transpose() * q * scale;
    d_qkv.middleCols(2 * dim + h * hd, hd).noalias() = probs.transpose() * d_oh;
  }
  return linear_backward(d_qkv, cache.input, p.qkv, grad.qkv);
}

Eigen::MatrixXd block_forward(const Eigen::MatrixXd& x, const BlockParams& p,
                              int n_heads, BlockCache& cache) {
  cache.x_in = x;
  const Eigen::MatrixXd normed = layer_norm_forward(x, p.ln1, cache.ln1);
  const Eigen::MatrixXd attn_out = attention_forward(normed, p, n_heads, cache.attn);
  cache.resid1 = x + attn_out;

  cache.ln2_out = layer_norm_forward(cache.resid1, p.ln2, cache.ln2);
  cache.fc1_pre = linear_forward(cache.ln2_out, p.fc1);
  cache.act = cache.fc1_pre.unaryExpr([](double v) { return gelu(v); });
  return cache.resid1 + linear_forward(cache.act, p.fc2);
}

Eigen::MatrixXd block_backward(const Eigen::MatrixXd& dy, const BlockParams& p,
                               int n_heads, const BlockCache& cache,
                               BlockParams& grad) {
  // MLP branch
  const Eigen::MatrixXd d_act = linear_backward(dy, cache.act, p.fc2, grad.fc2);
  const Eigen::MatrixXd d_fc1_pre =
      d_act.array() * cache.fc1_pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
  const Eigen::MatrixXd d_ln2_out =
      linear_backward(d_fc1_pre, cache.ln2_out, p.fc1, grad.fc1);
  Eigen::MatrixXd d_resid1 = dy + layer_norm_backward(d_ln2_out, p.ln2, cache.ln2, grad.ln2);

  // attention branch
  const Eigen::MatrixXd d_normed =
      attention_backward(d_resid1, p, n_heads, cache.attn, grad);
  return d_resid1 + layer_norm_backward(d_normed, p.ln1, cache.ln1, grad.ln1);
}

Eigen::MatrixXd stack_forward(const Eigen::MatrixXd& tokens,
                              const std::vector<BlockParams>& blocks,
                              const LayerNormParams& final_norm, int n_heads,
                              StackCache& cache) {
  cache.blocks.resize(blocks.size());
  Eigen::MatrixXd x = tokens;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    x = block_forward(x, blocks[i], n_heads, cache.blocks[i]);
    if (!x.allFinite()) {
      throw NumericError("non-finite activation after transformer block " +
                         std::to_string(i));
    }
  }
  cache.final_in = x;
  cache.output = layer_norm_forward(x, final_norm, cache.final_ln);
  return cache.output;
}

Eigen::MatrixXd stack_backward(const Eigen::MatrixXd& d_output,
                               const std::vector<BlockParams>& blocks,
                               const LayerNormParams& final_norm,
                               std::vector<BlockParams>& block_grads,
                               LayerNormParams& final_grad, int n_heads,
                               const StackCache& cache) {
  Eigen::MatrixXd dx =
      layer_norm_backward(d_output, final_norm, cache.final_ln, final_grad);
  for (std::size_t i = blocks.size(); i-- > 0;) {
    dx = block_backward(dx, blocks[i], n_heads, cache.blocks[i], block_grads[i]);
  }
  return dx;
}

LinearParams zero_linear(int out, int in) {
  return {Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)};
}

LayerNormParams zero_norm(int dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim)};
}

BlockParams zero_block(int dim, int hidden) {
  BlockParams b;
  b.ln1 = zero_norm(dim);
  b.qkv = zero_linear(3 * dim, dim);
  b.proj = zero_linear(dim, dim);
  b.ln2 = zero_norm(dim);
  b.fc1 = zero_linear(hidden, dim);
  b.fc2 = zero_linear(dim, hidden);
  return b;
}

void fill_trunc_normal(Eigen::MatrixXd& m, Rng& rng, double stddev) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.next_trunc_normal(stddev);
}

void fill_trunc_normal(Eigen::VectorXd& v, Rng& rng, double stddev) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.next_trunc_normal(stddev);
}

void init_block(BlockParams& b, Rng& rng) {
  b.ln1.gamma.setOnes();
  b.ln2.gamma.setOnes();
  fill_trunc_normal(b.qkv.weight, rng, 0.02);
  fill_trunc_normal(b.proj.weight, rng, 0.02);
  fill_trunc_normal(b.fc1.weight, rng, 0.02);
  fill_trunc_normal(b.fc2.weight, rng, 0.02);
}

}  // namespace

void ModelConfig::validate() const {
  if (n_channels <= 0 || patch_size <= 0 || embed_dim <= 0 || encoder_depth < 0 ||
      encoder_heads <= 0 || decoder_dim <= 0 || decoder_depth < 0 ||
      decoder_heads <= 0 || mlp_ratio <= 0.0) {
    throw DataError("ModelConfig: dimensions must be positive");
  }
  if (n_channels % patch_size != 0) {
    throw DataError("ModelConfig: n_channels must be divisible by patch_size");
  }
  if (embed_dim % encoder_heads != 0) {
    throw DataError("ModelConfig: embed_dim must be divisible by encoder_heads");
  }
  if (decoder_dim % decoder_heads != 0) {
    throw DataError("ModelConfig: decoder_dim must be divisible by decoder_heads");
  }
  if (embed_dim % 2 != 0 || decoder_dim % 2 != 0) {
    throw DataError("ModelConfig: embedding dims must be even for sin-cos positions");
  }
}

ModelParameters zero_parameters(const ModelConfig& cfg) {
  cfg.validate();
  ModelParameters p;
  p.patch_embed = zero_linear(cfg.embed_dim, cfg.patch_size);
  p.cls_token = Eigen::VectorXd::Zero(cfg.embed_dim);
  p.mask_token = Eigen::VectorXd::Zero(cfg.decoder_dim);
  p.encoder_blocks.assign(cfg.encoder_depth,
                          zero_block(cfg.embed_dim, cfg.mlp_hidden(cfg.embed_dim)));
  p.encoder_norm = zero_norm(cfg.embed_dim);
  p.enc_to_dec = zero_linear(cfg.decoder_dim, cfg.embed_dim);
  p.decoder_blocks.assign(cfg.decoder_depth,
                          zero_block(cfg.decoder_dim, cfg.mlp_hidden(cfg.decoder_dim)));
  p.decoder_norm = zero_norm(cfg.decoder_dim);
  p.dec_out = zero_linear(cfg.patch_size, cfg.decoder_dim);
  p.head = zero_linear(1, cfg.embed_dim);
  return p;
}

ModelParameters init_parameters(const ModelConfig& cfg, Rng& rng) {
  ModelParameters p = zero_parameters(cfg);
  fill_trunc_normal(p.patch_embed.weight, rng, 0.02);
  fill_trunc_normal(p.cls_token, rng, 0.02);
  fill_trunc_normal(p.mask_token, rng, 0.02);
  for (auto& b : p.encoder_blocks) init_block(b, rng);
  p.encoder_norm.gamma.setOnes();
  fill_trunc_normal(p.enc_to_dec.weight, rng, 0.02);
  for (auto& b : p.decoder_blocks) init_block(b, rng);
  p.decoder_norm.gamma.setOnes();
  fill_trunc_normal(p.dec_out.weight, rng, 0.02);
  fill_trunc_normal(p.head.weight, rng, 0.02);
  return p;
}

namespace {

void visit_block(BlockParams& b, const std::string& prefix, ParamGroup g,
                 const TensorVisitor& f) {
  f(prefix + ".ln1.gamma", g, b.ln1.gamma.data(), b.ln1.gamma.size());
  f(prefix + ".ln1.beta", g, b.ln1.beta.data(), b.ln1.beta.size());
  f(prefix + ".qkv.weight", g, b.qkv.weight.data(), b.qkv.weight.size());
  f(prefix + ".qkv.bias", g, b.qkv.bias.data(), b.qkv.bias.size());
  f(prefix + ".proj.weight", g, b.proj.weight.data(), b.proj.weight.size());
  f(prefix + ".proj.bias", g, b.proj.bias.data(), b.proj.bias.size());
  f(prefix + ".ln2.gamma", g, b.ln2.gamma.data(), b.ln2.gamma.size());
  f(prefix + ".ln2.beta", g, b.ln2.beta.data(), b.ln2.beta.size());
  f(prefix + ".fc1.weight", g, b.fc1.weight.data(), b.fc1.weight.size());
  f(prefix + ".fc1.bias", g, b.fc1.bias.data(), b.fc1.bias.size());
  f(prefix + ".fc2.weight", g, b.fc2.weight.data(), b.fc2.weight.size());
  f(prefix + ".fc2.bias", g, b.fc2.bias.data(), b.fc2.bias.size());
}

}  // namespace

void visit_tensors(ModelParameters& p, const TensorVisitor& f) {
  f("patch_embed.weight", ParamGroup::Encoder, p.patch_embed.weight.data(),
    p.patch_embed.weight.size());
  f("patch_embed.bias", ParamGroup::Encoder, p.patch_embed.bias.data(),
    p.patch_embed.bias.size());
  f("cls_token", ParamGroup::Encoder, p.cls_token.data(), p.cls_token.size());
  f("mask_token", ParamGroup::Decoder, p.mask_token.data(), p.mask_token.size());
  for (std::size_t i = 0; i < p.encoder_blocks.size(); ++i) {
    visit_block(p.encoder_blocks[i], "encoder.block" + std::to_string(i),
                ParamGroup::Encoder, f);
  }
  f("encoder_norm.gamma", ParamGroup::Encoder, p.encoder_norm.gamma.data(),
    p.encoder_norm.gamma.size());
  f("encoder_norm.beta", ParamGroup::Encoder, p.encoder_norm.beta.data(),
    p.encoder_norm.beta.size());
  f("enc_to_dec.weight", ParamGroup::Decoder, p.enc_to_dec.weight.data(),
    p.enc_to_dec.weight.size());
  f("enc_to_dec.bias", ParamGroup::Decoder, p.enc_to_dec.bias.data(),
    p.enc_to_dec.bias.size());
  for (std::size_t i = 0; i < p.decoder_blocks.size(); ++i) {
    visit_block(p.decoder_blocks[i], "decoder.block" + std::to_string(i),
                ParamGroup::Decoder, f);
  }
  f("decoder_norm.gamma", ParamGroup::Decoder, p.decoder_norm.gamma.data(),
    p.decoder_norm.gamma.size());
  f("decoder_norm.beta", ParamGroup::Decoder, p.decoder_norm.beta.data(),
    p.decoder_norm.beta.size());
  f("dec_out.weight", ParamGroup::Decoder, p.dec_out.weight.data(),
    p.dec_out.weight.size());
  f("dec_out.bias", ParamGroup::Decoder, p.dec_out.bias.data(), p.dec_out.bias.size());
  f("head.weight", ParamGroup::Head, p.head.weight.data(), p.head.weight.size());
  f("head.bias", ParamGroup::Head, p.head.bias.data(), p.head.bias.size());
}

void visit_tensors(const ModelParameters& p,
                   const std::function<void(const std::string&, ParamGroup,
                                            const double*, std::size_t)>& f) {
  visit_tensors(const_cast<ModelParameters&>(p),
                [&](const std::string& name, ParamGroup g, double* data,
                    std::size_t n) { f(name, g, data, n); });
}

std::size_t parameter_count(const ModelParameters& params) {
  std::size_t total = 0;
  visit_tensors(params, [&](const std::string&, ParamGroup, const double*,
                            std::size_t n) { total += n; });
  return total;
}

Eigen::MatrixXd encoder_forward(const Eigen::MatrixXd& tokens,
                                const ModelParameters& params,
                                const ModelConfig& cfg, StackCache* cache) {
  if (tokens.cols() != cfg.embed_dim) {
    throw DataError("encoder_forward: token dim mismatch");
  }
  StackCache local;
  StackCache& c = cache ? *cache : local;
  return stack_forward(tokens, params.encoder_blocks, params.encoder_norm,
                       cfg.encoder_heads, c);
}

Eigen::MatrixXd encoder_backward(const Eigen::MatrixXd& d_output,
                                 const ModelParameters& params,
                                 const ModelConfig& cfg, const StackCache& cache,
                                 ModelGradients& grads) {
  return stack_backward(d_output, params.encoder_blocks, params.encoder_norm,
                        grads.encoder_blocks, grads.encoder_norm,
                        cfg.encoder_heads, cache);
}

Eigen::MatrixXd decoder_forward(const Eigen::MatrixXd& latents,
                                const MaskPlan& plan,
                                const ModelParameters& params,
                                const ModelConfig& cfg, DecoderCache* cache) {
  if (latents.rows() != static_cast<Eigen::Index>(plan.kept_indices.size())) {
    throw DataError("decoder_forward: latent count does not match mask plan");
  }
  DecoderCache local;
  DecoderCache& c = cache ? *cache : local;
  c.latents_in = latents;

  const Eigen::MatrixXd projected = linear_forward(latents, params.enc_to_dec);
  Eigen::MatrixXd tokens(plan.n_patches, cfg.decoder_dim);
  for (int p = 0; p < plan.n_patches; ++p) tokens.row(p) = params.mask_token.transpose();
  for (std::size_t j = 0; j < plan.kept_indices.size(); ++j) {
    tokens.row(plan.kept_indices[j]) = projected.row(static_cast<Eigen::Index>(j));
  }
  tokens += positional_embedding(plan.n_patches, cfg.decoder_dim, false);
  c.tokens = tokens;

  const Eigen::MatrixXd out =
      stack_forward(tokens, params.decoder_blocks, params.decoder_norm,
                    cfg.decoder_heads, c.stack);
  c.reconstruction = linear_forward(out, params.dec_out);
  return c.reconstruction;
}

Eigen::MatrixXd decoder_backward(const Eigen::MatrixXd& d_reconstruction,
                                 const MaskPlan& plan,
                                 const ModelParameters& params,
                                 const ModelConfig& cfg, const DecoderCache& cache,
                                 ModelGradients& grads) {
  const Eigen::MatrixXd d_stack_out = linear_backward(
      d_reconstruction, cache.stack.output, params.dec_out, grads.dec_out);
  const Eigen::MatrixXd d_tokens = stack_backward(
      d_stack_out, params.decoder_blocks, params.decoder_norm,
      grads.decoder_blocks, grads.decoder_norm, cfg.decoder_heads, cache.stack);

  std::vector<bool> kept(plan.n_patches, false);
  for (int idx : plan.kept_indices) kept[idx] = true;
  Eigen::MatrixXd d_projected(plan.kept_indices.size(), cfg.decoder_dim);
  std::size_t j = 0;
  for (int p = 0; p < plan.n_patches; ++p) {
    if (kept[p]) {
      d_projected.row(static_cast<Eigen::Index>(j++)) = d_tokens.row(p);
    } else {
      grads.mask_token.noalias() += d_tokens.row(p).transpose();
    }
  }
  return linear_backward(d_projected, cache.latents_in, params.enc_to_dec,
                         grads.enc_to_dec);
}

double masked_mse_loss(const Eigen::MatrixXd& reconstruction,
                       const Eigen::MatrixXd& target, const MaskPlan& plan) {
  if (reconstruction.rows() != target.rows() ||
      reconstruction.cols() != target.cols() ||
      reconstruction.rows() != plan.n_patches) {
    throw DataError("masked_mse_loss: shape mismatch");
  }
  if (plan.masked_indices.empty()) {
    throw DataError("masked_mse_loss: empty mask set, loss undefined");
  }
  double sum = 0.0;
  for (int idx : plan.masked_indices) {
    sum += (reconstruction.row(idx) - target.row(idx)).squaredNorm();
  }
  return sum / (static_cast<double>(plan.masked_indices.size()) *
                static_cast<double>(reconstruction.cols()));
}

Eigen::MatrixXd masked_mse_loss_grad(const Eigen::MatrixXd& reconstruction,
                                     const Eigen::MatrixXd& target,
                                     const MaskPlan& plan) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(reconstruction.rows(),
                                               reconstruction.cols());
  const double denom = static_cast<double>(plan.masked_indices.size()) *
                       static_cast<double>(reconstruction.cols());
  for (int idx : plan.masked_indices) {
    grad.row(idx) = 2.0 * (reconstruction.row(idx) - target.row(idx)) / denom;
  }
  return grad;
}

double regression_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw DataError("regression_loss: length mismatch or empty");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

std::vector<double> regression_loss_grad(std::span<const double> pred,
                                         std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw DataError("regression_loss_grad: length mismatch or empty");
  }
  std::vector<double> grad(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    grad[i] = 2.0 * (pred[i] - target[i]) / static_cast<double>(pred.size());
  }
  return grad;
}

PretrainPass pretrain_forward(std::span<const double> x_transformed,
                              const MaskPlan& plan, const ModelParameters& params,
                              const ModelConfig& cfg) {
  PretrainPass pass;
  pass.plan = plan;
  pass.patches = patchify(x_transformed, cfg.grid());
  if (plan.n_patches != cfg.n_patches()) {
    throw DataError("pretrain_forward: mask plan does not match patch grid");
  }

  Eigen::MatrixXd kept(plan.kept_indices.size(), cfg.patch_size);
  for (std::size_t j = 0; j < plan.kept_indices.size(); ++j) {
    kept.row(static_cast<Eigen::Index>(j)) = pass.patches.row(plan.kept_indices[j]);
  }
  Eigen::MatrixXd tokens =
      embed_patches(kept, params.patch_embed.weight, params.patch_embed.bias);
  const Eigen::MatrixXd pos = positional_embedding(cfg.n_patches(), cfg.embed_dim, false);
  for (std::size_t j = 0; j < plan.kept_indices.size(); ++j) {
    tokens.row(static_cast<Eigen::Index>(j)) += pos.row(plan.kept_indices[j]);
  }

  const Eigen::MatrixXd latents = encoder_forward(tokens, params, cfg, &pass.encoder);
  const Eigen::MatrixXd recon =
      decoder_forward(latents, plan, params, cfg, &pass.decoder);
  pass.loss = masked_mse_loss(recon, pass.patches, plan);
  return pass;
}

void pretrain_backward(const PretrainPass& pass, const ModelParameters& params,
                       const ModelConfig& cfg, ModelGradients& grads) {
  const Eigen::MatrixXd d_recon =
      masked_mse_loss_grad(pass.decoder.reconstruction, pass.patches, pass.plan);
  const Eigen::MatrixXd d_latents =
      decoder_backward(d_recon, pass.plan, params, cfg, pass.decoder, grads);
  const Eigen::MatrixXd d_tokens =
      encoder_backward(d_latents, params, cfg, pass.encoder, grads);

  Eigen::MatrixXd kept(pass.plan.kept_indices.size(), cfg.patch_size);
  for (std::size_t j = 0; j < pass.plan.kept_indices.size(); ++j) {
    kept.row(static_cast<Eigen::Index>(j)) =
        pass.patches.row(pass.plan.kept_indices[j]);
  }
  grads.patch_embed.weight.noalias() += d_tokens.transpose() * kept;
  grads.patch_embed.bias.noalias() += d_tokens.colwise().sum().transpose();
}

RegressionPass regression_forward(std::span<const double> x_transformed,
                                  const ModelParameters& params,
                                  const ModelConfig& cfg) {
  RegressionPass pass;
  pass.patches = patchify(x_transformed, cfg.grid());
  const Eigen::MatrixXd emb = embed_patches(pass.patches, params.patch_embed.weight,
                                            params.patch_embed.bias);
  const Eigen::MatrixXd pos =
      positional_embedding(cfg.n_patches(), cfg.embed_dim, true);

  Eigen::MatrixXd tokens(cfg.n_patches() + 1, cfg.embed_dim);
  tokens.row(0) = params.cls_token.transpose() + pos.row(0);
  tokens.bottomRows(cfg.n_patches()) = emb + pos.bottomRows(cfg.n_patches());

  const Eigen::MatrixXd out = encoder_forward(tokens, params, cfg, &pass.encoder);
  pass.prediction = params.head.weight.row(0).dot(out.row(0)) + params.head.bias(0);
  if (!std::isfinite(pass.prediction)) {
    throw NumericError("regression_forward: non-finite prediction");
  }
  return pass;
}

void regression_backward(const RegressionPass& pass, double d_pred,
                         const ModelParameters& params, const ModelConfig& cfg,
                         ModelGradients& grads, Eigen::VectorXd* input_grad) {
  const Eigen::MatrixXd& out = pass.encoder.output;
  grads.head.weight.row(0).noalias() += d_pred * out.row(0);
  grads.head.bias(0) += d_pred;

  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(out.rows(), out.cols());
  d_out.row(0) = d_pred * params.head.weight.row(0);

  const Eigen::MatrixXd d_tokens =
      encoder_backward(d_out, params, cfg, pass.encoder, grads);
  grads.cls_token.noalias() += d_tokens.row(0).transpose();

  const Eigen::MatrixXd d_emb = d_tokens.bottomRows(cfg.n_patches());
  grads.patch_embed.weight.noalias() += d_emb.transpose() * pass.patches;
  grads.patch_embed.bias.noalias() += d_emb.colwise().sum().transpose();

  if (input_grad != nullptr) {
    const Eigen::MatrixXd d_patches = d_emb * params.patch_embed.weight;
    const std::vector<double> flat = unpatchify(d_patches);
    *input_grad = Eigen::Map<const Eigen::VectorXd>(flat.data(),
                                                    static_cast<Eigen::Index>(flat.size()));
  }
}

}  // namespace maxrf
