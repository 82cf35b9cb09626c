#include "maxrf/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"

namespace maxrf {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'M', 'A', 'X', 'R', 'F', 'C', 'K', 'P'};
constexpr int kFormatVersion = 1;

json model_config_to_json(const ModelConfig& c) {
  return json{{"n_channels", c.n_channels},
              {"patch_size", c.patch_size},
              {"embed_dim", c.embed_dim},
              {"encoder_depth", c.encoder_depth},
              {"encoder_heads", c.encoder_heads},
              {"decoder_dim", c.decoder_dim},
              {"decoder_depth", c.decoder_depth},
              {"decoder_heads", c.decoder_heads},
              {"mlp_ratio", c.mlp_ratio}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.n_channels = j.at("n_channels").get<int>();
  c.patch_size = j.at("patch_size").get<int>();
  c.embed_dim = j.at("embed_dim").get<int>();
  c.encoder_depth = j.at("encoder_depth").get<int>();
  c.encoder_heads = j.at("encoder_heads").get<int>();
  c.decoder_dim = j.at("decoder_dim").get<int>();
  c.decoder_depth = j.at("decoder_depth").get<int>();
  c.decoder_heads = j.at("decoder_heads").get<int>();
  c.mlp_ratio = j.at("mlp_ratio").get<double>();
  return c;
}

json train_config_to_json(const TrainConfig& c) {
  return json{{"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"base_lr", c.base_lr},
              {"warmup_epochs", c.warmup_epochs},
              {"weight_decay", c.weight_decay},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"eps", c.eps},
              {"seed", c.seed},
              {"mask_ratio", c.mask_ratio}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.base_lr = j.at("base_lr").get<double>();
  c.warmup_epochs = j.at("warmup_epochs").get<int>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.eps = j.at("eps").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.mask_ratio = j.at("mask_ratio").get<double>();
  return c;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1) throw DataError("TrainConfig: epochs and batch_size must be >= 1");
  if (!(base_lr > 0.0)) throw DataError("TrainConfig: base_lr must be positive");
  if (warmup_epochs < 0 || warmup_epochs > epochs) {
    throw DataError("TrainConfig: warmup_epochs must be in [0, epochs]");
  }
  if (!(mask_ratio >= 0.0 && mask_ratio < 1.0)) {
    throw DataError("TrainConfig: mask_ratio must be in [0, 1)");
  }
}

double lr_at(long step, long total_steps, long warmup_steps, double base_lr) {
  if (step < 0 || step >= total_steps || warmup_steps < 0 ||
      warmup_steps > total_steps) {
    throw DataError("lr_at: invalid step bounds");
  }
  if (step < warmup_steps) {
    return base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  }
  const long denom = std::max<long>(1, total_steps - warmup_steps);
  const double progress = static_cast<double>(step - warmup_steps) / denom;
  return base_lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
}

OptimizerState make_optimizer_state(const ModelParameters& params) {
  OptimizerState state;
  visit_tensors(params, [&](const std::string&, ParamGroup, const double*,
                            std::size_t n) {
    state.m.emplace_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
    state.v.emplace_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
  });
  return state;
}

void adamw_step(ModelParameters& params, const ModelGradients& grads,
                OptimizerState& state, double lr, const AdamWSettings& s,
                const std::vector<ParamGroup>& trainable) {
  if (lr < 0.0) throw DataError("adamw_step: negative learning rate");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(state.t));

  // collect gradient views in the shared visit order
  std::vector<std::pair<const double*, std::size_t>> grad_views;
  visit_tensors(grads, [&](const std::string&, ParamGroup, const double* g,
                           std::size_t n) { grad_views.emplace_back(g, n); });

  std::size_t slot = 0;
  visit_tensors(params, [&](const std::string& name, ParamGroup group, double* p,
                            std::size_t n) {
    const std::size_t i = slot++;
    if (grad_views[i].second != n) {
      throw DataError("adamw_step: gradient shape mismatch for " + name);
    }
    if (!trainable.empty() &&
        std::find(trainable.begin(), trainable.end(), group) == trainable.end()) {
      return;
    }
    const double* g = grad_views[i].first;
    Eigen::VectorXd& m = state.m[i];
    Eigen::VectorXd& v = state.v[i];
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(g[k])) {
        throw NumericError("adamw_step: non-finite gradient in " + name);
      }
      m(static_cast<Eigen::Index>(k)) =
          s.beta1 * m(static_cast<Eigen::Index>(k)) + (1.0 - s.beta1) * g[k];
      v(static_cast<Eigen::Index>(k)) =
          s.beta2 * v(static_cast<Eigen::Index>(k)) + (1.0 - s.beta2) * g[k] * g[k];
      const double mhat = m(static_cast<Eigen::Index>(k)) / bc1;
      const double vhat = v(static_cast<Eigen::Index>(k)) / bc2;
      p[k] -= lr * (mhat / (std::sqrt(vhat) + s.eps) + s.weight_decay * p[k]);
    }
  });
}

void save_metrics_csv(const std::vector<MetricRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write metrics file: " + path);
  out << "epoch,split,loss,lr\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.epoch << ',' << r.split << ',' << r.loss << ',' << r.lr << "\n";
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  json header;
  header["format_version"] = kFormatVersion;
  header["model"] = model_config_to_json(ckpt.model);
  header["train"] = train_config_to_json(ckpt.train);
  header["transform_kind"] = transform_name(ckpt.transform_kind);
  header["task"] = ckpt.task;
  header["epoch"] = ckpt.epoch;
  header["seed"] = ckpt.seed;
  if (ckpt.target_norm) {
    header["target_norm"] = {{"mean", ckpt.target_norm->mean},
                             {"std", ckpt.target_norm->std}};
  }
  json metrics = json::array();
  for (const auto& r : ckpt.metrics) {
    metrics.push_back({{"epoch", r.epoch}, {"split", r.split}, {"loss", r.loss},
                       {"lr", r.lr}});
  }
  header["metrics"] = metrics;

  // manifest + payload in visit order, transform stats appended
  std::vector<double> payload;
  json tensors = json::array();
  auto append = [&](const std::string& name, const double* data, std::size_t n) {
    tensors.push_back({{"name", name},
                       {"offset", payload.size()},
                       {"size", n},
                       {"fnv1a64", fnv1a64(data, n * sizeof(double))}});
    payload.insert(payload.end(), data, data + n);
  };
  visit_tensors(ckpt.params, [&](const std::string& name, ParamGroup,
                                 const double* data, std::size_t n) {
    append(name, data, n);
  });
  if (ckpt.channel_stats) {
    append("__transform.channel_means", ckpt.channel_stats->means.data(),
           ckpt.channel_stats->means.size());
    append("__transform.channel_stds", ckpt.channel_stats->stds.data(),
           ckpt.channel_stats->stds.size());
  }
  header["tensors"] = tensors;
  header["payload_fnv1a64"] =
      fnv1a64(payload.data(), payload.size() * sizeof(double));
  header["payload_size"] = payload.size();

  const std::string header_str = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t header_len = header_str.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!out) throw DataError("write failure on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path + ": not a checkpoint file (bad magic)");
  }
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in) throw DataError(path + ": truncated header length");
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw DataError(path + ": truncated header");

  json header = json::parse(header_str, nullptr, false);
  if (header.is_discarded()) throw DataError(path + ": corrupt header JSON");
  const int version = header.at("format_version").get<int>();
  if (version != kFormatVersion) {
    throw DataError(path + ": checkpoint format version " + std::to_string(version) +
                    " not supported (expected " + std::to_string(kFormatVersion) + ")");
  }

  Checkpoint ckpt;
  ckpt.format_version = version;
  ckpt.model = model_config_from_json(header.at("model"));
  ckpt.train = train_config_from_json(header.at("train"));
  ckpt.transform_kind = parse_transform(header.at("transform_kind").get<std::string>());
  ckpt.task = header.at("task").get<std::string>();
  ckpt.epoch = header.at("epoch").get<int>();
  ckpt.seed = header.at("seed").get<std::uint64_t>();
  if (header.contains("target_norm")) {
    ckpt.target_norm = TargetNorm{header["target_norm"].at("mean").get<double>(),
                                  header["target_norm"].at("std").get<double>()};
  }
  for (const auto& r : header.at("metrics")) {
    ckpt.metrics.push_back({r.at("epoch").get<int>(), r.at("split").get<std::string>(),
                            r.at("loss").get<double>(), r.at("lr").get<double>()});
  }

  const std::size_t payload_size = header.at("payload_size").get<std::size_t>();
  std::vector<double> payload(payload_size);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload_size * sizeof(double)));
  if (!in) throw DataError(path + ": truncated payload");
  const std::uint64_t digest = fnv1a64(payload.data(), payload.size() * sizeof(double));
  if (digest != header.at("payload_fnv1a64").get<std::uint64_t>()) {
    throw DataError(path + ": payload digest mismatch, file corrupted");
  }

  // restore tensors by manifest, validated against the visit order
  const json& tensors = header.at("tensors");
  std::size_t cursor = 0;
  ckpt.params = zero_parameters(ckpt.model);
  visit_tensors(ckpt.params, [&](const std::string& name, ParamGroup, double* data,
                                 std::size_t n) {
    const json& t = tensors.at(cursor++);
    if (t.at("name").get<std::string>() != name || t.at("size").get<std::size_t>() != n) {
      throw DataError(path + ": tensor manifest mismatch at " + name);
    }
    const std::size_t offset = t.at("offset").get<std::size_t>();
    std::copy(payload.begin() + static_cast<std::ptrdiff_t>(offset),
              payload.begin() + static_cast<std::ptrdiff_t>(offset + n), data);
  });
  if (cursor < tensors.size() &&
      tensors.at(cursor).at("name").get<std::string>() == "__transform.channel_means") {
    ChannelStats stats;
    const json& tm = tensors.at(cursor++);
    const json& ts = tensors.at(cursor++);
    const std::size_t om = tm.at("offset").get<std::size_t>();
    const std::size_t nm = tm.at("size").get<std::size_t>();
    const std::size_t os = ts.at("offset").get<std::size_t>();
    const std::size_t ns = ts.at("size").get<std::size_t>();
    stats.means.assign(payload.begin() + static_cast<std::ptrdiff_t>(om),
                       payload.begin() + static_cast<std::ptrdiff_t>(om + nm));
    stats.stds.assign(payload.begin() + static_cast<std::ptrdiff_t>(os),
                      payload.begin() + static_cast<std::ptrdiff_t>(os + ns));
    ckpt.channel_stats = std::move(stats);
  }
  return ckpt;
}

namespace {

std::vector<std::vector<double>> transform_all(
    const std::vector<const Spectrum*>& spectra, TransformKind kind,
    const ChannelStats* stats) {
  std::vector<std::vector<double>> out;
  out.reserve(spectra.size());
  for (const auto* s : spectra) {
    out.push_back(apply_transform(s->channels, kind, stats));
  }
  return out;
}

std::vector<const Spectrum*> pointers(const std::vector<Spectrum>& spectra) {
  std::vector<const Spectrum*> out;
  out.reserve(spectra.size());
  for (const auto& s : spectra) out.push_back(&s);
  return out;
}

void scale_gradients(ModelGradients& grads, double factor) {
  visit_tensors(grads, [&](const std::string&, ParamGroup, double* data,
                           std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) data[i] *= factor;
  });
}

void zero_gradients(ModelGradients& grads) { scale_gradients(grads, 0.0); }

}  // namespace

PretrainResult pretrain(const std::vector<Spectrum>& train,
                        const std::vector<Spectrum>& val, const ModelConfig& mcfg,
                        const TrainConfig& tcfg, TransformKind kind) {
  mcfg.validate();
  tcfg.validate();
  if (train.empty()) throw DataError("pretrain: empty training set");

  ChannelStats stats;
  const ChannelStats* stats_ptr = nullptr;
  if (kind == TransformKind::ChannelNorm) {
    stats = fit_channel_stats(train);
    stats_ptr = &stats;
  }
  const auto train_x = transform_all(pointers(train), kind, stats_ptr);
  const auto val_x = transform_all(pointers(val), kind, stats_ptr);

  Rng init_rng(derive_seed(tcfg.seed, 0x1417ULL));
  ModelParameters params = init_parameters(mcfg, init_rng);
  ModelGradients grads = zero_parameters(mcfg);
  OptimizerState opt = make_optimizer_state(params);
  const AdamWSettings adamw{tcfg.beta1, tcfg.beta2, tcfg.eps, tcfg.weight_decay};

  const long n_batches =
      (static_cast<long>(train.size()) + tcfg.batch_size - 1) / tcfg.batch_size;
  const long total_steps = static_cast<long>(tcfg.epochs) * n_batches;
  const long warmup_steps = static_cast<long>(tcfg.warmup_epochs) * n_batches;

  auto make_ckpt = [&](int epoch, const std::vector<MetricRow>& metrics) {
    Checkpoint c;
    c.model = mcfg;
    c.train = tcfg;
    c.transform_kind = kind;
    if (stats_ptr) c.channel_stats = stats;
    c.epoch = epoch;
    c.seed = tcfg.seed;
    c.metrics = metrics;
    c.params = params;
    return c;
  };

  std::vector<MetricRow> metrics;
  PretrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  long step = 0;
  double last_lr = 0.0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(tcfg.seed, 0xE40CULL, static_cast<std::uint64_t>(epoch)));
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    double epoch_loss = 0.0;
    for (long b = 0; b < n_batches; ++b) {
      const std::size_t begin = static_cast<std::size_t>(b) * tcfg.batch_size;
      const std::size_t end = std::min(begin + tcfg.batch_size, train.size());
      const double batch_n = static_cast<double>(end - begin);

      zero_gradients(grads);
      double batch_loss = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t rec = order[i];
        const MaskPlan plan = sample_mask(
            mcfg.n_patches(), tcfg.mask_ratio,
            derive_seed(tcfg.seed, 0x3A5CULL + static_cast<std::uint64_t>(epoch),
                        static_cast<std::uint64_t>(rec)));
        PretrainPass pass;
        try {
          pass = pretrain_forward(train_x[rec], plan, params, mcfg);
          pretrain_backward(pass, params, mcfg, grads);
        } catch (const NumericError& e) {
          throw NumericError(std::string(e.what()) + " (epoch " +
                             std::to_string(epoch) + ", batch " + std::to_string(b) + ")");
        }
        batch_loss += pass.loss;
      }
      scale_gradients(grads, 1.0 / batch_n);
      last_lr = lr_at(step, total_steps, warmup_steps, tcfg.base_lr);
      adamw_step(params, grads, opt, last_lr, adamw);
      ++step;
      epoch_loss += batch_loss;
    }
    epoch_loss /= static_cast<double>(train.size());
    metrics.push_back({epoch, "train", epoch_loss, last_lr});

    if (!val.empty()) {
      double val_loss = 0.0;
      for (std::size_t j = 0; j < val.size(); ++j) {
        const MaskPlan plan =
            sample_mask(mcfg.n_patches(), tcfg.mask_ratio,
                        derive_seed(tcfg.seed, 0x7A1FULL, static_cast<std::uint64_t>(j)));
        val_loss += pretrain_forward(val_x[j], plan, params, mcfg).loss;
      }
      val_loss /= static_cast<double>(val.size());
      metrics.push_back({epoch, "val", val_loss, last_lr});
      if (val_loss < best_val) {
        best_val = val_loss;
        result.best = make_ckpt(epoch, metrics);
      }
    }
  }

  result.final = make_ckpt(tcfg.epochs - 1, metrics);
  if (val.empty()) result.best = result.final;
  result.metrics = metrics;
  return result;
}

std::vector<LabeledSpectrum> subsample_pairs(
    const std::vector<LabeledSpectrum>& pairs, long n, std::uint64_t seed) {
  if (n < 0 || n == static_cast<long>(pairs.size())) return pairs;
  if (n > static_cast<long>(pairs.size())) {
    throw DataError("subsample larger than dataset: " + std::to_string(n) + " > " +
                    std::to_string(pairs.size()));
  }
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x5AB5ULL));
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<LabeledSpectrum> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) out.push_back(pairs[order[static_cast<std::size_t>(i)]]);
  return out;
}

FinetuneResult finetune(const Checkpoint* pretrained,
                        const std::vector<LabeledSpectrum>& train_pairs,
                        const std::vector<LabeledSpectrum>& val_pairs, Task task,
                        const ModelConfig& mcfg_in, const TrainConfig& tcfg,
                        long subsample_n, TransformKind kind_in,
                        const ChannelStats* stats_in) {
  tcfg.validate();
  if (train_pairs.empty()) throw DataError("finetune: empty training set");

  const ModelConfig mcfg = pretrained ? pretrained->model : mcfg_in;
  const TransformKind kind = pretrained ? pretrained->transform_kind : kind_in;
  const ChannelStats* stats_ptr = stats_in;
  ChannelStats stats;
  if (pretrained && pretrained->channel_stats) {
    stats = *pretrained->channel_stats;
    stats_ptr = &stats;
  }
  if (kind == TransformKind::ChannelNorm && stats_ptr == nullptr) {
    throw DataError("finetune: channel transform requires fitted stats");
  }
  mcfg.validate();

  const auto pairs = subsample_pairs(train_pairs, subsample_n, tcfg.seed);

  std::vector<double> targets_raw;
  targets_raw.reserve(pairs.size());
  for (const auto& p : pairs) targets_raw.push_back(p.value_wt_pct);
  const TargetNorm tnorm = fit_target_norm(targets_raw);

  std::vector<const Spectrum*> train_specs, val_specs;
  for (const auto& p : pairs) train_specs.push_back(p.spectrum);
  for (const auto& p : val_pairs) val_specs.push_back(p.spectrum);
  const auto train_x = transform_all(train_specs, kind, stats_ptr);
  const auto val_x = transform_all(val_specs, kind, stats_ptr);

  std::vector<double> targets(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    targets[i] = apply_target_norm(pairs[i].value_wt_pct, tnorm);
  }
  std::vector<double> val_targets(val_pairs.size());
  for (std::size_t i = 0; i < val_pairs.size(); ++i) {
    val_targets[i] = apply_target_norm(val_pairs[i].value_wt_pct, tnorm);
  }

  ModelParameters params;
  if (pretrained) {
    params = pretrained->params;
  } else {
    Rng init_rng(derive_seed(tcfg.seed, 0xF71BULL));
    params = init_parameters(mcfg, init_rng);
  }
  // The regression head is attached fresh for the downstream task. Starting
  // it at zero means the first updates fit the head to the encoder's current
  // features before any gradient reaches the encoder itself.
  params.head.weight.setZero();
  params.head.bias.setZero();
  ModelGradients grads = zero_parameters(mcfg);
  OptimizerState opt = make_optimizer_state(params);
  const AdamWSettings adamw{tcfg.beta1, tcfg.beta2, tcfg.eps, tcfg.weight_decay};
  const std::vector<ParamGroup> trainable{ParamGroup::Encoder, ParamGroup::Head};

  const long n_batches =
      (static_cast<long>(pairs.size()) + tcfg.batch_size - 1) / tcfg.batch_size;
  const long total_steps = static_cast<long>(tcfg.epochs) * n_batches;
  const long warmup_steps = static_cast<long>(tcfg.warmup_epochs) * n_batches;

  auto make_ckpt = [&](int epoch, const std::vector<MetricRow>& metrics) {
    Checkpoint c;
    c.model = mcfg;
    c.train = tcfg;
    c.transform_kind = kind;
    if (stats_ptr) c.channel_stats = *stats_ptr;
    c.target_norm = tnorm;
    c.task = task_name(task);
    c.epoch = epoch;
    c.seed = tcfg.seed;
    c.metrics = metrics;
    c.params = params;
    return c;
  };

  std::vector<MetricRow> metrics;
  FinetuneResult result;
  double best_val = std::numeric_limits<double>::infinity();
  long step = 0;
  double last_lr = 0.0;

  std::vector<std::size_t> order(pairs.size());

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(tcfg.seed, 0xF40CULL, static_cast<std::uint64_t>(epoch)));
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    double epoch_loss = 0.0;
    for (long b = 0; b < n_batches; ++b) {
      const std::size_t begin = static_cast<std::size_t>(b) * tcfg.batch_size;
      const std::size_t end = std::min(begin + tcfg.batch_size, pairs.size());
      const double batch_n = static_cast<double>(end - begin);

      zero_gradients(grads);
      double batch_sq = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t rec = order[i];
        RegressionPass pass;
        try {
          pass = regression_forward(train_x[rec], params, mcfg);
          const double d_pred = 2.0 * (pass.prediction - targets[rec]) / batch_n;
          regression_backward(pass, d_pred, params, mcfg, grads);
        } catch (const NumericError& e) {
          throw NumericError(std::string(e.what()) + " (epoch " +
                             std::to_string(epoch) + ", batch " + std::to_string(b) + ")");
        }
        const double d = pass.prediction - targets[rec];
        batch_sq += d * d;
      }
      last_lr = lr_at(step, total_steps, warmup_steps, tcfg.base_lr);
      adamw_step(params, grads, opt, last_lr, adamw, trainable);
      ++step;
      epoch_loss += batch_sq;
    }
    epoch_loss /= static_cast<double>(pairs.size());
    metrics.push_back({epoch, "train", epoch_loss, last_lr});

    if (!val_pairs.empty()) {
      double val_loss = 0.0;
      for (std::size_t j = 0; j < val_pairs.size(); ++j) {
        const double pred = regression_forward(val_x[j], params, mcfg).prediction;
        const double d = pred - val_targets[j];
        val_loss += d * d;
      }
      val_loss /= static_cast<double>(val_pairs.size());
      metrics.push_back({epoch, "val", val_loss, last_lr});
      if (val_loss < best_val) {
        best_val = val_loss;
        result.best = make_ckpt(epoch, metrics);
      }
    }
  }

  result.final = make_ckpt(tcfg.epochs - 1, metrics);
  if (val_pairs.empty()) result.best = result.final;
  result.metrics = metrics;
  return result;
}

}  // namespace maxrf
