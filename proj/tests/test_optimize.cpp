#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "maxrf/optimize.hpp"
#include "maxrf/synthetic.hpp"

using namespace maxrf;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.n_channels = 64;
  cfg.patch_size = 16;
  cfg.embed_dim = 16;
  cfg.encoder_depth = 1;
  cfg.encoder_heads = 2;
  cfg.decoder_dim = 16;
  cfg.decoder_depth = 1;
  cfg.decoder_heads = 2;
  cfg.mlp_ratio = 2.0;
  return cfg;
}

SyntheticConfig tiny_synth() {
  SyntheticConfig s;
  s.n_channels = 64;
  s.target_peak_center = 32;
  s.target_peak_sigma = 5.0;
  s.noise_std = 1.0;
  return s;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

bool params_equal(const ModelParameters& a, const ModelParameters& b) {
  bool equal = true;
  std::vector<std::pair<const double*, std::size_t>> va;
  visit_tensors(a, [&](const std::string&, ParamGroup, const double* p,
                       std::size_t n) { va.emplace_back(p, n); });
  std::size_t slot = 0;
  visit_tensors(b, [&](const std::string&, ParamGroup, const double* p,
                       std::size_t n) {
    const auto [pa, na] = va[slot++];
    if (na != n) { equal = false; return; }
    for (std::size_t i = 0; i < n; ++i) {
      if (pa[i] != p[i]) { equal = false; return; }
    }
  });
  return equal;
}

}  // namespace

TEST_CASE("lr schedule boundary values") {
  const double base = 1e-4;
  // end of warmup hits base_lr exactly with the (step+1) convention
  CHECK(lr_at(9, 100, 10, base) == doctest::Approx(base).epsilon(1e-15));
  // cosine midpoint: (step - warmup) / (total - warmup) = 1/2
  CHECK(lr_at(55, 100, 10, base) == doctest::Approx(base / 2).epsilon(1e-12));
  // final step approaches zero for long schedules
  CHECK(lr_at(99, 100, 10, base) ==
        doctest::Approx(base * 0.5 * (1.0 + std::cos(3.14159265358979323846 * 89.0 / 90.0)))
            .epsilon(1e-12));
  CHECK(lr_at(99, 100, 10, base) < 2e-7);
  CHECK_THROWS_AS(lr_at(100, 100, 10, base), DataError);
  CHECK_THROWS_AS(lr_at(-1, 100, 10, base), DataError);
}

TEST_CASE("lr schedule is continuous and non-negative") {
  const double base = 3e-3;
  for (long step = 0; step < 200; ++step) {
    CHECK(lr_at(step, 200, 20, base) >= 0.0);
  }
  // warmup/cosine boundary: last warmup step is base, first cosine step is
  // cos(pi * 0 / n) scaled, i.e. also base
  CHECK(std::abs(lr_at(19, 200, 20, base) - base) < 1e-12);
  CHECK(std::abs(lr_at(20, 200, 20, base) - base) < 1e-12);
}

TEST_CASE("adamw_step no-op and decoupled decay") {
  ModelConfig cfg = tiny_config();
  ModelParameters params = zero_parameters(cfg);
  params.head.bias(0) = 1.0;
  ModelGradients grads = zero_parameters(cfg);
  OptimizerState state = make_optimizer_state(params);

  SUBCASE("zero grad, zero decay leaves parameters alone") {
    adamw_step(params, grads, state, 0.01, AdamWSettings{0.9, 0.999, 1e-8, 0.0});
    CHECK(params.head.bias(0) == 1.0);
    CHECK(state.t == 1);
  }
  SUBCASE("zero grad with decay shrinks the parameter") {
    adamw_step(params, grads, state, 0.01, AdamWSettings{0.9, 0.999, 1e-8, 0.1});
    CHECK(params.head.bias(0) == doctest::Approx(0.999).epsilon(1e-15));
  }
  SUBCASE("first Adam step matches the hand oracle") {
    params.head.bias(0) = 0.0;
    grads.head.bias(0) = 1.0;
    adamw_step(params, grads, state, 0.1, AdamWSettings{0.9, 0.999, 1e-8, 0.0});
    const double mhat = 0.1 / (1.0 - 0.9);
    const double vhat = 0.001 / (1.0 - 0.999);
    const double expected = -0.1 * mhat / (std::sqrt(vhat) + 1e-8);
    CHECK(params.head.bias(0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(params.head.bias(0) == doctest::Approx(-0.1).epsilon(1e-6));
  }
}

TEST_CASE("adamw with zero decay equals an independent scalar Adam") {
  // independent reference implementation on a single scalar trajectory
  double ref = 0.7, m = 0.0, v = 0.0;
  ModelConfig cfg = tiny_config();
  ModelParameters params = zero_parameters(cfg);
  params.head.bias(0) = 0.7;
  ModelGradients grads = zero_parameters(cfg);
  OptimizerState state = make_optimizer_state(params);
  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;

  Rng rng(19);
  for (int t = 1; t <= 50; ++t) {
    const double g = rng.next_normal();
    grads.head.bias(0) = g;
    adamw_step(params, grads, state, lr, AdamWSettings{b1, b2, eps, 0.0});

    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1.0 - std::pow(b1, t));
    const double vhat = v / (1.0 - std::pow(b2, t));
    ref -= lr * mhat / (std::sqrt(vhat) + eps);
    CHECK(params.head.bias(0) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("adamw rejects non-finite gradients") {
  ModelConfig cfg = tiny_config();
  ModelParameters params = zero_parameters(cfg);
  ModelGradients grads = zero_parameters(cfg);
  OptimizerState state = make_optimizer_state(params);
  grads.head.bias(0) = std::nan("");
  CHECK_THROWS_AS(adamw_step(params, grads, state, 0.01, AdamWSettings{}),
                  NumericError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  ModelConfig cfg = tiny_config();
  Rng rng(23);
  Checkpoint ckpt;
  ckpt.model = cfg;
  ckpt.train.seed = 99;
  ckpt.transform_kind = TransformKind::ChannelNorm;
  ckpt.channel_stats = ChannelStats{std::vector<double>(64, 1.5),
                                    std::vector<double>(64, 2.25)};
  ckpt.target_norm = TargetNorm{12.5, 3.75};
  ckpt.task = "CaCO3";
  ckpt.epoch = 7;
  ckpt.seed = 99;
  ckpt.metrics = {{0, "train", 0.5, 1e-4}, {0, "val", 0.6, 1e-4}};
  ckpt.params = init_parameters(cfg, rng);

  const auto path = temp_path("ckpt_rt.bin");
  save_checkpoint(ckpt, path);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(params_equal(ckpt.params, loaded.params));
  CHECK(loaded.transform_kind == TransformKind::ChannelNorm);
  REQUIRE(loaded.channel_stats.has_value());
  CHECK(loaded.channel_stats->stds[10] == 2.25);
  REQUIRE(loaded.target_norm.has_value());
  CHECK(loaded.target_norm->mean == 12.5);
  CHECK(loaded.task == "CaCO3");
  CHECK(loaded.epoch == 7);
  REQUIRE(loaded.metrics.size() == 2);
  CHECK(loaded.metrics[1].loss == 0.6);

  // save -> load -> save produces byte-identical files
  const auto path2 = temp_path("ckpt_rt2.bin");
  save_checkpoint(loaded, path2);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), {});
  const std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
  CHECK(!b1.empty());
}

TEST_CASE("checkpoint corruption and version mismatch are detected") {
  ModelConfig cfg = tiny_config();
  Rng rng(29);
  Checkpoint ckpt;
  ckpt.model = cfg;
  ckpt.params = init_parameters(cfg, rng);
  const auto path = temp_path("ckpt_corrupt.bin");
  save_checkpoint(ckpt, path);

  SUBCASE("single payload byte flip") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(0, std::ios::end);
    const auto size = f.tellg();
    f.seekp(static_cast<std::streamoff>(size) - 9);
    char byte;
    f.seekg(static_cast<std::streamoff>(size) - 9);
    f.read(&byte, 1);
    byte = static_cast<char>(byte ^ 0x01);
    f.seekp(static_cast<std::streamoff>(size) - 9);
    f.write(&byte, 1);
    f.close();
    CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("digest"),
                         DataError);
  }
  SUBCASE("format version mismatch") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    in.close();
    const auto pos = bytes.find("\"format_version\":1");
    REQUIRE(pos != std::string::npos);
    bytes[pos + std::string("\"format_version\":").size()] = '9';
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("version"),
                         DataError);
  }
  SUBCASE("truncated file") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    in.close();
    bytes.resize(bytes.size() / 2);
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
}

TEST_CASE("pretrain smoke: loss decreases on an overfittable set") {
  const auto spectra = synth_spectra(8, 5, tiny_synth());
  TrainConfig tcfg;
  tcfg.epochs = 2;
  tcfg.batch_size = 8;
  tcfg.base_lr = 1e-3;
  tcfg.warmup_epochs = 0;
  tcfg.weight_decay = 0.0;
  tcfg.seed = 3;
  tcfg.mask_ratio = 0.5;

  const auto result = pretrain(spectra, spectra, tiny_config(), tcfg);
  REQUIRE(result.metrics.size() == 4);  // train+val per epoch
  const double val0 = result.metrics[1].loss;
  const double val1 = result.metrics[3].loss;
  CHECK(result.metrics[1].split == "val");
  CHECK(val1 < val0);
  CHECK(result.final.train.mask_ratio == 0.5);
}

TEST_CASE("pretrain is deterministic given the seed") {
  const auto spectra = synth_spectra(6, 9, tiny_synth());
  TrainConfig tcfg;
  tcfg.epochs = 2;
  tcfg.batch_size = 4;
  tcfg.base_lr = 1e-3;
  tcfg.warmup_epochs = 1;
  tcfg.seed = 11;

  const auto a = pretrain(spectra, {}, tiny_config(), tcfg);
  const auto b = pretrain(spectra, {}, tiny_config(), tcfg);
  CHECK(params_equal(a.final.params, b.final.params));
  REQUIRE(a.metrics.size() == b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    CHECK(a.metrics[i].loss == b.metrics[i].loss);
    CHECK(a.metrics[i].lr == b.metrics[i].lr);
  }
}

TEST_CASE("finetune subsampling is deterministic and bounded") {
  const auto cfg = tiny_synth();
  const auto spectra = synth_spectra(20, 13, cfg);
  const auto labels = synth_labels(20, 13, Task::CaCO3, cfg);
  const auto pairs = align_labels(spectra, labels, Task::CaCO3);
  REQUIRE(pairs.size() == 20);

  const auto a = subsample_pairs(pairs, 5, 77);
  const auto b = subsample_pairs(pairs, 5, 77);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].spectrum->record_id == b[i].spectrum->record_id);
  }
  CHECK_THROWS_AS(subsample_pairs(pairs, 21, 77), DataError);
}

TEST_CASE("finetune runs from scratch and from a checkpoint on one code path") {
  const auto scfg = tiny_synth();
  const auto spectra = synth_spectra(12, 31, scfg);
  const auto labels = synth_labels(12, 31, Task::TOC, scfg);
  const auto pairs = align_labels(spectra, labels, Task::TOC);

  TrainConfig pre;
  pre.epochs = 1;
  pre.batch_size = 12;
  pre.base_lr = 1e-3;
  pre.warmup_epochs = 0;
  pre.seed = 7;
  const auto pretrained = pretrain(spectra, {}, tiny_config(), pre);

  TrainConfig ft;
  ft.epochs = 2;
  ft.batch_size = 6;
  ft.base_lr = 1e-4;
  ft.warmup_epochs = 0;
  ft.seed = 5;

  const auto from_ckpt =
      finetune(&pretrained.final, pairs, pairs, Task::TOC, tiny_config(), ft);
  const auto scratch = finetune(nullptr, pairs, pairs, Task::TOC, tiny_config(), ft);
  CHECK(from_ckpt.final.task == "TOC");
  CHECK(from_ckpt.final.target_norm.has_value());
  CHECK(scratch.final.target_norm.has_value());
  CHECK_FALSE(params_equal(from_ckpt.final.params, scratch.final.params));

  // the decoder stays frozen during fine-tuning
  CHECK((from_ckpt.final.params.dec_out.weight -
         pretrained.final.params.dec_out.weight)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}
