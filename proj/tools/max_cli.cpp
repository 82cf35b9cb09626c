// Command-line front end: synth, pretrain, finetune, evaluate, sweep,
// saliency, reconstruct. Every run directory gets the resolved config, the
// metric CSVs, and any plots; reruns with equal seeds reproduce the artifacts
// byte for byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_map>

#include "CLI11.hpp"
#include "json.hpp"
#include "maxrf/evaluate.hpp"
#include "maxrf/saliency.hpp"
#include "maxrf/svg.hpp"
#include "maxrf/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace maxrf;

namespace {

struct ModelFlags {
  int n_channels = 2048;
  int patch_size = 16;
  int embed_dim = 1024;
  int encoder_depth = 12;
  int encoder_heads = 16;
  int decoder_dim = 512;
  int decoder_depth = 8;
  int decoder_heads = 16;
  double mlp_ratio = 4.0;

  ModelConfig to_config() const {
    ModelConfig cfg;
    cfg.n_channels = n_channels;
    cfg.patch_size = patch_size;
    cfg.embed_dim = embed_dim;
    cfg.encoder_depth = encoder_depth;
    cfg.encoder_heads = encoder_heads;
    cfg.decoder_dim = decoder_dim;
    cfg.decoder_depth = decoder_depth;
    cfg.decoder_heads = decoder_heads;
    cfg.mlp_ratio = mlp_ratio;
    cfg.validate();
    return cfg;
  }
};

void add_model_flags(CLI::App* cmd, ModelFlags& mf) {
  cmd->add_option("--n-channels", mf.n_channels, "Spectrum length in channels");
  cmd->add_option("--patch-size", mf.patch_size, "Channels per patch");
  cmd->add_option("--embed-dim", mf.embed_dim, "Encoder embedding dimension");
  cmd->add_option("--depth", mf.encoder_depth, "Encoder transformer blocks");
  cmd->add_option("--heads", mf.encoder_heads, "Encoder attention heads");
  cmd->add_option("--decoder-dim", mf.decoder_dim, "Decoder embedding dimension");
  cmd->add_option("--decoder-depth", mf.decoder_depth, "Decoder transformer blocks");
  cmd->add_option("--decoder-heads", mf.decoder_heads, "Decoder attention heads");
  cmd->add_option("--mlp-ratio", mf.mlp_ratio, "MLP hidden width over embed dim");
}

void add_train_flags(CLI::App* cmd, TrainConfig& tf) {
  cmd->add_option("--epochs", tf.epochs, "Training epochs");
  cmd->add_option("--batch-size", tf.batch_size, "Batch size");
  cmd->add_option("--lr", tf.base_lr, "Peak learning rate");
  cmd->add_option("--warmup", tf.warmup_epochs, "Linear warmup epochs");
  cmd->add_option("--weight-decay", tf.weight_decay, "Decoupled weight decay");
  cmd->add_option("--seed", tf.seed, "Run seed");
  cmd->add_option("--mask-ratio", tf.mask_ratio, "Fraction of patches masked");
}

json model_json(const ModelConfig& m) {
  return json{{"n_channels", m.n_channels},
              {"patch_size", m.patch_size},
              {"embed_dim", m.embed_dim},
              {"encoder_depth", m.encoder_depth},
              {"encoder_heads", m.encoder_heads},
              {"decoder_dim", m.decoder_dim},
              {"decoder_depth", m.decoder_depth},
              {"decoder_heads", m.decoder_heads},
              {"mlp_ratio", m.mlp_ratio}};
}

json train_json(const TrainConfig& t) {
  return json{{"epochs", t.epochs},
              {"batch_size", t.batch_size},
              {"base_lr", t.base_lr},
              {"warmup_epochs", t.warmup_epochs},
              {"weight_decay", t.weight_decay},
              {"beta1", t.beta1},
              {"beta2", t.beta2},
              {"eps", t.eps},
              {"seed", t.seed},
              {"mask_ratio", t.mask_ratio}};
}

// Run directory layout: config.json, checkpoints/, metrics.csv, plots/.
fs::path prepare_run_dir(const std::string& out, const json& resolved) {
  fs::path dir(out);
  fs::create_directories(dir / "checkpoints");
  fs::create_directories(dir / "plots");
  std::ofstream cfg(dir / "config.json");
  if (!cfg) throw DataError("cannot write " + (dir / "config.json").string());
  cfg << resolved.dump(2) << "\n";
  return dir;
}

std::pair<std::vector<Spectrum>, std::vector<Spectrum>> split_spectra(
    const std::vector<Spectrum>& all, double val_ratio, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(all.size());
  for (const auto& s : all) ids.push_back(s.record_id);
  const auto split = split_dataset(ids, val_ratio, seed);
  std::unordered_map<std::string, const Spectrum*> by_id;
  for (const auto& s : all) by_id[s.record_id] = &s;
  std::vector<Spectrum> train, val;
  for (const auto& id : split.train_ids) train.push_back(*by_id.at(id));
  for (const auto& id : split.val_ids) val.push_back(*by_id.at(id));
  return {std::move(train), std::move(val)};
}

std::pair<std::vector<LabeledSpectrum>, std::vector<LabeledSpectrum>> split_pairs(
    const std::vector<LabeledSpectrum>& all, double val_ratio, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(all.size());
  for (const auto& p : all) ids.push_back(p.spectrum->record_id);
  const auto split = split_dataset(ids, val_ratio, seed);
  std::unordered_map<std::string, const LabeledSpectrum*> by_id;
  for (const auto& p : all) by_id[p.spectrum->record_id] = &p;
  std::vector<LabeledSpectrum> train, val;
  for (const auto& id : split.train_ids) train.push_back(*by_id.at(id));
  for (const auto& id : split.val_ids) val.push_back(*by_id.at(id));
  return {std::move(train), std::move(val)};
}

// ---- subcommands ---------------------------------------------------------

int cmd_synth(const std::string& out, int n, std::uint64_t seed, int n_channels,
              const std::string& task) {
  SyntheticConfig cfg;
  cfg.n_channels = n_channels;
  cfg.target_peak_center = n_channels * 640 / 2048;
  cfg.target_peak_sigma = std::max(2.0, n_channels * 40.0 / 2048.0);
  fs::create_directories(out);
  const auto spectra = synth_spectra(n, seed, cfg);
  save_spectra(spectra, (fs::path(out) / "spectra.csv").string());
  if (!task.empty()) {
    const auto labels = synth_labels(n, seed, parse_task(task), cfg);
    save_labels(labels, (fs::path(out) / "labels.csv").string());
  }
  std::cout << "wrote " << n << " spectra to " << out << "\n";
  return 0;
}

int cmd_pretrain(const std::string& data, const std::string& out,
                 double val_ratio, const std::string& transform,
                 const ModelFlags& mf, const TrainConfig& tf) {
  const auto mcfg = mf.to_config();
  tf.validate();
  const auto kind = parse_transform(transform);
  const json resolved = {{"command", "pretrain"},
                         {"data", data},
                         {"val_ratio", val_ratio},
                         {"transform", transform_name(kind)},
                         {"model", model_json(mcfg)},
                         {"train", train_json(tf)}};
  const auto dir = prepare_run_dir(out, resolved);

  const auto all = load_spectra(data, mcfg.n_channels);
  auto [train, val] = split_spectra(all, val_ratio, tf.seed);
  std::cout << "pretrain: " << train.size() << " train / " << val.size()
            << " val spectra, " << parameter_count(zero_parameters(mcfg))
            << " parameters\n";

  const auto result = pretrain(train, val, mcfg, tf, kind);
  save_checkpoint(result.best, (dir / "checkpoints" / "best.ckpt").string());
  save_checkpoint(result.final, (dir / "checkpoints" / "last.ckpt").string());
  save_metrics_csv(result.metrics, (dir / "metrics.csv").string());
  if (!result.metrics.empty()) {
    std::cout << "final train loss " << result.metrics.back().loss << "\n";
  }
  return 0;
}

int cmd_finetune(const std::string& data, const std::string& labels_path,
                 const std::string& task_str, const std::string& from,
                 long subsample_n, const std::string& out, double val_ratio,
                 const std::string& transform, const ModelFlags& mf,
                 const TrainConfig& tf) {
  const Task task = parse_task(task_str);
  tf.validate();

  std::optional<Checkpoint> base;
  ModelConfig mcfg;
  TransformKind kind;
  const ChannelStats* stats = nullptr;
  if (!from.empty()) {
    base = load_checkpoint(from);
    mcfg = base->model;
    kind = base->transform_kind;
    if (base->channel_stats) stats = &*base->channel_stats;
  } else {
    mcfg = mf.to_config();
    kind = parse_transform(transform);
  }

  const json resolved = {{"command", "finetune"},
                         {"data", data},
                         {"labels", labels_path},
                         {"task", task_name(task)},
                         {"from", from},
                         {"n", subsample_n},
                         {"val_ratio", val_ratio},
                         {"transform", transform_name(kind)},
                         {"model", model_json(mcfg)},
                         {"train", train_json(tf)}};
  const auto dir = prepare_run_dir(out, resolved);

  const auto spectra = load_spectra(data, mcfg.n_channels);
  const auto labels = load_labels(labels_path);
  const auto pairs = align_labels(spectra, labels, task);
  auto [train_pairs, val_pairs] = split_pairs(pairs, val_ratio, tf.seed);
  std::cout << "finetune " << task_name(task) << ": " << train_pairs.size()
            << " train / " << val_pairs.size() << " val labels"
            << (from.empty() ? " (from scratch)" : " (from " + from + ")")
            << "\n";

  const auto result = finetune(base ? &*base : nullptr, train_pairs, val_pairs,
                               task, mcfg, tf, subsample_n, kind, stats);
  save_checkpoint(result.best, (dir / "checkpoints" / "best.ckpt").string());
  save_checkpoint(result.final, (dir / "checkpoints" / "last.ckpt").string());
  save_metrics_csv(result.metrics, (dir / "metrics.csv").string());

  if (!val_pairs.empty()) {
    const auto report = evaluate_regression(result.best, val_pairs, task);
    std::cout << "val R2 " << report.r2 << ", RMSE " << report.rmse << " wt%\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& data,
                 const std::string& labels_path, const std::string& task_str,
                 const std::string& out, bool zero_shot) {
  const Task task = parse_task(task_str);
  const auto ckpt = load_checkpoint(ckpt_path);
  const auto spectra = load_spectra(data, ckpt.model.n_channels);
  const auto labels = load_labels(labels_path);
  const auto pairs = align_labels(spectra, labels, task);

  const auto report =
      evaluate_regression(ckpt, pairs, task, zero_shot ? "zero-shot" : "val");
  std::vector<double> targets;
  for (const auto& p : pairs) targets.push_back(p.value_wt_pct);
  if (ckpt.target_norm) {
    const auto warning = distribution_shift_warning(*ckpt.target_norm, targets);
    if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
  }

  std::cout << report.split_name << " " << task_name(task) << ": n=" << report.n
            << " R2=" << report.r2 << " RMSE=" << report.rmse << " wt%\n";
  if (!out.empty()) {
    save_eval_report_csv(report, out);
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

int cmd_sweep(const std::string& from, const std::string& data,
              const std::string& labels_path, const std::string& task_str,
              const std::vector<long>& grid, const std::string& out,
              double val_ratio, const TrainConfig& tf) {
  const Task task = parse_task(task_str);
  tf.validate();
  const auto base = load_checkpoint(from);

  json grid_json = json::array();
  for (long g : grid) grid_json.push_back(g);
  const json resolved = {{"command", "sweep"},     {"from", from},
                         {"data", data},           {"labels", labels_path},
                         {"task", task_name(task)}, {"grid", grid_json},
                         {"val_ratio", val_ratio}, {"train", train_json(tf)}};
  const auto dir = prepare_run_dir(out, resolved);

  const auto spectra = load_spectra(data, base.model.n_channels);
  const auto labels = load_labels(labels_path);
  const auto pairs = align_labels(spectra, labels, task);
  auto [train_pairs, val_pairs] = split_pairs(pairs, val_ratio, tf.seed);

  const auto rows = data_amount_sweep(base, train_pairs, val_pairs, task, grid, tf);
  save_sweep_csv(rows, (dir / "sweep.csv").string());

  SvgSeries pre, scratch;
  pre.color = "#1f77b4";
  pre.label = "pretrained";
  scratch.color = "#d62728";
  scratch.label = "scratch";
  for (const auto& row : rows) {
    auto& s = row.arm == "pretrained" ? pre : scratch;
    s.x.push_back(static_cast<double>(row.n_finetune));
    s.y.push_back(row.r2);
    std::cout << row.arm << " n=" << row.n_finetune << " R2=" << row.r2 << "\n";
  }
  write_svg_plot((dir / "plots" / "sweep.svg").string(), {pre, scratch}, {},
                 "validation R2 vs labeled examples", "labeled examples", "R2");
  return 0;
}

int cmd_saliency(const std::string& ckpt_path, const std::string& data,
                 const std::string& labels_path, const std::string& task_str,
                 const std::string& lines_path, const std::string& out, int top_k,
                 double window_kev) {
  const Task task = parse_task(task_str);
  const auto ckpt = load_checkpoint(ckpt_path);

  const json resolved = {{"command", "saliency"}, {"ckpt", ckpt_path},
                         {"data", data},          {"labels", labels_path},
                         {"task", task_name(task)}, {"lines", lines_path},
                         {"top_k", top_k},        {"window_kev", window_kev},
                         {"gradient_wrt", "transformed input"}};
  const auto dir = prepare_run_dir(out, resolved);

  const auto spectra = load_spectra(data, ckpt.model.n_channels);
  const auto labels = load_labels(labels_path);
  const auto pairs = align_labels(spectra, labels, task);

  const auto map = saliency_map(ckpt, pairs, task);
  save_saliency_csv(map, (dir / "saliency.csv").string());

  SvgSeries series;
  series.x = map.energy_axis_kev;
  series.y = map.values;
  series.label = "saliency";
  write_svg_plot((dir / "plots" / "saliency.svg").string(), {series}, {},
                 "input-gradient saliency (" + map.task + ")", "energy (keV)",
                 "|dL/dx|");

  if (!lines_path.empty()) {
    const auto table = load_emission_lines(lines_path);
    const auto peaks = annotate_peaks(map, table, top_k, window_kev);
    std::ofstream pf(dir / "peaks.csv");
    pf.precision(17);
    pf << "channel,energy_keV,saliency,matched_lines\n";
    for (const auto& peak : peaks) {
      std::string matched;
      for (const auto& m : peak.matched_lines) {
        if (!matched.empty()) matched += ';';
        matched += m;
      }
      pf << peak.channel << ',' << peak.energy_kev << ',' << peak.value << ','
         << matched << "\n";
      std::cout << "peak at " << peak.energy_kev << " keV"
                << (matched.empty() ? "" : " (" + matched + ")") << "\n";
    }
  }
  return 0;
}

int cmd_reconstruct(const std::string& ckpt_path, const std::string& data,
                    int n_examples, double mask_ratio, std::uint64_t seed,
                    const std::string& out) {
  const auto ckpt = load_checkpoint(ckpt_path);
  const json resolved = {{"command", "reconstruct"}, {"ckpt", ckpt_path},
                         {"data", data},             {"n_examples", n_examples},
                         {"mask_ratio", mask_ratio}, {"seed", seed}};
  const auto dir = prepare_run_dir(out, resolved);

  const auto spectra = load_spectra(data, ckpt.model.n_channels);
  if (n_examples < 1 || static_cast<std::size_t>(n_examples) > spectra.size()) {
    throw DataError("reconstruct: n_examples out of range");
  }
  const ChannelStats* stats = ckpt.channel_stats ? &*ckpt.channel_stats : nullptr;

  for (int i = 0; i < n_examples; ++i) {
    const auto& s = spectra[static_cast<std::size_t>(i)];
    const auto x = apply_transform(s.channels, ckpt.transform_kind, stats);
    const auto plan = sample_mask(ckpt.model.n_patches(), mask_ratio,
                                  derive_seed(seed, 0xC0DE, static_cast<std::uint64_t>(i)));
    const auto pass = pretrain_forward(x, plan, ckpt.params, ckpt.model);

    SvgSeries original;
    original.label = "original";
    for (std::size_t c = 0; c < x.size(); ++c) {
      original.x.push_back(static_cast<double>(c));
      original.y.push_back(x[c]);
    }
    SvgSeries recon;
    recon.label = "reconstruction";
    recon.color = "#d62728";
    recon.points = true;
    std::vector<SvgBand> bands;
    const int ps = ckpt.model.patch_size;
    for (int p : plan.masked_indices) {
      bands.push_back({static_cast<double>(p * ps),
                       static_cast<double>((p + 1) * ps), "#e8e8e8"});
      for (int c = 0; c < ps; ++c) {
        recon.x.push_back(static_cast<double>(p * ps + c));
        recon.y.push_back(pass.decoder.reconstruction(p, c));
      }
    }
    write_svg_plot((dir / "plots" / ("recon_" + std::to_string(i) + ".svg")).string(),
                   {original, recon}, bands,
                   "masked reconstruction: " + s.record_id, "channel",
                   "normalized counts");
    std::cout << s.record_id << " masked loss " << pass.loss << "\n";
  }

  const auto report = evaluate_reconstruction(ckpt, spectra, mask_ratio, seed);
  std::cout << "masked-reconstruction R2 over " << spectra.size()
            << " spectra: " << report.r2 << "\n";
  std::ofstream rf(dir / "reconstruction.csv");
  rf.precision(17);
  rf << "n,mask_ratio,r2,rmse\n"
     << spectra.size() << ',' << mask_ratio << ',' << report.r2 << ','
     << report.rmse << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"masked-autoencoder pipeline for XRF core-scanning spectra"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic spectra corpus");
  std::string synth_out = "data";
  int synth_n = 256;
  std::uint64_t synth_seed = 0;
  int synth_channels = 2048;
  std::string synth_task = "caco3";
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--n", synth_n, "Number of spectra");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--n-channels", synth_channels, "Spectrum length");
  synth->add_option("--task", synth_task, "Label task (caco3|toc), empty for none");

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "Masked-autoencoder pretraining");
  std::string pre_data, pre_out = "runs/pretrain";
  double pre_val_ratio = 0.2;
  std::string pre_transform = "instance";
  ModelFlags pre_mf;
  TrainConfig pre_tf;
  pre->add_option("--data", pre_data, "Spectra CSV")->required();
  pre->add_option("--out", pre_out, "Run directory");
  pre->add_option("--val-ratio", pre_val_ratio, "Validation fraction");
  pre->add_option("--transform", pre_transform,
                  "Input transform (instance|channel|log)");
  add_model_flags(pre, pre_mf);
  add_train_flags(pre, pre_tf);

  // finetune
  auto* ft = app.add_subcommand("finetune", "Regression fine-tuning");
  std::string ft_data, ft_labels, ft_task = "caco3", ft_from, ft_out = "runs/finetune";
  long ft_n = -1;
  double ft_val_ratio = 0.2;
  std::string ft_transform = "instance";
  ModelFlags ft_mf;
  TrainConfig ft_tf;
  ft_tf.base_lr = 1e-5;
  ft_tf.mask_ratio = 0.0;
  ft->add_option("--data", ft_data, "Spectra CSV")->required();
  ft->add_option("--labels", ft_labels, "Labels CSV")->required();
  ft->add_option("--task", ft_task, "Target task (caco3|toc)");
  ft->add_option("--from", ft_from, "Pretrained checkpoint (omit for scratch)");
  ft->add_option("--n", ft_n, "Subsample this many training labels (-1 = all)");
  ft->add_option("--out", ft_out, "Run directory");
  ft->add_option("--val-ratio", ft_val_ratio, "Validation fraction");
  ft->add_option("--transform", ft_transform,
                 "Input transform when training from scratch");
  add_model_flags(ft, ft_mf);
  add_train_flags(ft, ft_tf);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Evaluate a fine-tuned checkpoint");
  std::string ev_ckpt, ev_data, ev_labels, ev_task = "caco3", ev_out;
  bool ev_zero_shot = false;
  ev->add_option("--ckpt", ev_ckpt, "Fine-tuned checkpoint")->required();
  ev->add_option("--data", ev_data, "Spectra CSV")->required();
  ev->add_option("--labels", ev_labels, "Labels CSV")->required();
  ev->add_option("--task", ev_task, "Target task");
  ev->add_option("--out", ev_out, "Per-record prediction CSV");
  ev->add_flag("--zero-shot", ev_zero_shot,
               "Mark the report as zero-shot application to unseen material");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Label-efficiency sweep, both arms");
  std::string sw_from, sw_data, sw_labels, sw_task = "caco3", sw_out = "runs/sweep";
  std::vector<long> sw_grid = {16, 64, 256};
  double sw_val_ratio = 0.2;
  TrainConfig sw_tf;
  sw_tf.base_lr = 1e-5;
  sw_tf.mask_ratio = 0.0;
  sw->add_option("--from", sw_from, "Pretrained checkpoint")->required();
  sw->add_option("--data", sw_data, "Spectra CSV")->required();
  sw->add_option("--labels", sw_labels, "Labels CSV")->required();
  sw->add_option("--task", sw_task, "Target task");
  sw->add_option("--grid", sw_grid, "Training-set sizes to sweep")->delimiter(',');
  sw->add_option("--out", sw_out, "Run directory");
  sw->add_option("--val-ratio", sw_val_ratio, "Validation fraction");
  add_train_flags(sw, sw_tf);

  // saliency
  auto* sal = app.add_subcommand("saliency", "Input-gradient saliency map");
  std::string sal_ckpt, sal_data, sal_labels, sal_task = "caco3", sal_lines;
  std::string sal_out = "runs/saliency";
  int sal_top_k = 5;
  double sal_window = 0.05;
  sal->add_option("--ckpt", sal_ckpt, "Fine-tuned checkpoint")->required();
  sal->add_option("--data", sal_data, "Spectra CSV")->required();
  sal->add_option("--labels", sal_labels, "Labels CSV")->required();
  sal->add_option("--task", sal_task, "Target task");
  sal->add_option("--lines", sal_lines, "Emission line table CSV");
  sal->add_option("--out", sal_out, "Run directory");
  sal->add_option("--top-k", sal_top_k, "Peaks to report");
  sal->add_option("--window", sal_window, "Line-matching window in keV");

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "Masked-reconstruction overlays");
  std::string rec_ckpt, rec_data, rec_out = "runs/reconstruct";
  int rec_n = 3;
  double rec_ratio = 0.5;
  std::uint64_t rec_seed = 0;
  rec->add_option("--ckpt", rec_ckpt, "Pretrained checkpoint")->required();
  rec->add_option("--data", rec_data, "Spectra CSV")->required();
  rec->add_option("--n-examples", rec_n, "Spectra to render");
  rec->add_option("--mask-ratio", rec_ratio, "Fraction of patches masked");
  rec->add_option("--seed", rec_seed, "Mask seed");
  rec->add_option("--out", rec_out, "Run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      return cmd_synth(synth_out, synth_n, synth_seed, synth_channels, synth_task);
    }
    if (pre->parsed()) {
      return cmd_pretrain(pre_data, pre_out, pre_val_ratio, pre_transform, pre_mf,
                          pre_tf);
    }
    if (ft->parsed()) {
      return cmd_finetune(ft_data, ft_labels, ft_task, ft_from, ft_n, ft_out,
                          ft_val_ratio, ft_transform, ft_mf, ft_tf);
    }
    if (ev->parsed()) {
      return cmd_evaluate(ev_ckpt, ev_data, ev_labels, ev_task, ev_out,
                          ev_zero_shot);
    }
    if (sw->parsed()) {
      return cmd_sweep(sw_from, sw_data, sw_labels, sw_task, sw_grid, sw_out,
                       sw_val_ratio, sw_tf);
    }
    if (sal->parsed()) {
      return cmd_saliency(sal_ckpt, sal_data, sal_labels, sal_task, sal_lines,
                          sal_out, sal_top_k, sal_window);
    }
    if (rec->parsed()) {
      return cmd_reconstruct(rec_ckpt, rec_data, rec_n, rec_ratio, rec_seed,
                             rec_out);
    }
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
