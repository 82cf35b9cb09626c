#include "maxrf/evaluate.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace maxrf {

double r_squared(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size() || truth.empty()) {
    throw DataError("r_squared: length mismatch or empty input");
  }
  double mean = 0.0;
  for (double y : truth) mean += y;
  mean /= static_cast<double>(truth.size());
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
    ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
  }
  if (ss_tot == 0.0) throw DataError("r_squared: zero truth variance");
  return 1.0 - ss_res / ss_tot;
}

EvalReport evaluate_regression(const Checkpoint& ckpt,
                               const std::vector<LabeledSpectrum>& pairs,
                               Task task, const std::string& split_name) {
  if (!ckpt.target_norm) {
    throw DataError("evaluate_regression: checkpoint carries no TargetNorm (not fine-tuned?)");
  }
  if (!ckpt.task.empty() && ckpt.task != task_name(task)) {
    throw DataError("evaluate_regression: checkpoint was fine-tuned for task " +
                    ckpt.task + ", requested " + task_name(task));
  }
  const ChannelStats* stats =
      ckpt.channel_stats ? &*ckpt.channel_stats : nullptr;

  EvalReport report;
  report.task = task_name(task);
  report.split_name = split_name;
  std::vector<double> truth, pred;
  for (const auto& p : pairs) {
    const auto x = apply_transform(p.spectrum->channels, ckpt.transform_kind, stats);
    const double z = regression_forward(x, ckpt.params, ckpt.model).prediction;
    const double y_hat = invert_target_norm(z, *ckpt.target_norm);
    truth.push_back(p.value_wt_pct);
    pred.push_back(y_hat);
    report.predictions.push_back({p.spectrum->record_id, p.value_wt_pct, y_hat});
  }
  report.n = static_cast<int>(pairs.size());
  report.r2 = r_squared(truth, pred);
  double mse = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    mse += (truth[i] - pred[i]) * (truth[i] - pred[i]);
  }
  report.rmse = std::sqrt(mse / static_cast<double>(truth.size()));
  return report;
}

EvalReport evaluate_reconstruction(const Checkpoint& ckpt,
                                   const std::vector<Spectrum>& spectra,
                                   double mask_ratio, std::uint64_t seed) {
  const ChannelStats* stats =
      ckpt.channel_stats ? &*ckpt.channel_stats : nullptr;
  EvalReport report;
  report.task = "reconstruction";
  report.split_name = "val";
  report.n = static_cast<int>(spectra.size());

  std::vector<double> truth, pred;
  for (std::size_t j = 0; j < spectra.size(); ++j) {
    const auto x = apply_transform(spectra[j].channels, ckpt.transform_kind, stats);
    const MaskPlan plan =
        sample_mask(ckpt.model.n_patches(), mask_ratio,
                    derive_seed(seed, 0x9EC0ULL, static_cast<std::uint64_t>(j)));
    const PretrainPass pass = pretrain_forward(x, plan, ckpt.params, ckpt.model);
    for (int idx : plan.masked_indices) {
      for (int c = 0; c < ckpt.model.patch_size; ++c) {
        truth.push_back(pass.patches(idx, c));
        pred.push_back(pass.decoder.reconstruction(idx, c));
      }
    }
  }
  report.r2 = r_squared(truth, pred);
  double mse = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    mse += (truth[i] - pred[i]) * (truth[i] - pred[i]);
  }
  report.rmse = std::sqrt(mse / static_cast<double>(truth.size()));
  return report;
}

std::vector<SweepRow> data_amount_sweep(const Checkpoint& pretrain_ckpt,
                                        const std::vector<LabeledSpectrum>& train_pairs,
                                        const std::vector<LabeledSpectrum>& val_pairs,
                                        Task task, const std::vector<long>& grid,
                                        const TrainConfig& tcfg) {
  std::vector<SweepRow> rows;
  for (long n : grid) {
    if (n > static_cast<long>(train_pairs.size())) {
      throw DataError("data_amount_sweep: grid value " + std::to_string(n) +
                      " exceeds training pool " + std::to_string(train_pairs.size()));
    }
    for (const bool pretrained_arm : {true, false}) {
      TrainConfig cfg = tcfg;
      cfg.seed = derive_seed(tcfg.seed, static_cast<std::uint64_t>(n),
                             pretrained_arm ? 1 : 2);
      const FinetuneResult res = finetune(
          pretrained_arm ? &pretrain_ckpt : nullptr, train_pairs, val_pairs, task,
          pretrain_ckpt.model, cfg, n, pretrain_ckpt.transform_kind,
          pretrain_ckpt.channel_stats ? &*pretrain_ckpt.channel_stats : nullptr);
      const EvalReport report = evaluate_regression(res.best, val_pairs, task);
      rows.push_back({task_name(task), n, pretrained_arm ? "pretrained" : "scratch",
                      report.r2, report.rmse, cfg.seed});
    }
  }
  return rows;
}

void save_eval_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write eval report: " + path);
  out.precision(17);
  out << "record_id,truth,prediction\n";
  for (const auto& p : report.predictions) {
    out << p.record_id << ',' << p.truth << ',' << p.prediction << "\n";
  }
}

void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write sweep csv: " + path);
  out.precision(17);
  out << "task,n_finetune,arm,r2,rmse,seed\n";
  for (const auto& r : rows) {
    out << r.task << ',' << r.n_finetune << ',' << r.arm << ',' << r.r2 << ','
        << r.rmse << ',' << r.seed << "\n";
  }
}

std::string distribution_shift_warning(const TargetNorm& train_norm,
                                       std::span<const double> eval_targets) {
  if (eval_targets.empty()) return {};
  double mean = 0.0;
  for (double v : eval_targets) mean += v;
  mean /= static_cast<double>(eval_targets.size());
  if (train_norm.mean == 0.0) return {};
  const double ratio = mean / train_norm.mean;
  if (ratio > 1.5 || (ratio > 0.0 && ratio < 1.0 / 1.5)) {
    std::ostringstream os;
    os << "warning: evaluation target mean " << mean
       << " differs from training mean " << train_norm.mean
       << " by more than 1.5x; predictions may extrapolate poorly";
    return os.str();
  }
  return {};
}

}  // namespace maxrf
