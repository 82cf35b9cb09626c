#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maxrf/optimize.hpp"

namespace maxrf {

struct PredictionRow {
  std::string record_id;
  double truth = 0.0;
  double prediction = 0.0;
};

struct EvalReport {
  std::string task;
  std::string split_name;
  int n = 0;
  double r2 = 0.0;
  double rmse = 0.0;
  std::vector<PredictionRow> predictions;
};

// 1 - SS_res / SS_tot; unbounded below.
double r_squared(std::span<const double> truth, std::span<const double> pred);

// Predictions denormalized through the checkpoint's TargetNorm; R2/RMSE in wt%.
EvalReport evaluate_regression(const Checkpoint& ckpt,
                               const std::vector<LabeledSpectrum>& pairs,
                               Task task, const std::string& split_name = "val");

// Masked-reconstruction quality: R2 pooled over all masked channels of all
// spectra, in transformed space.
EvalReport evaluate_reconstruction(const Checkpoint& ckpt,
                                   const std::vector<Spectrum>& spectra,
                                   double mask_ratio, std::uint64_t seed);

struct SweepRow {
  std::string task;
  long n_finetune = 0;
  std::string arm;  // "pretrained" or "scratch"
  double r2 = 0.0;
  double rmse = 0.0;
  std::uint64_t seed = 0;
};

// Fine-tunes both arms for each grid size and evaluates on the fixed
// validation pairs.
std::vector<SweepRow> data_amount_sweep(const Checkpoint& pretrain_ckpt,
                                        const std::vector<LabeledSpectrum>& train_pairs,
                                        const std::vector<LabeledSpectrum>& val_pairs,
                                        Task task, const std::vector<long>& grid,
                                        const TrainConfig& tcfg);

void save_eval_report_csv(const EvalReport& report, const std::string& path);
void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

// Flags a >1.5x shift between the training target mean (from TargetNorm) and
// the evaluated targets' mean. Returns a warning string, empty when fine.
std::string distribution_shift_warning(const TargetNorm& train_norm,
                                       std::span<const double> eval_targets);

}  // namespace maxrf
