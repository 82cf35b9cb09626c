#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace maxrf {

enum class Task { CaCO3, TOC };

std::string task_name(Task t);
Task parse_task(const std::string& name);

// One XRF measurement: channel counts plus provenance metadata.
struct Spectrum {
  std::string record_id;
  std::string core_id;
  double depth_cm = 0.0;
  std::vector<double> channels;
};

struct GeochemLabel {
  std::string record_id;
  Task task = Task::CaCO3;
  double value_wt_pct = 0.0;
};

struct DatasetSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::uint64_t seed = 0;
};

struct LabeledSpectrum {
  const Spectrum* spectrum;
  double value_wt_pct;
};

// Spectra CSV: record_id,core_id,depth_cm,ch_0000,...,ch_NNNN
std::vector<Spectrum> load_spectra(const std::string& path, int n_channels = 2048);
void save_spectra(const std::vector<Spectrum>& spectra, const std::string& path);

// Labels CSV: record_id,task,value_wt_pct
std::vector<GeochemLabel> load_labels(const std::string& path);
void save_labels(const std::vector<GeochemLabel>& labels, const std::string& path);

// Join labels of one task onto spectra by record_id; spectra order is kept.
std::vector<LabeledSpectrum> align_labels(const std::vector<Spectrum>& spectra,
                                          const std::vector<GeochemLabel>& labels,
                                          Task task);

// Deterministic shuffle split; |val| = floor(N * ratio_val).
DatasetSplit split_dataset(const std::vector<std::string>& ids, double ratio_val,
                           std::uint64_t seed);

}  // namespace maxrf
