#pragma once

#include <cstdint>
#include <vector>

#include "maxrf/dataset.hpp"

namespace maxrf {

struct SyntheticConfig {
  int n_channels = 2048;
  int min_peaks = 3;
  int max_peaks = 6;
  double min_sigma = 15.0;
  double max_sigma = 80.0;
  double min_amp = 50.0;
  double max_amp = 1000.0;
  double noise_std = 3.0;
  // one peak always sits here; its integrated area drives the labels
  int target_peak_center = 640;
  double target_peak_sigma = 40.0;
  // amplitude range of the designated peak; <= 0 falls back to min/max_amp
  double target_amp_min = 0.0;
  double target_amp_max = 0.0;
  // background peaks keep their centers at least this far from the
  // designated peak, like distinct emission lines; 0 allows overlap
  int exclusion_channels = 0;
  // per-spectrum shift of the designated peak's center, like energy
  // calibration drift between measurements; 0 keeps it fixed
  int target_jitter_channels = 0;
};

// Sums of Gaussian peaks plus noise, clipped to non-negative counts.
std::vector<Spectrum> synth_spectra(int n, std::uint64_t seed,
                                    const SyntheticConfig& cfg = {});

// Labels: the designated peak's integrated area as a share of the spectrum's
// total peak area, in [0, 100] wt%.
// Deterministically matched to synth_spectra(n, seed, cfg) by record_id.
std::vector<GeochemLabel> synth_labels(int n, std::uint64_t seed, Task task,
                                       const SyntheticConfig& cfg = {});

}  // namespace maxrf
