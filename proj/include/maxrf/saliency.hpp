#pragma once

#include <string>
#include <vector>

#include "maxrf/evaluate.hpp"

namespace maxrf {

// Per-channel |dMSE/dx| averaged over a batch, with a keV axis.
struct SaliencyMap {
  std::vector<double> values;
  std::vector<double> energy_axis_kev;
  int batch_size = 0;
  std::string task;
};

struct EmissionLine {
  std::string element;
  std::string line;
  double energy_kev = 0.0;
};

using EmissionLineTable = std::vector<EmissionLine>;

// CSV: element,line,energy_keV
EmissionLineTable load_emission_lines(const std::string& path);

// Gradient is taken w.r.t. the transformed input the model consumes.
SaliencyMap saliency_map(const Checkpoint& ckpt,
                         const std::vector<LabeledSpectrum>& batch, Task task);

// Bin-center convention: energy = (index + 0.5) * 0.020 keV.
double channel_to_energy(int channel_index, int n_channels = 2048);

struct PeakMatch {
  int channel = 0;
  double energy_kev = 0.0;
  double value = 0.0;
  std::vector<std::string> matched_lines;  // "Ca Ka", "Ca Ka sum", ...
};

// Strict local maxima ranked by value; each matched against table lines and
// their 2x sum-peak energies within +-window_kev.
std::vector<PeakMatch> annotate_peaks(const SaliencyMap& map,
                                      const EmissionLineTable& lines, int top_k,
                                      double window_kev);

void save_saliency_csv(const SaliencyMap& map, const std::string& path);

}  // namespace maxrf
